#include "mspeu/ftcp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "json.hpp"

#include "mspeu/errors.hpp"

namespace mspeu {

using nlohmann::json;

const char* to_string(DiscountMode m) {
    return m == DiscountMode::PaperLiteral ? "paper_literal" : "compound";
}

DiscountMode discount_mode_from_string(const std::string& s) {
    if (s == "paper_literal") return DiscountMode::PaperLiteral;
    if (s == "compound") return DiscountMode::Compound;
    throw SchemaError("unknown discount_mode: " + s);
}

double FtcpInstance::disc(int s) const {
    if (discount_mode == DiscountMode::PaperLiteral) return 1.0 / (1.0 + std::pow(rho, s));
    return std::pow(1.0 + rho, -s);
}

double FtcpInstance::cumulative_disc(int t) const {
    double g = 1.0;
    for (int s = 2; s <= t; ++s) g *= disc(s);
    return g;
}

InstanceCheck validate_instance(const FtcpInstance& instance) {
    InstanceCheck check;
    const int I = instance.num_comps();
    const Mdst& tree = instance.tree;
    const int N = tree.num_nodes();
    auto bad = [&](const std::string& msg) { check.violations.push_back(msg); };

    if (I < 1) bad("at least one composition is required");
    auto tree_rep = validate(tree);
    for (const auto& v : tree_rep.violations) bad("tree: " + v.message);
    for (NodeId n = 0; n < N; ++n)
        if (tree.num_dists(n) != I)
            bad("node " + std::to_string(n) + " carries " + std::to_string(tree.num_dists(n)) +
                " distributions; expected |I| = " + std::to_string(I));

    auto check_per_comp = [&](const std::vector<std::vector<double>>& data, const char* what) {
        if (static_cast<int>(data.size()) != I) {
            bad(std::string(what) + " must have one row per composition");
            return false;
        }
        for (const auto& row : data)
            if (static_cast<int>(row.size()) != N) {
                bad(std::string(what) + " rows must have one entry per node");
                return false;
            }
        return true;
    };
    const bool v_ok = check_per_comp(instance.value, "value");
    check_per_comp(instance.salary, "salary");

    if (static_cast<int>(instance.transition.size()) != I) {
        bad("transition must be |I| x |I| x |N|");
    } else {
        for (int i = 0; i < I; ++i) {
            if (static_cast<int>(instance.transition[i].size()) != I) {
                bad("transition must be |I| x |I| x |N|");
                break;
            }
            for (int j = 0; j < I; ++j)
                if (static_cast<int>(instance.transition[i][j].size()) != N) {
                    bad("transition must be |I| x |I| x |N|");
                    i = I;
                    break;
                }
        }
        for (int i = 0; i < I && check.violations.empty(); ++i)
            for (NodeId n = 0; n < N; ++n)
                if (instance.transition[i][i][n] != 0.0)
                    bad("diagonal transition cost must be zero (composition " + std::to_string(i) +
                        ", node " + std::to_string(n) + ")");
    }

    if (static_cast<int>(instance.extra_budget.size()) != N) {
        bad("extra_budget must have one entry per node");
    } else {
        if (instance.extra_budget[0] != 0.0) bad("extra_budget at the root must be zero");
        for (NodeId n = 0; n < N; ++n)
            if (instance.extra_budget[n] < 0.0)
                bad("extra_budget must be nonnegative (node " + std::to_string(n) + ")");
    }
    if (instance.rho < 0.0) bad("rho must be nonnegative");
    if (instance.initial < 0 || instance.initial >= I) bad("initial composition out of range");
    if (v_ok)
        for (int i = 0; i < I; ++i)
            for (NodeId n = 0; n < N; ++n)
                if (instance.value[i][n] < 0.0) {
                    check.warnings.push_back(
                        "negative composition value at (" + std::to_string(i) + ", " +
                        std::to_string(n) + "); the fast big-M rule assumes nonnegative values");
                    i = I;
                    break;
                }
    return check;
}

namespace {

std::string key2(int i, NodeId n) { return std::to_string(i) + "," + std::to_string(n); }
std::string key3(int i, int j, NodeId n) {
    return std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(n);
}

json tree_to_json(const Mdst& tree) {
    json nodes = json::array();
    for (NodeId n = 0; n < tree.num_nodes(); ++n)
        nodes.push_back({{"id", n},
                         {"stage", tree.stage[n]},
                         {"parent", tree.parent[n]},
                         {"prob", tree.prob[n]}});
    json children = json::object();
    for (NodeId n = 0; n < tree.num_nodes(); ++n) {
        if (tree.num_dists(n) == 0) continue;
        json per_dist = json::object();
        for (DistId d = 0; d < tree.num_dists(n); ++d)
            per_dist[std::to_string(d)] = tree.kids(n, d);
        children[std::to_string(n)] = std::move(per_dist);
    }
    return {{"num_stages", tree.num_stages}, {"nodes", nodes}, {"children", children}};
}

Mdst tree_from_json(const json& j) {
    Mdst tree;
    if (!j.contains("num_stages") || !j.contains("nodes"))
        throw SchemaError("/tree: num_stages and nodes are required");
    tree.num_stages = j.at("num_stages").get<int>();
    const auto& nodes = j.at("nodes");
    const int N = static_cast<int>(nodes.size());
    tree.stage.assign(N, 0);
    tree.parent.assign(N, -1);
    tree.prob.assign(N, 0.0);
    tree.children.assign(N, {});
    for (std::size_t idx = 0; idx < nodes.size(); ++idx) {
        const auto& nd = nodes[idx];
        const std::string path = "/tree/nodes/" + std::to_string(idx);
        if (!nd.contains("id") || !nd.contains("stage") || !nd.contains("prob"))
            throw SchemaError(path + ": id, stage and prob are required");
        const int id = nd.at("id").get<int>();
        if (id < 0 || id >= N) throw SchemaError(path + "/id: out of range");
        tree.stage[id] = nd.at("stage").get<int>();
        tree.parent[id] = nd.value("parent", -1);
        tree.prob[id] = nd.at("prob").get<double>();
    }
    if (j.contains("children")) {
        for (const auto& [node_key, per_dist] : j.at("children").items()) {
            const int n = std::stoi(node_key);
            if (n < 0 || n >= N) throw SchemaError("/tree/children/" + node_key + ": bad node id");
            int max_d = -1;
            for (const auto& [dist_key, ids] : per_dist.items())
                max_d = std::max(max_d, std::stoi(dist_key));
            tree.children[n].assign(max_d + 1, {});
            for (const auto& [dist_key, ids] : per_dist.items()) {
                const int d = std::stoi(dist_key);
                for (const auto& cid : ids) tree.children[n][d].push_back(cid.get<int>());
            }
        }
    }
    return tree;
}

void parse_per_comp(const json& j, const char* field, int I, int N,
                    std::vector<std::vector<double>>& out) {
    out.assign(I, std::vector<double>(N, 0.0));
    if (!j.contains(field)) throw SchemaError(std::string("/") + field + ": required");
    for (const auto& [key, val] : j.at(field).items()) {
        int i, n;
        if (std::sscanf(key.c_str(), "%d,%d", &i, &n) != 2 || i < 0 || i >= I || n < 0 || n >= N)
            throw SchemaError(std::string("/") + field + "/" + key + ": bad key");
        out[i][n] = val.get<double>();
    }
}

} // namespace

std::string instance_to_json(const FtcpInstance& instance) {
    const int I = instance.num_comps();
    const int N = instance.tree.num_nodes();
    json j;
    j["format"] = "ftcp-mdst/1";
    j["rho"] = instance.rho;
    j["discount_mode"] = to_string(instance.discount_mode);
    j["budget"] = instance.budget;
    j["initial"] = instance.initial;
    j["compositions"] = instance.compositions;
    j["tree"] = tree_to_json(instance.tree);
    json v = json::object(), cs = json::object(), ct = json::object(), eb = json::object();
    for (int i = 0; i < I; ++i)
        for (NodeId n = 0; n < N; ++n) {
            v[key2(i, n)] = instance.value[i][n];
            cs[key2(i, n)] = instance.salary[i][n];
        }
    for (int i = 0; i < I; ++i)
        for (int jj = 0; jj < I; ++jj)
            for (NodeId n = 0; n < N; ++n)
                if (instance.transition[i][jj][n] != 0.0)
                    ct[key3(i, jj, n)] = instance.transition[i][jj][n];
    for (NodeId n = 0; n < N; ++n)
        if (instance.extra_budget[n] != 0.0) eb[std::to_string(n)] = instance.extra_budget[n];
    j["V"] = std::move(v);
    j["Cs"] = std::move(cs);
    j["Ct"] = std::move(ct);
    j["extra_budget"] = std::move(eb);
    if (!instance.generator_audit_json.empty())
        j["generator_audit"] = json::parse(instance.generator_audit_json);
    return j.dump(1) + "\n";
}

void save_instance(const FtcpInstance& instance, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("save_instance: cannot open " + path);
    os << instance_to_json(instance);
    if (!os) throw Error("save_instance: write failed for " + path);
}

FtcpInstance load_instance(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("load_instance: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw SchemaError("load_instance: " + path + ": " + e.what());
    }
    if (j.value("format", "") != "ftcp-mdst/1")
        throw SchemaError("/format: expected \"ftcp-mdst/1\"");

    FtcpInstance instance;
    instance.rho = j.value("rho", 0.0);
    instance.discount_mode = discount_mode_from_string(j.value("discount_mode", "paper_literal"));
    instance.budget = j.value("budget", 0.0);
    instance.initial = j.value("initial", 0);
    if (!j.contains("compositions")) throw SchemaError("/compositions: required");
    instance.compositions = j.at("compositions").get<std::vector<std::string>>();
    if (!j.contains("tree")) throw SchemaError("/tree: required");
    instance.tree = tree_from_json(j.at("tree"));
    const int I = instance.num_comps();
    const int N = instance.tree.num_nodes();

    parse_per_comp(j, "V", I, N, instance.value);
    parse_per_comp(j, "Cs", I, N, instance.salary);

    instance.transition.assign(I, std::vector<std::vector<double>>(I, std::vector<double>(N, 0.0)));
    if (j.contains("Ct")) {
        for (const auto& [key, val] : j.at("Ct").items()) {
            int a, b, n;
            const int fields = std::sscanf(key.c_str(), "%d,%d,%d", &a, &b, &n);
            if (fields == 3) {
                if (a < 0 || a >= I || b < 0 || b >= I || n < 0 || n >= N)
                    throw SchemaError("/Ct/" + key + ": bad key");
                instance.transition[a][b][n] = val.get<double>();
            } else if (fields == 2) {
                // Node-constant shorthand: "i,j" applies at every node.
                if (a < 0 || a >= I || b < 0 || b >= I)
                    throw SchemaError("/Ct/" + key + ": bad key");
                for (NodeId n2 = 0; n2 < N; ++n2)
                    instance.transition[a][b][n2] = val.get<double>();
            } else {
                throw SchemaError("/Ct/" + key + ": bad key");
            }
        }
    }
    instance.extra_budget.assign(N, 0.0);
    if (j.contains("extra_budget")) {
        for (const auto& [key, val] : j.at("extra_budget").items()) {
            const int n = std::stoi(key);
            if (n < 0 || n >= N) throw SchemaError("/extra_budget/" + key + ": bad node id");
            instance.extra_budget[n] = val.get<double>();
        }
    }
    if (j.contains("generator_audit"))
        instance.generator_audit_json = j.at("generator_audit").dump();

    auto check = validate_instance(instance);
    if (!check.ok())
        throw SchemaError("load_instance: " + path + ": " + check.violations.front());
    return instance;
}

namespace {

// Deterministic standard normal from explicit uniforms; no library
// distribution is used so streams are reproducible across platforms.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : eng_(seed) {}
    double next() {
        const double u1 = ((eng_() >> 11) + 1.0) * 0x1.0p-53; // in (0, 1]
        const double u2 = (eng_() >> 11) * 0x1.0p-53;         // in [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace

FtcpInstance generate_instance(const GeneratorParams& params) {
    const int I = params.num_compositions;
    const int P = params.players_per_composition;
    if (I < 1) throw Error("generate_instance: num_compositions must be >= 1");
    if (params.samples < 1) throw Error("generate_instance: samples must be >= 1");
    if (params.stages < 2) throw Error("generate_instance: stages must be >= 2");
    if (P < 1) throw Error("generate_instance: players_per_composition must be >= 1");
    if (params.initial < 0 || params.initial >= I)
        throw Error("generate_instance: initial composition out of range");

    if (params.correlation < 0.0 || params.correlation >= 1.0)
        throw Error("generate_instance: correlation must lie in [0, 1)");

    // Within-team correlation matrix and its Cholesky factor; the factor
    // drives every correlated draw. Failure here means the requested
    // correlation is not positive definite.
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(P, P, params.correlation);
    corr.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success)
        throw Error("generate_instance: correlation matrix is not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();

    FtcpInstance instance;
    instance.tree = build_uniform_tree(params.stages, I, params.samples);
    for (NodeId n = 0; n < instance.tree.num_nodes(); ++n)
        if (instance.tree.is_leaf(n)) instance.tree.children[n].assign(I, {});
    const int N = instance.tree.num_nodes();

    instance.compositions.resize(I);
    for (int i = 0; i < I; ++i) instance.compositions[i] = "comp" + std::to_string(i);
    instance.budget = params.budget;
    instance.rho = params.rho;
    instance.discount_mode = params.discount_mode;
    instance.initial = params.initial;

    std::vector<double> means = params.value_means;
    std::vector<double> vols = params.value_vols;
    means.resize(I, means.empty() ? 100.0 : means.back());
    vols.resize(I, vols.empty() ? 0.15 : vols.back());

    // Player-level values: P synthetic players per composition, evolving by a
    // lognormal step whose shocks are correlated within the composition that
    // the traversed distribution enforces.
    const int total_players = I * P;
    std::vector<std::vector<double>> pv(N, std::vector<double>(total_players, 0.0));
    for (int i = 0; i < I; ++i)
        for (int p = 0; p < P; ++p) pv[0][i * P + p] = means[i] / P;

    NormalStream normals(params.seed);
    std::vector<double> g(total_players), z(total_players);
    for (NodeId n = 0; n < N; ++n) {
        for (DistId i = 0; i < instance.tree.num_dists(n); ++i) {
            for (NodeId child : instance.tree.kids(n, i)) {
                for (int p = 0; p < total_players; ++p) g[p] = normals.next();
                for (int p = 0; p < total_players; ++p) z[p] = g[p];
                for (int a = 0; a < P; ++a) { // correlate the enforced team's block
                    double acc = 0.0;
                    for (int b = 0; b <= a; ++b) acc += chol(a, b) * g[i * P + b];
                    z[i * P + a] = acc;
                }
                for (int team = 0; team < I; ++team) {
                    const double vol = vols[team];
                    for (int p = 0; p < P; ++p) {
                        const int idx = team * P + p;
                        pv[child][idx] =
                            pv[n][idx] *
                            std::exp(params.drift - 0.5 * vol * vol + vol * z[idx]);
                    }
                }
            }
        }
    }

    instance.value.assign(I, std::vector<double>(N, 0.0));
    instance.salary.assign(I, std::vector<double>(N, 0.0));
    for (int i = 0; i < I; ++i)
        for (NodeId n = 0; n < N; ++n) {
            double v = 0.0;
            for (int p = 0; p < P; ++p) v += pv[n][i * P + p];
            instance.value[i][n] = v;
            instance.salary[i][n] = params.salary_rate * v;
        }

    instance.transition.assign(I, std::vector<std::vector<double>>(I, std::vector<double>(N, 0.0)));
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < I; ++j) {
            if (i == j) continue;
            for (NodeId n = 0; n < N; ++n)
                instance.transition[i][j][n] =
                    params.fee_rate * (instance.value[j][n] - instance.value[i][n]) +
                    params.churn_rate * 0.5 * (instance.value[i][n] + instance.value[j][n]);
        }

    // Extra budget: the reference composition's relative value growth.
    instance.extra_budget.assign(N, 0.0);
    const int ref = params.initial;
    for (NodeId n = 1; n < N; ++n) {
        const NodeId p = instance.tree.parent[n];
        const double prev = instance.value[ref][p];
        if (prev > 0.0)
            instance.extra_budget[n] =
                params.budget *
                std::max(0.0, (instance.value[ref][n] - prev) / prev);
    }

    json audit;
    audit["seed"] = params.seed;
    audit["params"] = {{"num_compositions", I},
                       {"samples", params.samples},
                       {"stages", params.stages},
                       {"value_means", means},
                       {"value_vols", vols},
                       {"correlation", params.correlation},
                       {"budget", params.budget},
                       {"rho", params.rho},
                       {"discount_mode", to_string(params.discount_mode)},
                       {"initial", params.initial},
                       {"players_per_composition", P},
                       {"salary_rate", params.salary_rate},
                       {"fee_rate", params.fee_rate},
                       {"churn_rate", params.churn_rate},
                       {"drift", params.drift}};
    audit["reference_composition"] = ref;
    if (params.audit_players) {
        json pvj = json::object();
        for (NodeId n = 0; n < N; ++n) pvj[std::to_string(n)] = pv[n];
        audit["player_values"] = std::move(pvj);
    }
    instance.generator_audit_json = audit.dump();

    auto check = validate_instance(instance);
    if (!check.ok())
        throw Error("generate_instance: produced an invalid instance: " +
                    check.violations.front());
    return instance;
}

FtcpInstance make_structural_instance(int num_compositions, int samples, int stages) {
    const int I = num_compositions;
    FtcpInstance instance;
    instance.tree = build_uniform_tree(stages, I, samples);
    for (NodeId n = 0; n < instance.tree.num_nodes(); ++n)
        if (instance.tree.is_leaf(n)) instance.tree.children[n].assign(I, {});
    const int N = instance.tree.num_nodes();
    instance.compositions.resize(I);
    for (int i = 0; i < I; ++i) instance.compositions[i] = "comp" + std::to_string(i);
    instance.budget = 100.0;
    instance.rho = 0.1;
    instance.value.assign(I, std::vector<double>(N, 0.0));
    instance.salary.assign(I, std::vector<double>(N, 0.0));
    for (int i = 0; i < I; ++i) {
        const double v = 100.0 * (i + 1);
        for (NodeId n = 0; n < N; ++n) {
            instance.value[i][n] = v;
            instance.salary[i][n] = 0.1 * v;
        }
    }
    instance.transition.assign(I, std::vector<std::vector<double>>(I, std::vector<double>(N, 0.0)));
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < I; ++j)
            if (i != j)
                for (NodeId n = 0; n < N; ++n)
                    instance.transition[i][j][n] = 50.0 * (j - i) + 10.0;
    instance.extra_budget.assign(N, 0.0);
    return instance;
}

milp::MilpModel build_ftcp_milp(const FtcpInstance& instance, const BigMTable& bigm) {
    using namespace milp;
    auto check = validate_instance(instance);
    if (!check.ok()) throw Error("build_ftcp_milp: " + check.violations.front());

    const Mdst& tree = instance.tree;
    const int I = instance.num_comps();
    const int N = tree.num_nodes();
    MilpModel model;
    model.set_sense(Sense::Max);

    std::vector<int> dl(N), xv(N), th(N), ph(N, -1);
    for (NodeId n = 0; n < N; ++n) {
        dl[n] = model.num_vars();
        for (int i = 0; i < I; ++i)
            model.add_var("delta_" + std::to_string(i) + "_" + std::to_string(n), 0.0, 1.0, true);
        xv[n] = model.num_vars();
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < I; ++j)
                model.add_var("x_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
                                  std::to_string(n),
                              0.0, i == j ? 0.0 : 1.0, true);
        th[n] = model.add_var("theta_" + std::to_string(n), -kInf, kInf, false);
        if (!tree.is_leaf(n)) {
            ph[n] = model.num_vars();
            for (int i = 0; i < I; ++i)
                model.add_var("phi_" + std::to_string(i) + "_" + std::to_string(n), -kInf, kInf,
                              false);
        }
    }
    auto xij = [&](NodeId n, int i, int j) { return xv[n] + i * I + j; };

    // Objective: root value net of salaries and transition fees, plus theta_0.
    for (int i = 0; i < I; ++i) {
        model.set_obj(dl[0] + i, instance.value[i][0] - instance.salary[i][0]);
        for (int j = 0; j < I; ++j)
            if (i != j) model.set_obj(xij(0, i, j), -instance.transition[i][j][0]);
    }
    model.set_obj(th[0], 1.0);

    for (NodeId n = 0; n < N; ++n) {
        {
            std::vector<std::pair<int, double>> coeffs;
            for (int i = 0; i < I; ++i) coeffs.push_back({dl[n] + i, 1.0});
            model.add_row("onlyone_" + std::to_string(n), std::move(coeffs), Rel::Eq, 1.0);
        }
        const NodeId p = tree.parent[n];
        for (int i = 0; i < I; ++i) {
            std::vector<std::pair<int, double>> coeffs;
            coeffs.push_back({dl[n] + i, 1.0});
            double rhs = 0.0;
            if (p < 0)
                rhs = i == instance.initial ? 1.0 : 0.0;
            else
                coeffs.push_back({dl[p] + i, -1.0});
            for (int j = 0; j < I; ++j) {
                if (j == i) continue;
                coeffs.push_back({xij(n, i, j), 1.0});
                coeffs.push_back({xij(n, j, i), -1.0});
            }
            model.add_row("changeorhold_" + std::to_string(i) + "_" + std::to_string(n),
                          std::move(coeffs), Rel::Eq, rhs);
        }
        {
            std::vector<std::pair<int, double>> coeffs;
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < I; ++j)
                    if (i != j) coeffs.push_back({xij(n, i, j), 1.0});
            model.add_row("maxonechange_" + std::to_string(n), std::move(coeffs), Rel::Le, 1.0);
        }
        {
            std::vector<std::pair<int, double>> coeffs;
            for (int i = 0; i < I; ++i)
                for (int j = 0; j < I; ++j)
                    if (i != j && instance.transition[i][j][n] != 0.0)
                        coeffs.push_back({xij(n, i, j), instance.transition[i][j][n]});
            model.add_row("budget_" + std::to_string(n), std::move(coeffs), Rel::Le,
                          instance.budget + instance.extra_budget[n]);
        }
        if (!tree.is_leaf(n)) {
            for (int i = 0; i < I; ++i) {
                const double m_val = bigm.at(n, i);
                model.add_row("thetabound_" + std::to_string(i) + "_" + std::to_string(n),
                              {{th[n], 1.0}, {ph[n] + i, -1.0}, {dl[n] + i, m_val}}, Rel::Le,
                              m_val);
                // phi definition: the discounted child expectation.
                std::vector<std::pair<int, double>> coeffs;
                coeffs.push_back({ph[n] + i, 1.0});
                for (NodeId m : tree.kids(n, i)) {
                    const double w = instance.disc(tree.stage[m]) * tree.prob[m];
                    coeffs.push_back({th[m], -w});
                    for (int jj = 0; jj < I; ++jj) {
                        coeffs.push_back(
                            {dl[m] + jj, -w * (instance.value[jj][m] - instance.salary[jj][m])});
                        for (int kk = 0; kk < I; ++kk)
                            if (jj != kk && instance.transition[jj][kk][m] != 0.0)
                                coeffs.push_back(
                                    {xij(m, jj, kk), w * instance.transition[jj][kk][m]});
                    }
                }
                model.add_row("phidef_" + std::to_string(i) + "_" + std::to_string(n),
                              std::move(coeffs), Rel::Eq, 0.0);
            }
        } else {
            const double w = instance.disc(tree.stage[n] + 1);
            std::vector<std::pair<int, double>> coeffs;
            coeffs.push_back({th[n], 1.0});
            for (int i = 0; i < I; ++i)
                coeffs.push_back({dl[n] + i, -w * instance.value[i][n]});
            model.add_row("sunset_" + std::to_string(n), std::move(coeffs), Rel::Eq, 0.0);
        }
    }
    return model;
}

MspeuProblem to_mspeu(const FtcpInstance& instance) {
    auto check = validate_instance(instance);
    if (!check.ok()) throw Error("to_mspeu: " + check.violations.front());

    const Mdst& tree = instance.tree;
    const int I = instance.num_comps();
    const int N = tree.num_nodes();
    const int n_x = I * I + 2;  // transitions plus change/budget slacks
    const int rows = I + 2;

    MspeuProblem problem;
    problem.tree = tree;
    problem.c_is_zero = true;
    problem.blocks.resize(N);
    for (NodeId n = 0; n < N; ++n) {
        NodeBlock& b = problem.blocks[n];
        const double g = instance.cumulative_disc(tree.stage[n]);
        b.r.assign(n_x, 0.0);
        b.domains.assign(n_x, VarDomain{0.0, 1.0, true});
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < I; ++j) {
                const int col = i * I + j;
                if (i == j) b.domains[col] = {0.0, 0.0, true};
                else b.r[col] = -g * instance.transition[i][j][n];
            }
        b.domains[I * I] = {0.0, milp::kInf, false};     // change slack
        b.domains[I * I + 1] = {0.0, milp::kInf, false}; // budget slack

        b.q.resize(I);
        for (int i = 0; i < I; ++i) {
            double q = g * (instance.value[i][n] - instance.salary[i][n]);
            if (tree.is_leaf(n))
                q += g * instance.disc(tree.stage[n] + 1) * instance.value[i][n]; // sunset value
            b.q[i] = q;
        }
        b.theta_terminal = 0.0;

        b.A.assign(rows, std::vector<double>(n_x, 0.0));
        b.B.assign(rows, std::vector<double>(I, 0.0));
        b.h.assign(rows, 0.0);
        for (int i = 0; i < I; ++i) {
            b.B[i][i] = 1.0;
            for (int j = 0; j < I; ++j) {
                if (j == i) continue;
                b.A[i][i * I + j] += 1.0;
                b.A[i][j * I + i] -= 1.0;
            }
            b.h[i] = tree.parent[n] < 0 && i == instance.initial ? 1.0 : 0.0;
        }
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < I; ++j)
                if (i != j) b.A[I][i * I + j] = 1.0;
        b.A[I][I * I] = 1.0;
        b.h[I] = 1.0;
        for (int i = 0; i < I; ++i)
            for (int j = 0; j < I; ++j)
                if (i != j) b.A[I + 1][i * I + j] = instance.transition[i][j][n];
        b.A[I + 1][I * I + 1] = 1.0;
        b.h[I + 1] = instance.budget + instance.extra_budget[n];

        if (!tree.is_leaf(n)) {
            b.C_to_children.clear(); // no parent-x coupling anywhere
            b.D_to_children.assign(rows, std::vector<double>(I, 0.0));
            for (int i = 0; i < I; ++i) b.D_to_children[i][i] = -1.0;
        }
    }
    return problem;
}

BigMTable ftcp_bigm_to_mspeu(const FtcpInstance& instance, const BigMTable& ftcp_table) {
    BigMTable out;
    for (const auto& [key, v] : ftcp_table.entries())
        out.set(key.first, key.second, instance.cumulative_disc(instance.tree.stage[key.first]) * v);
    return out;
}

void write_solution_csv(const FtcpInstance& instance, const MspeuSolution& sol,
                        const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("write_solution_csv: cannot open " + path);
    const Mdst& tree = instance.tree;
    const int I = instance.num_comps();
    os << "node,stage,parent,prob,composition,transition,theta,on_policy\n";
    char buf[64];
    for (NodeId n = 0; n < tree.num_nodes(); ++n) {
        const int chosen = n < static_cast<int>(sol.delta.size()) ? sol.chosen(n) : -1;
        std::string trans;
        if (n < static_cast<int>(sol.x.size()) &&
            static_cast<int>(sol.x[n].size()) >= I * I) {
            for (int i = 0; i < I && trans.empty(); ++i)
                for (int j = 0; j < I; ++j)
                    if (i != j && sol.x[n][i * I + j] > 0.5) {
                        trans = instance.compositions[i] + ">" + instance.compositions[j];
                        break;
                    }
        }
        std::snprintf(buf, sizeof(buf), "%.17g", tree.prob[n]);
        os << n << ',' << tree.stage[n] << ',' << tree.parent[n] << ',' << buf << ','
           << (chosen >= 0 ? instance.compositions[chosen] : std::string()) << ',' << trans << ',';
        std::snprintf(buf, sizeof(buf), "%.17g",
                      n < static_cast<int>(sol.theta.size()) ? sol.theta[n] : 0.0);
        os << buf << ','
           << (n < static_cast<int>(sol.on_policy.size()) ? int(sol.on_policy[n]) : 1) << '\n';
    }
}

} // namespace mspeu
