#include "mspeu/problem_io.hpp"

#include <fstream>

#include "json.hpp"

#include "mspeu/errors.hpp"
#include "mspeu/milp/model.hpp"

namespace mspeu {

using nlohmann::json;

namespace {

json domain_to_json(const VarDomain& d) {
    json out;
    out["lb"] = std::isfinite(d.lb) ? json(d.lb) : json("-inf");
    out["ub"] = std::isfinite(d.ub) ? json(d.ub) : json("+inf");
    out["integer"] = d.integral;
    return out;
}

double bound_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "-inf") return -milp::kInf;
        if (s == "+inf" || s == "inf") return milp::kInf;
        throw SchemaError("bad bound string: " + s);
    }
    return j.get<double>();
}

} // namespace

std::string problem_to_json(const MspeuProblem& problem) {
    const Mdst& tree = problem.tree;
    json j;
    j["format"] = "mspeu/1";
    j["c_is_zero"] = problem.c_is_zero;
    {
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
        j["tree"] = {{"num_stages", tree.num_stages}, {"nodes", nodes}, {"children", children}};
    }
    json blocks = json::object();
    for (NodeId n = 0; n < tree.num_nodes(); ++n) {
        const NodeBlock& b = problem.blocks[n];
        json jb;
        jb["r"] = b.r;
        jb["q"] = b.q;
        jb["A"] = b.A;
        jb["B"] = b.B;
        if (!b.C_to_children.empty()) jb["C_to_children"] = b.C_to_children;
        if (!b.D_to_children.empty()) jb["D_to_children"] = b.D_to_children;
        jb["h"] = b.h;
        if (tree.is_leaf(n)) jb["theta_terminal"] = b.theta_terminal;
        json doms = json::array();
        for (const auto& d : b.domains) doms.push_back(domain_to_json(d));
        jb["domains"] = std::move(doms);
        blocks[std::to_string(n)] = std::move(jb);
    }
    j["blocks"] = std::move(blocks);
    return j.dump(1) + "\n";
}

void save_problem(const MspeuProblem& problem, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("save_problem: cannot open " + path);
    os << problem_to_json(problem);
    if (!os) throw Error("save_problem: write failed for " + path);
}

MspeuProblem load_problem(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("load_problem: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw SchemaError("load_problem: " + path + ": " + e.what());
    }
    if (j.value("format", "") != "mspeu/1")
        throw SchemaError("/format: expected \"mspeu/1\"");

    MspeuProblem problem;
    problem.c_is_zero = j.value("c_is_zero", false);
    {
        const json& jt = j.at("tree");
        Mdst& tree = problem.tree;
        tree.num_stages = jt.at("num_stages").get<int>();
        const auto& nodes = jt.at("nodes");
        const int N = static_cast<int>(nodes.size());
        tree.stage.assign(N, 0);
        tree.parent.assign(N, -1);
        tree.prob.assign(N, 0.0);
        tree.children.assign(N, {});
        for (const auto& nd : nodes) {
            const int id = nd.at("id").get<int>();
            if (id < 0 || id >= N) throw SchemaError("/tree/nodes: id out of range");
            tree.stage[id] = nd.at("stage").get<int>();
            tree.parent[id] = nd.value("parent", -1);
            tree.prob[id] = nd.at("prob").get<double>();
        }
        if (jt.contains("children"))
            for (const auto& [node_key, per_dist] : jt.at("children").items()) {
                const int n = std::stoi(node_key);
                if (n < 0 || n >= N)
                    throw SchemaError("/tree/children/" + node_key + ": bad node id");
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
    const int N = problem.tree.num_nodes();
    problem.blocks.resize(N);
    if (!j.contains("blocks")) throw SchemaError("/blocks: required");
    for (const auto& [key, jb] : j.at("blocks").items()) {
        const int n = std::stoi(key);
        if (n < 0 || n >= N) throw SchemaError("/blocks/" + key + ": bad node id");
        NodeBlock& b = problem.blocks[n];
        b.r = jb.value("r", std::vector<double>{});
        b.q = jb.value("q", std::vector<double>{});
        b.A = jb.value("A", std::vector<std::vector<double>>{});
        b.B = jb.value("B", std::vector<std::vector<double>>{});
        b.C_to_children = jb.value("C_to_children", std::vector<std::vector<double>>{});
        b.D_to_children = jb.value("D_to_children", std::vector<std::vector<double>>{});
        b.h = jb.value("h", std::vector<double>{});
        b.theta_terminal = jb.value("theta_terminal", 0.0);
        if (jb.contains("domains"))
            for (const auto& jd : jb.at("domains"))
                b.domains.push_back({bound_from_json(jd.at("lb")), bound_from_json(jd.at("ub")),
                                     jd.value("integer", false)});
    }
    auto issues = validate_problem(problem);
    if (!issues.empty())
        throw SchemaError("load_problem: " + path + ": " + issues.front());
    return problem;
}

std::string bigm_to_json(const BigMTable& table, const std::string& space,
                         const std::string& method) {
    json j;
    j["format"] = "bigm-table/1";
    j["space"] = space;
    j["method"] = method;
    json entries = json::object();
    for (const auto& [key, v] : table.entries())
        entries[std::to_string(key.first) + ":" + std::to_string(key.second)] = v;
    j["entries"] = std::move(entries);
    return j.dump(1) + "\n";
}

void save_bigm(const BigMTable& table, const std::string& space, const std::string& method,
               const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("save_bigm: cannot open " + path);
    os << bigm_to_json(table, space, method);
    if (!os) throw Error("save_bigm: write failed for " + path);
}

LoadedBigM load_bigm(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("load_bigm: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw SchemaError("load_bigm: " + path + ": " + e.what());
    }
    if (j.value("format", "") != "bigm-table/1")
        throw SchemaError("/format: expected \"bigm-table/1\"");
    LoadedBigM out;
    out.space = j.value("space", "mspeu");
    out.method = j.value("method", "");
    if (j.contains("entries"))
        for (const auto& [key, v] : j.at("entries").items()) {
            int n, d;
            if (std::sscanf(key.c_str(), "%d:%d", &n, &d) != 2)
                throw SchemaError("/entries/" + key + ": bad key");
            out.table.set(n, d, v.get<double>());
        }
    return out;
}

} // namespace mspeu
