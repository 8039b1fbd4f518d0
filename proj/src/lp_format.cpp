#include "mspeu/milp/lp_format.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mspeu/errors.hpp"

namespace mspeu::milp {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool is_binary(const Var& v) { return v.integral && v.lb == 0.0 && v.ub == 1.0; }

void write_term(std::ostream& os, bool first, double coeff, const std::string& name) {
    if (first) {
        os << fmt(coeff) << ' ' << name;
        return;
    }
    if (coeff < 0.0)
        os << " - " << fmt(-coeff) << ' ' << name;
    else
        os << " + " << fmt(coeff) << ' ' << name;
}

} // namespace

void export_lp(const MilpModel& model, std::ostream& os) {
    os << (model.sense() == Sense::Max ? "Maximize" : "Minimize") << '\n';
    os << " obj:";
    if (model.num_vars() == 0) {
        os << " 0";
    } else {
        for (int j = 0; j < model.num_vars(); ++j) {
            os << (j == 0 ? " " : "");
            write_term(os, j == 0, model.obj()[j], model.vars()[j].name);
        }
    }
    os << '\n';

    os << "Subject To\n";
    for (const auto& row : model.rows()) {
        os << ' ' << row.name << ':';
        if (row.coeffs.empty()) {
            // LP rows need at least one term; anchor on the first variable.
            os << " 0 " << model.vars().at(0).name;
        } else {
            bool first = true;
            for (const auto& [j, a] : row.coeffs) {
                os << (first ? " " : "");
                write_term(os, first, a, model.vars()[j].name);
                first = false;
            }
        }
        os << ' ' << to_string(row.rel) << ' ' << fmt(row.rhs) << '\n';
    }

    os << "Bounds\n";
    for (const auto& v : model.vars()) {
        if (is_binary(v)) continue; // declared in the Binaries section
        if (!std::isfinite(v.lb) && !std::isfinite(v.ub)) {
            os << ' ' << v.name << " free\n";
        } else if (v.lb == v.ub) {
            os << ' ' << v.name << " = " << fmt(v.lb) << '\n';
        } else {
            os << ' ' << (std::isfinite(v.lb) ? fmt(v.lb) : "-inf") << " <= " << v.name
               << " <= " << (std::isfinite(v.ub) ? fmt(v.ub) : "+inf") << '\n';
        }
    }

    bool any_general = false, any_binary = false;
    for (const auto& v : model.vars()) {
        if (!v.integral) continue;
        (is_binary(v) ? any_binary : any_general) = true;
    }
    if (any_general) {
        os << "Generals\n";
        for (const auto& v : model.vars())
            if (v.integral && !is_binary(v)) os << ' ' << v.name << '\n';
    }
    if (any_binary) {
        os << "Binaries\n";
        for (const auto& v : model.vars())
            if (is_binary(v)) os << ' ' << v.name << '\n';
    }
    os << "End\n";
}

void export_lp(const MilpModel& model, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("export_lp: cannot open " + path);
    export_lp(model, os);
    if (!os) throw Error("export_lp: write failed for " + path);
}

namespace {

struct Token {
    enum class Kind { Name, Number, Op, End } kind = Kind::End;
    std::string text;
    double value = 0.0;
};

class Lexer {
public:
    explicit Lexer(std::istream& is) { slurp(is); }

    const Token& peek() const { return tokens_[pos_ < tokens_.size() ? pos_ : tokens_.size() - 1]; }
    Token next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == Token::Kind::End; }

private:
    void slurp(std::istream& is) {
        std::string line;
        std::string text;
        while (std::getline(is, line)) {
            auto cut = line.find('\\');
            if (cut != std::string::npos) line.resize(cut);
            text += line;
            text += '\n';
        }
        std::size_t i = 0;
        auto name_char = [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
                   c == '(' || c == ')' || c == '[' || c == ']' || c == '#';
        };
        while (i < text.size()) {
            char c = text[i];
            if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
            Token t;
            if (c == '+' || c == '-' || c == ':') {
                t.kind = Token::Kind::Op;
                t.text = std::string(1, c);
                ++i;
            } else if (c == '<' || c == '>' || c == '=') {
                t.kind = Token::Kind::Op;
                t.text = std::string(1, c);
                ++i;
                if (i < text.size() && text[i] == '=') { t.text += '='; ++i; }
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t j = i;
                while (j < text.size() &&
                       (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.' ||
                        text[j] == 'e' || text[j] == 'E' ||
                        ((text[j] == '+' || text[j] == '-') && j > i &&
                         (text[j - 1] == 'e' || text[j - 1] == 'E'))))
                    ++j;
                t.kind = Token::Kind::Number;
                t.text = text.substr(i, j - i);
                t.value = std::stod(t.text);
                i = j;
            } else if (name_char(c)) {
                std::size_t j = i;
                while (j < text.size() && name_char(text[j])) ++j;
                t.kind = Token::Kind::Name;
                t.text = text.substr(i, j - i);
                i = j;
            } else {
                throw Error(std::string("import_lp: unexpected character '") + c + "'");
            }
            tokens_.push_back(std::move(t));
        }
        tokens_.push_back({});
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_section_word(const std::string& w) {
    static const char* words[] = {"maximize", "max", "minimize", "min", "subject",
                                  "st", "s.t.", "bounds", "bound", "generals",
                                  "general", "gen", "binaries", "binary", "bin", "end"};
    for (const char* k : words)
        if (w == k) return true;
    return false;
}

bool is_inf_word(const std::string& w) {
    return w == "inf" || w == "infinity" || w == "+inf" || w == "-inf";
}

} // namespace

MilpModel import_lp(std::istream& is) {
    Lexer lex(is);
    MilpModel model;
    std::vector<std::pair<std::string, double>> obj_terms;
    struct RawRow {
        std::string name;
        std::vector<std::pair<std::string, double>> terms;
        Rel rel;
        double rhs;
    };
    std::vector<RawRow> raw_rows;
    struct BoundSpec {
        double lb = 0.0, ub = kInf;
        bool has_lb = false, has_ub = false, free = false;
    };
    std::vector<std::pair<std::string, BoundSpec>> bound_specs;
    std::vector<std::string> generals, binaries;
    Sense sense = Sense::Max;

    auto expect_name = [&](const char* where) {
        Token t = lex.next();
        if (t.kind != Token::Kind::Name)
            throw Error(std::string("import_lp: expected a name in ") + where);
        return t.text;
    };

    // Reads a +/- c*name term list until a relation op or section keyword.
    auto read_terms = [&](std::vector<std::pair<std::string, double>>& out) {
        for (;;) {
            const Token& t = lex.peek();
            if (t.kind == Token::Kind::End) return;
            if (t.kind == Token::Kind::Op && (t.text == "<=" || t.text == ">=" || t.text == "=" ||
                                              t.text == "<" || t.text == ">"))
                return;
            double sign = 1.0;
            while (lex.peek().kind == Token::Kind::Op &&
                   (lex.peek().text == "+" || lex.peek().text == "-")) {
                if (lex.next().text == "-") sign = -sign;
            }
            const Token& head = lex.peek();
            if (head.kind == Token::Kind::Number) {
                double coeff = lex.next().value * sign;
                if (lex.peek().kind == Token::Kind::Name &&
                    !is_section_word(lower(lex.peek().text))) {
                    out.push_back({lex.next().text, coeff});
                } else {
                    out.push_back({"", coeff}); // bare constant
                }
            } else if (head.kind == Token::Kind::Name) {
                if (is_section_word(lower(head.text))) return;
                out.push_back({lex.next().text, sign});
            } else {
                return;
            }
        }
    };

    enum class Section { None, Objective, Rows, Bounds, Generals, Binaries };
    Section section = Section::None;
    int anon_row = 0;

    while (!lex.at_end()) {
        const Token& t = lex.peek();
        if (t.kind == Token::Kind::Name) {
            std::string w = lower(t.text);
            if (w == "maximize" || w == "max") { lex.next(); sense = Sense::Max; section = Section::Objective; continue; }
            if (w == "minimize" || w == "min") { lex.next(); sense = Sense::Min; section = Section::Objective; continue; }
            if (w == "subject" || w == "st" || w == "s.t.") {
                lex.next();
                if (w == "subject" && lex.peek().kind == Token::Kind::Name &&
                    lower(lex.peek().text) == "to")
                    lex.next();
                section = Section::Rows;
                continue;
            }
            if (w == "bounds" || w == "bound") { lex.next(); section = Section::Bounds; continue; }
            if (w == "generals" || w == "general" || w == "gen") { lex.next(); section = Section::Generals; continue; }
            if (w == "binaries" || w == "binary" || w == "bin") { lex.next(); section = Section::Binaries; continue; }
            if (w == "end") { lex.next(); break; }
        }

        switch (section) {
            case Section::Objective: {
                // Optional "obj:" label.
                if (lex.peek().kind == Token::Kind::Name) {
                    Token save = lex.next();
                    if (lex.peek().kind == Token::Kind::Op && lex.peek().text == ":") {
                        lex.next();
                    } else {
                        // Not a label: first term begins with this name.
                        obj_terms.push_back({save.text, 1.0});
                    }
                }
                read_terms(obj_terms);
                break;
            }
            case Section::Rows: {
                RawRow row;
                if (lex.peek().kind == Token::Kind::Name) {
                    Token save = lex.next();
                    if (lex.peek().kind == Token::Kind::Op && lex.peek().text == ":") {
                        lex.next();
                        row.name = save.text;
                    } else {
                        row.terms.push_back({save.text, 1.0});
                    }
                }
                if (row.name.empty()) row.name = "r" + std::to_string(anon_row);
                ++anon_row;
                read_terms(row.terms);
                Token rel = lex.next();
                if (rel.kind != Token::Kind::Op)
                    throw Error("import_lp: expected a relation in row " + row.name);
                if (rel.text == "<=" || rel.text == "<") row.rel = Rel::Le;
                else if (rel.text == ">=" || rel.text == ">") row.rel = Rel::Ge;
                else if (rel.text == "=") row.rel = Rel::Eq;
                else throw Error("import_lp: bad relation '" + rel.text + "'");
                double sign = 1.0;
                while (lex.peek().kind == Token::Kind::Op &&
                       (lex.peek().text == "+" || lex.peek().text == "-"))
                    if (lex.next().text == "-") sign = -sign;
                Token rhs = lex.next();
                if (rhs.kind != Token::Kind::Number)
                    throw Error("import_lp: expected rhs number in row " + row.name);
                row.rhs = sign * rhs.value;
                raw_rows.push_back(std::move(row));
                break;
            }
            case Section::Bounds: {
                // Forms: "lo <= x <= up", "x <= up", "x >= lo", "x = v", "x free".
                double first_num = 0.0;
                bool have_first_num = false, first_neg_inf = false;
                double sign = 1.0;
                while (lex.peek().kind == Token::Kind::Op &&
                       (lex.peek().text == "+" || lex.peek().text == "-"))
                    if (lex.next().text == "-") sign = -sign;
                if (lex.peek().kind == Token::Kind::Number) {
                    first_num = sign * lex.next().value;
                    have_first_num = true;
                } else if (lex.peek().kind == Token::Kind::Name && is_inf_word(lower(lex.peek().text))) {
                    std::string w = lower(lex.next().text);
                    first_neg_inf = (sign < 0) || w == "-inf";
                    have_first_num = true;
                    first_num = first_neg_inf ? -kInf : kInf;
                }
                if (have_first_num) {
                    Token op = lex.next();
                    if (op.kind != Token::Kind::Op || (op.text != "<=" && op.text != "<"))
                        throw Error("import_lp: malformed bound line");
                    std::string name = expect_name("bounds");
                    BoundSpec spec;
                    spec.lb = first_num;
                    spec.has_lb = true;
                    if (lex.peek().kind == Token::Kind::Op &&
                        (lex.peek().text == "<=" || lex.peek().text == "<")) {
                        lex.next();
                        double s2 = 1.0;
                        while (lex.peek().kind == Token::Kind::Op &&
                               (lex.peek().text == "+" || lex.peek().text == "-"))
                            if (lex.next().text == "-") s2 = -s2;
                        if (lex.peek().kind == Token::Kind::Number) {
                            spec.ub = s2 * lex.next().value;
                        } else if (is_inf_word(lower(lex.peek().text))) {
                            std::string w = lower(lex.next().text);
                            spec.ub = (s2 < 0 || w == "-inf") ? -kInf : kInf;
                        } else {
                            throw Error("import_lp: malformed bound line");
                        }
                        spec.has_ub = true;
                    }
                    bound_specs.push_back({name, spec});
                    break;
                }
                std::string name = expect_name("bounds");
                if (lex.peek().kind == Token::Kind::Name && lower(lex.peek().text) == "free") {
                    lex.next();
                    BoundSpec spec;
                    spec.free = true;
                    bound_specs.push_back({name, spec});
                    break;
                }
                Token op = lex.next();
                if (op.kind != Token::Kind::Op)
                    throw Error("import_lp: malformed bound line for " + name);
                double s2 = 1.0;
                while (lex.peek().kind == Token::Kind::Op &&
                       (lex.peek().text == "+" || lex.peek().text == "-"))
                    if (lex.next().text == "-") s2 = -s2;
                double val;
                if (lex.peek().kind == Token::Kind::Number) {
                    val = s2 * lex.next().value;
                } else if (lex.peek().kind == Token::Kind::Name && is_inf_word(lower(lex.peek().text))) {
                    std::string w = lower(lex.next().text);
                    val = (s2 < 0 || w == "-inf") ? -kInf : kInf;
                } else {
                    throw Error("import_lp: malformed bound line for " + name);
                }
                BoundSpec spec;
                if (op.text == "<=" || op.text == "<") { spec.ub = val; spec.has_ub = true; }
                else if (op.text == ">=" || op.text == ">") { spec.lb = val; spec.has_lb = true; }
                else if (op.text == "=") { spec.lb = spec.ub = val; spec.has_lb = spec.has_ub = true; }
                else throw Error("import_lp: malformed bound line for " + name);
                bound_specs.push_back({name, spec});
                break;
            }
            case Section::Generals:
                generals.push_back(expect_name("generals"));
                break;
            case Section::Binaries:
                binaries.push_back(expect_name("binaries"));
                break;
            default:
                throw Error("import_lp: content before the objective section");
        }
    }

    // Variables are created in first-appearance order (objective, then rows).
    auto ensure_var = [&](const std::string& name) {
        int idx = model.find_var(name);
        if (idx >= 0) return idx;
        return model.add_var(name, 0.0, kInf, false);
    };
    model.set_sense(sense);
    for (const auto& [name, coeff] : obj_terms) {
        if (name.empty()) continue; // constant terms are dropped
        int j = ensure_var(name);
        model.set_obj(j, model.obj()[j] + coeff);
    }
    // Bounds/integrality are applied by rebuilding the variable table below,
    // so first make every referenced variable exist.
    for (const auto& row : raw_rows)
        for (const auto& [name, coeff] : row.terms)
            if (!name.empty()) ensure_var(name);
    for (const auto& [name, spec] : bound_specs) ensure_var(name);
    for (const auto& name : generals) ensure_var(name);
    for (const auto& name : binaries) ensure_var(name);

    MilpModel out;
    out.set_sense(sense);
    std::vector<BoundSpec> specs(model.num_vars());
    std::vector<char> is_int(model.num_vars(), 0), is_bin(model.num_vars(), 0), spec_seen(model.num_vars(), 0);
    for (const auto& [name, spec] : bound_specs) {
        int j = model.find_var(name);
        specs[j] = spec;
        spec_seen[j] = 1;
    }
    for (const auto& name : generals) is_int[model.find_var(name)] = 1;
    for (const auto& name : binaries) { int j = model.find_var(name); is_int[j] = 1; is_bin[j] = 1; }
    for (int j = 0; j < model.num_vars(); ++j) {
        double lb = 0.0, ub = kInf;
        if (is_bin[j]) { lb = 0.0; ub = 1.0; }
        if (spec_seen[j]) {
            const BoundSpec& s = specs[j];
            if (s.free) { lb = -kInf; ub = kInf; }
            if (s.has_lb) lb = s.lb;
            if (s.has_ub) ub = s.ub;
        }
        out.add_var(model.vars()[j].name, lb, ub, is_int[j] != 0);
        out.set_obj(j, model.obj()[j]);
    }
    for (const auto& row : raw_rows) {
        std::vector<std::pair<int, double>> coeffs;
        double shift = 0.0;
        for (const auto& [name, coeff] : row.terms) {
            if (name.empty()) shift += coeff;
            else coeffs.push_back({out.find_var(name), coeff});
        }
        out.add_row(row.name, std::move(coeffs), row.rel, row.rhs - shift);
    }
    return out;
}

MilpModel import_lp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("import_lp: cannot open " + path);
    return import_lp(is);
}

MilpSolution parse_solution_file(const MilpModel& model, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("parse_solution_file: cannot open " + path);
    MilpSolution sol;
    std::string line;
    bool first = true;
    sol.values.assign(model.num_vars(), 0.0);
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        if (first) {
            first = false;
            if (head == "objective") {
                double v;
                if (!(ls >> v)) throw Error("parse_solution_file: malformed objective line");
                sol.objective = v;
                sol.best_bound = v;
                sol.status = Status::Optimal;
                continue;
            }
            if (head == "status") {
                std::string st;
                ls >> st;
                if (st == "infeasible") sol.status = Status::Infeasible;
                else if (st == "unbounded") sol.status = Status::Unbounded;
                else if (st == "limit") sol.status = Status::Limit;
                else throw Error("parse_solution_file: unknown status " + st);
                sol.values.clear();
                return sol;
            }
            throw Error("parse_solution_file: first line must carry the objective or a status");
        }
        double v;
        if (!(ls >> v)) throw Error("parse_solution_file: malformed value line: " + line);
        int j = model.find_var(head);
        if (j < 0) throw Error("parse_solution_file: unknown variable " + head);
        sol.values[j] = v;
    }
    if (first) throw Error("parse_solution_file: empty file " + path);
    return sol;
}

void write_solution_file(const MilpModel& model, const MilpSolution& sol,
                         const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("write_solution_file: cannot open " + path);
    if (sol.status == Status::Optimal || (sol.status == Status::Limit && !sol.values.empty())) {
        os << "objective " << fmt(sol.objective) << '\n';
        for (int j = 0; j < model.num_vars(); ++j)
            os << model.vars()[j].name << ' ' << fmt(j < (int)sol.values.size() ? sol.values[j] : 0.0)
               << '\n';
    } else {
        os << "status " << to_string(sol.status) << '\n';
    }
}

} // namespace mspeu::milp
