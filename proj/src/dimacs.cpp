#include "cfl/cnf.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace cfl {

bool satisfies(const CnfFormula& f, const std::vector<bool>& model) {
    for (const auto& c : f.clauses) {
        bool sat = false;
        for (Lit l : c) {
            int v = var_of(l);
            if (v < (int)model.size() && model[v] == !sign_of(l)) {
                sat = true;
                break;
            }
        }
        if (!sat) return false;
    }
    return true;
}

CnfFormula read_dimacs(std::istream& in) {
    CnfFormula f;
    int declared_vars = -1;
    long declared_clauses = -1;
    std::string line;
    std::vector<Lit> cur;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'c') continue;
        std::istringstream ls(line);
        if (line[0] == 'p') {
            std::string p, fmt;
            ls >> p >> fmt >> declared_vars >> declared_clauses;
            if (fmt != "cnf" || declared_vars < 0 || declared_clauses < 0)
                throw input_error("dimacs: malformed problem line: " + line);
            f.num_vars = declared_vars;
            continue;
        }
        Lit l;
        while (ls >> l) {
            if (l == 0) {
                f.add_clause(cur);
                cur.clear();
            } else {
                if (declared_vars >= 0 && var_of(l) > declared_vars)
                    throw input_error("dimacs: literal exceeds declared variable count");
                cur.push_back(l);
            }
        }
    }
    if (!cur.empty()) throw input_error("dimacs: unterminated clause");
    if (declared_vars < 0) throw input_error("dimacs: missing problem line");
    if (declared_clauses >= 0 && (long)f.clauses.size() != declared_clauses)
        throw input_error("dimacs: clause count mismatch");
    return f;
}

CnfFormula read_dimacs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("dimacs: cannot open " + path);
    return read_dimacs(in);
}

void write_dimacs(const CnfFormula& f, std::ostream& out) {
    out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
    for (const auto& c : f.clauses) {
        for (Lit l : c) out << l << ' ';
        out << "0\n";
    }
}

} // namespace cfl
