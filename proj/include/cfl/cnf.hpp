#ifndef CFL_CNF_HPP
#define CFL_CNF_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfl {

// Literals are nonzero signed ints in DIMACS convention: +v / -v, 1 <= v <= num_vars.
using Lit = int;

inline int var_of(Lit l) { return l > 0 ? l : -l; }
inline bool sign_of(Lit l) { return l < 0; }

struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CnfFormula {
    int num_vars = 0;
    std::vector<std::vector<Lit>> clauses;

    int new_var() { return ++num_vars; }

    void add_clause(std::vector<Lit> lits) {
        for (Lit l : lits) {
            if (l == 0) throw input_error("cnf: literal 0 in clause");
            if (var_of(l) > num_vars) num_vars = var_of(l);
        }
        clauses.push_back(std::move(lits));
    }
    void add_clause(std::initializer_list<Lit> lits) { add_clause(std::vector<Lit>(lits)); }

    std::size_t num_clauses() const { return clauses.size(); }
};

// True iff the (total or partial) assignment satisfies every clause.
// `model[v]` holds the value of variable v; index 0 unused.
bool satisfies(const CnfFormula& f, const std::vector<bool>& model);

// DIMACS reader/writer. Header "p cnf <vars> <clauses>", zero-terminated clauses,
// 'c' comment lines.
CnfFormula read_dimacs(std::istream& in);
CnfFormula read_dimacs_file(const std::string& path);
void write_dimacs(const CnfFormula& f, std::ostream& out);

} // namespace cfl

#endif
