#ifndef CFL_ENCODER_HPP
#define CFL_ENCODER_HPP

#include "cfl/cnf.hpp"
#include "cfl/formula.hpp"

#include <map>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

namespace cfl {

struct horizon_overflow_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Variable registry over one growing CNF. Scenario atoms get named,
// time-indexed variables; Tseitin gates live in a separate anonymous
// namespace so assumption cores never mention auxiliaries.
class VarPool {
public:
    int named_var(const std::string& atom, int pos) {
        auto key = std::make_pair(atom, pos);
        auto it = named_.find(key);
        if (it != named_.end()) return it->second;
        int v = cnf_.new_var();
        named_.emplace(key, v);
        return v;
    }
    bool has_named(const std::string& atom, int pos) const {
        return named_.count(std::make_pair(atom, pos)) > 0;
    }
    int aux_var() { return cnf_.new_var(); }

    Lit true_lit() {
        if (true_var_ == 0) {
            true_var_ = cnf_.new_var();
            cnf_.add_clause({true_var_});
        }
        return true_var_;
    }
    Lit false_lit() { return -true_lit(); }

    void add_clause(std::vector<Lit> c) { cnf_.add_clause(std::move(c)); }
    CnfFormula& cnf() { return cnf_; }
    const CnfFormula& cnf() const { return cnf_; }
    const std::map<std::pair<std::string, int>, int>& named() const { return named_; }

private:
    CnfFormula cnf_;
    std::map<std::pair<std::string, int>, int> named_;
    int true_var_ = 0;
};

// Compiles formulas into literals over a VarPool using the stutter-closed
// evaluation recurrences: plain atoms at position t read the named variable at
// min(t, last_pos); values beyond each node's stabilization point are reused.
// Gates are full biconditional Tseitin, so auxiliary variables stay
// functionally determined by the named ones (projected model counts are
// preserved).
class CircuitCompiler {
public:
    CircuitCompiler(VarPool& pool, int last_pos) : pool_(pool), last_pos_(last_pos) {}

    // Literal equivalent to f evaluated at position t over runs that stutter
    // after last_pos. Rejects Believes.
    Lit compile(const Formula& f, int t);

    Lit mk_and(const std::vector<Lit>& xs);
    Lit mk_or(const std::vector<Lit>& xs);
    Lit and2(Lit a, Lit b);
    Lit or2(Lit a, Lit b);

    VarPool& pool() { return pool_; }
    int last_pos() const { return last_pos_; }

private:
    int clamp_pos(const Formula& f, int t);
    void pin(const Formula& f);

    VarPool& pool_;
    int last_pos_;
    // Memo keys are node addresses, so every seen formula is pinned for the
    // compiler's lifetime; otherwise a freed node's address could be reused
    // by an unrelated formula and alias a cache entry.
    std::vector<Formula> pinned_;
    std::set<const void*> pinned_ids_;
    std::map<std::pair<const void*, int>, Lit> memo_;
    std::map<std::pair<const void*, int>, int> extent_memo_;
    std::map<std::tuple<char, Lit, Lit>, Lit> gate_memo_;
};

// Standalone bounded encoding of a Believes-free formula at position 0 over
// runs of length horizon+1 with stuttering. The CNF asserts the formula; it is
// equisatisfiable with "some such run satisfies f at 0" and its models project
// one-to-one onto the satisfying runs over the formula's atoms.
struct EncodeResult {
    CnfFormula cnf;
    std::map<std::pair<std::string, int>, int> atom_vars; // (atom, 0..horizon) -> variable
    Lit output = 0;
};

EncodeResult encode(const Formula& f, int horizon);

} // namespace cfl

#endif
