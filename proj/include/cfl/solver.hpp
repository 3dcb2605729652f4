#ifndef CFL_SOLVER_HPP
#define CFL_SOLVER_HPP

#include "cfl/cnf.hpp"

#include <cstdint>
#include <vector>

namespace cfl {

struct SolveResult {
    enum class Status { Sat, Unsat };
    Status status = Status::Unsat;
    // Valid when Sat: model[v] for 1 <= v <= num_vars, index 0 unused.
    std::vector<bool> model;
    // Valid when Unsat under assumptions: subset of the assumption literals
    // sufficient for unsatisfiability (empty when the formula alone is UNSAT).
    std::vector<Lit> core;

    bool sat() const { return status == Status::Sat; }
};

// Conflict-driven clause-learning SAT solver with assumption support.
//
// Two-watched-literal propagation, first-UIP learning with basic clause
// minimization, EVSIDS branching, phase saving, Luby restarts and
// activity-based learnt-clause reduction. Assumptions are placed as forced
// decisions before branching; failed assumptions yield a final-conflict core.
// Fully deterministic for a fixed input and seed.
class Solver {
public:
    Solver();
    explicit Solver(const CnfFormula& f);

    Solver(const Solver&) = delete;
    Solver& operator=(const Solver&) = delete;

    void set_seed(std::uint64_t seed) { seed_ = seed ? seed : 1; }

    // External variables are 1-based DIMACS indices.
    int new_var();
    void ensure_vars(int n);
    int num_vars() const { return n_vars_; }

    // Returns false if the clause set became trivially unsatisfiable.
    bool add_clause(const std::vector<Lit>& lits);
    bool add_clause(std::initializer_list<Lit> lits) { return add_clause(std::vector<Lit>(lits)); }
    void load(const CnfFormula& f);

    SolveResult solve(const std::vector<Lit>& assumptions = {});

    std::uint64_t num_conflicts() const { return conflicts_; }
    std::uint64_t num_decisions() const { return decisions_; }
    std::uint64_t num_propagations() const { return propagations_; }

private:
    // Internal literal encoding: 2*v for +v, 2*v+1 for -v, with v 0-based.
    using ILit = int;
    static constexpr int CRefUndef = -1;

    struct Clause {
        std::vector<ILit> lits;
        double act = 0.0;
        bool learnt = false;
    };
    struct Watcher {
        int cref;
        ILit blocker;
    };

    static ILit neg(ILit l) { return l ^ 1; }
    static int ivar(ILit l) { return l >> 1; }
    ILit to_internal(Lit l) const { return (var_of(l) - 1) * 2 + (sign_of(l) ? 1 : 0); }
    Lit to_external(ILit l) const { return sign_of_internal(l) ? -(ivar(l) + 1) : (ivar(l) + 1); }
    static bool sign_of_internal(ILit l) { return l & 1; }

    enum : std::int8_t { v_true = 0, v_false = 1, v_undef = 2 };
    std::int8_t value(ILit l) const {
        std::int8_t a = assigns_[ivar(l)];
        return a == v_undef ? std::int8_t(v_undef) : std::int8_t(a ^ (l & 1));
    }

    int decision_level() const { return (int)trail_lim_.size(); }
    void new_decision_level() { trail_lim_.push_back((int)trail_.size()); }

    void unchecked_enqueue(ILit p, int reason_cref);
    int propagate(); // returns conflicting cref or CRefUndef
    void cancel_until(int level);
    void analyze(int confl, std::vector<ILit>& out_learnt, int& out_btlevel);
    bool lit_redundant(ILit p) const;
    void analyze_final(ILit p, std::vector<ILit>& out_core);
    ILit pick_branch_lit();
    int search(std::int64_t conflict_budget, const std::vector<ILit>& assumptions,
               std::vector<ILit>& out_core); // 0 sat, 1 unsat, 2 restart
    void attach_clause(int cref);
    void reduce_db();
    void rebuild_watches();
    void var_bump(int v);
    void var_decay();
    void cla_bump(Clause& c);
    void cla_decay();

    // order heap (max-activity)
    void heap_insert(int v);
    void heap_update(int v);
    int heap_pop();
    bool heap_empty() const { return heap_.empty(); }
    void heap_percolate_up(int i);
    void heap_percolate_down(int i);

    int n_vars_ = 0;
    bool ok_ = true;
    std::vector<Clause> clauses_;
    std::vector<int> learnt_refs_;
    std::vector<std::vector<Watcher>> watches_; // indexed by internal lit
    std::vector<std::int8_t> assigns_;          // indexed by var
    std::vector<std::int8_t> polarity_;         // saved phase
    std::vector<int> reason_;
    std::vector<int> level_;
    std::vector<double> activity_;
    std::vector<ILit> trail_;
    std::vector<int> trail_lim_;
    int qhead_ = 0;

    std::vector<int> heap_;     // heap of vars
    std::vector<int> heap_pos_; // var -> position in heap_ or -1

    std::vector<char> seen_;
    double var_inc_ = 1.0;
    double cla_inc_ = 1.0;
    std::uint64_t seed_ = 1;

    std::uint64_t conflicts_ = 0;
    std::uint64_t decisions_ = 0;
    std::uint64_t propagations_ = 0;
    std::uint64_t max_learnts_ = 4000;
};

} // namespace cfl

#endif
