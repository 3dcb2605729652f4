#ifndef CFL_WORLD_HPP
#define CFL_WORLD_HPP

#include "cfl/encoder.hpp"
#include "cfl/jgraph.hpp"
#include "cfl/solver.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cfl {

struct model_integrity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct evidence_incompatible_error : std::runtime_error {
    evidence_incompatible_error(const std::string& msg, std::vector<std::string> core_atoms)
        : std::runtime_error(msg), core(std::move(core_atoms)) {}
    std::vector<std::string> core;
};

enum class Slot { A, B, Env };
inline const char* slot_name(Slot s) {
    switch (s) {
        case Slot::A: return "act_A";
        case Slot::B: return "act_B";
        default: return "act_env";
    }
}

// Action choice per slot; "*" matches any action.
struct JointActionPattern {
    std::string a = "*";
    std::string b = "*";
    std::string env = "*";
};

struct TransitionRule {
    Formula guard; // state predicate at the step's position; top() if absent
    JointActionPattern actions;

    // var' := value, or var' := src shifted by delta (saturating at the
    // domain ends).
    struct Effect {
        std::string var;
        std::optional<std::string> value;
        std::optional<std::string> src;
        int delta = 0;
    };
    std::vector<Effect> effects;

    // The conjunction of the assignments as a formula over next-step atoms.
    Formula effect_formula(const std::vector<StateVar>& vars) const;
};

struct AgentActions {
    std::vector<std::string> a, b, env;

    const std::vector<std::string>& of(Slot s) const {
        switch (s) {
            case Slot::A: return a;
            case Slot::B: return b;
            default: return env;
        }
    }
};

// Finite possible-world model: one-hot state variables, joint-action-labelled
// deterministic transitions, an observed history (position 0 is the initial
// state, the last entry is the current state) and a bounded future horizon.
struct WorldModel {
    std::vector<StateVar> vars;
    AgentActions actions;
    std::vector<TransitionRule> rules;
    // Partial valuations forced as unit constraints, one per past position.
    std::vector<std::vector<std::pair<std::string, std::string>>> observations = {{}};
    int horizon = 1;

    int now_pos() const { return (int)observations.size() - 1; }
    int last_pos() const { return now_pos() + horizon; }
    const StateVar* find_var(const std::string& name) const;
    Vocabulary vocabulary() const;
};

struct UnrollResult {
    CnfFormula cnf;
    std::map<std::pair<std::string, int>, int> vars;
};

// Bounded unrolling: models of the CNF are exactly the runs of m that extend
// its observed history by `horizon` steps, with one-hot domains and exactly
// one joint action per step. Verifies that every reachable (state, action)
// pair has a successor.
UnrollResult unroll(const WorldModel& m, int horizon);

// Shared encoding over which evidence, strategies and goals are layered.
class WorldContext {
public:
    explicit WorldContext(const WorldModel& m);

    const WorldModel& model() const { return model_; }
    int now() const { return model_.now_pos(); }
    int last() const { return model_.last_pos(); }

    VarPool& pool() { return pool_; }
    CircuitCompiler& compiler() { return cc_; }

    Lit state_lit(const std::string& var, const std::string& value, int pos);
    Lit action_lit(Slot slot, const std::string& action, int step_pos);

    // Compiles f at the current state's position and returns a selector
    // literal whose assumption enforces f.
    Lit selector_for(const Formula& f);
    // Compiles f at the current state's position and asserts it permanently.
    void assert_now(const Formula& f);

    // Solver over the accumulated clauses; call after any additions.
    Solver& solver();

    // State-variable SAT variables for positions [from, to].
    std::vector<int> state_projection(int from, int to) const;

    // Enumerate assignments over a projection under assumptions (isolated
    // solver; the shared one is untouched).
    std::vector<std::map<int, bool>> enumerate(const std::vector<int>& projection,
                                               const std::vector<Lit>& assumptions,
                                               std::size_t limit) const;

private:
    WorldModel model_;
    VarPool pool_;
    CircuitCompiler cc_;
    Solver solver_;
    std::size_t clauses_loaded_ = 0;
};

struct PossibleWorldSet {
    struct Group {
        ConsistentGroup evidence;
        std::vector<Lit> assumptions; // evidence selectors enforcing the group
    };

    std::shared_ptr<WorldContext> ctx;
    std::vector<Group> groups;

    // Materialized per-group constraint: the shared unrolling plus the
    // group's selector units. Satisfiable by construction.
    CnfFormula world_constraint(std::size_t group_index) const;
};

// One group per maximal consistent evidence set; each group's constraint is
// the unrolling conjoined with the group's bodies (encoded at the current
// state) and is satisfiable. Evidence bodies use the model's vocabulary.
PossibleWorldSet build_possible_worlds(const EvidenceBase& base, const WorldModel& m);

// A history is the valuation sequence from the initial to the current state.
using History = std::vector<std::map<std::string, std::string>>;

// Union over groups of the history prefixes consistent with each group.
std::vector<History> histories(const PossibleWorldSet& ws);

} // namespace cfl

#endif
