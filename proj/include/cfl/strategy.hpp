#ifndef CFL_STRATEGY_HPP
#define CFL_STRATEGY_HPP

#include "cfl/world.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace cfl {

struct totality_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One observed valuation: values of the observable variables in declared
// order, one entry per position from the current state through the step.
using ObsValuation = std::vector<std::string>;
using ObsSequence = std::vector<ObsValuation>;

std::string obs_sequence_id(const ObsSequence& seq);

// Deterministic map from bounded observation histories to actions: one action
// per (future step, observation-class) decision point.
struct Strategy {
    std::string owner; // "A" or "B"
    std::map<std::pair<int, std::string>, std::string> decisions; // (step, class id) -> action

    std::string id() const;
};

struct JointStrategy {
    Strategy a_part;
    Strategy b_part;

    std::string id() const;
};

// Named goals with a sparse weight table over goal subsets (default 0).
// Dominant goals (adopted on request) add a bonus per member on top of the
// base table, so subsets containing them outrank every base entry.
struct GoalSet {
    std::vector<std::pair<std::string, Formula>> goals;
    std::map<std::vector<std::string>, int> weights; // key: sorted goal names
    std::vector<std::string> dominant;
    int dominant_bonus = 0;

    int weight_of(const std::set<std::string>& subset) const;
    const Formula* find_goal(const std::string& name) const;
    std::vector<std::string> names() const;
};

// A run extracted from a SAT model: full valuations for positions 0..last and
// the joint action selected at each step.
struct RunWitness {
    std::vector<std::map<std::string, std::string>> states;
    std::vector<std::array<std::string, 3>> joint_actions;

    Run to_run() const; // value atoms per position, for formula::eval
};

// Reachable observation-prefix tree over a group set; decision points are the
// tree's nodes, ordered by (step, class id).
struct ObsNode {
    int step = 0;
    ObsSequence prefix;
    std::string class_id;
};

class StrategyAnalyzer {
public:
    // observables: state variable names visible to the strategy owner.
    StrategyAnalyzer(PossibleWorldSet ws, std::vector<std::string> observables);

    const PossibleWorldSet& worlds() const { return ws_; }
    WorldContext& ctx() { return *ws_.ctx; }
    int steps() const { return ws_.ctx->model().horizon; }
    std::vector<std::size_t> all_groups() const;

    // Nodes of the reachable observation tree for the given groups (cached).
    const std::vector<ObsNode>& tree(const std::vector<std::size_t>& groups);

    // --- spec operations -----------------------------------------------

    // The group's world constraint conjoined with clauses forcing, at each
    // step, the action chosen by the strategy for the realized observation
    // class. Rejects strategies that are partial on the group's tree.
    CnfFormula encode_strategy(const Strategy& d, std::size_t group_index);

    struct WinResult {
        bool winning = true;
        std::optional<RunWitness> witness;        // falsifying run when not winning
        std::optional<std::size_t> witness_group; // group it lives in
    };

    // true iff for every listed group, no run compliant with the strategy
    // falsifies the conjunction of the goals.
    WinResult is_winning(const Strategy& d, const std::vector<std::size_t>& groups,
                         const std::vector<Formula>& goal_conjuncts);
    WinResult is_winning(const JointStrategy& d, const std::vector<std::size_t>& groups,
                         const std::vector<Formula>& goal_conjuncts);

    // Every total deterministic strategy for the slot over the groups' tree,
    // in lexicographic (step, class id, action id) order. Throws
    // capacity_error when more than `bound` strategies exist.
    std::vector<Strategy> enumerate_strategies(Slot slot, const std::vector<std::size_t>& groups,
                                               std::uint64_t bound);
    std::vector<JointStrategy> enumerate_joint_strategies(const std::vector<std::size_t>& groups,
                                                          std::uint64_t bound);
    std::uint64_t count_strategies(Slot slot, const std::vector<std::size_t>& groups);

    struct MaxAchievable {
        std::vector<std::string> subset; // sorted goal names
        int weight = 0;
        std::vector<std::size_t> witnesses; // indices into the strategy pool
    };

    // All weight-maximal goal subsets achievable (winning in every listed
    // group) by some strategy from the pool, with their witnesses. The empty
    // subset is always achievable.
    std::vector<MaxAchievable> max_achievable(const GoalSet& gs,
                                              const std::vector<JointStrategy>& pool,
                                              const std::vector<std::size_t>& groups,
                                              int jobs = 1);

    // Per-strategy set of individually-won goals (the subset lattice follows
    // from universal semantics). Parallelizable; deterministic aggregation.
    std::vector<std::set<std::string>> winning_goal_bits(const GoalSet& gs,
                                                         const std::vector<JointStrategy>& pool,
                                                         const std::vector<std::size_t>& groups,
                                                         int jobs = 1);

    // Assumption literals enforcing a strategy's decisions (selectors are
    // created on demand and shared).
    std::vector<Lit> strategy_assumptions(Slot slot, const Strategy& d);
    Lit goal_lit(const Formula& goal);

    // Totality check against a group tree; throws totality_error.
    void check_total(const Strategy& d, const std::vector<std::size_t>& groups);

private:
    Lit class_lit(const ObsNode& node);
    std::vector<std::string> sorted_actions(Slot slot) const;
    RunWitness decode_model(const std::vector<bool>& model);

    PossibleWorldSet ws_;
    std::vector<std::string> observables_;
    std::map<std::vector<std::size_t>, std::vector<ObsNode>> tree_cache_;
    std::map<std::string, Lit> class_lit_cache_;
    std::map<std::tuple<int, std::string, std::string>, Lit> selector_cache_; // slot,node,act
    std::map<const void*, Lit> goal_lit_cache_;
    std::vector<Formula> pinned_goals_; // keeps cache keys' addresses alive
};

} // namespace cfl

#endif
