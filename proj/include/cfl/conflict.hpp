#ifndef CFL_CONFLICT_HPP
#define CFL_CONFLICT_HPP

#include "cfl/strategy.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>

namespace cfl {

struct configuration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ResolutionLevel { C1 = 1, C2 = 2, C3 = 3, C4 = 4 };
std::string level_name(ResolutionLevel l);

// What B is prepared to share when asked, per resolution level.
struct CooperationData {
    std::vector<std::pair<std::string, Formula>> b_knows;   // C1: ground observations
    std::vector<std::pair<std::string, Formula>> b_commits; // C2: strategy commitments
    std::vector<std::string> b_adopts;                      // C3: names of A-goals B adopts
    std::optional<std::map<std::vector<std::string>, int>> joint_weights; // C4
};

// A's information at one analysis instant. Grows monotonically during a
// resolution: items are replaced only by strictly more trusted content, and
// facts, adoptions and the negotiation flag are only ever added.
struct InformationBase {
    EvidenceBase evidence;
    std::vector<std::pair<std::string, Formula>> shared_strategy_facts;
    std::vector<std::string> adopted_goals;
    std::vector<std::string> level_log;
    bool negotiated = false;

    std::set<std::string> applied; // consumed cooperation entries, by name

    std::size_t size() const {
        return evidence.items.size() + shared_strategy_facts.size() + adopted_goals.size() +
               (negotiated ? 1 : 0);
    }
};

struct ConflictCause {
    std::vector<std::string> justification; // belief atoms, fact names, "model"
    std::string a_strategy;
    std::string b_strategy;
    std::vector<std::string> goals_a;
    std::vector<std::string> goals_b;
    std::string group;
    int round = 0; // analysis round the cause was recorded in
};

struct LevelDelta {
    ResolutionLevel level;
    std::vector<std::string> added;
    std::vector<std::string> removed;
    std::size_t base_size_after = 0;
    std::size_t group_count_after = 0;
};

struct ConflictReport {
    enum class Verdict { NoConflict, Resolved, Unresolved };
    Verdict verdict = Verdict::NoConflict;
    std::optional<ResolutionLevel> level;
    std::vector<std::string> strategies; // surviving strategy ids
    std::vector<ConflictCause> causes;
    std::vector<LevelDelta> trace;
    std::optional<std::vector<std::string>> negotiated_goals;

    // per analysis round, for the monotonicity audit
    std::vector<std::size_t> base_sizes;
    std::vector<std::size_t> group_counts;

    nlohmann::ordered_json to_json() const;
};

struct Explanation {
    struct Entry {
        ConflictCause cause;
        std::vector<std::string> contradicts; // evidence contradicted by cause atoms
        std::optional<ResolutionLevel> discharged_at;
    };
    ConflictReport::Verdict verdict;
    std::vector<Entry> entries;

    nlohmann::ordered_json to_json() const;
    std::string to_text() const; // indented justification tree
};

struct AnalysisConfig {
    int max_level = 4; // cap on disclosure depth (1..4)
    std::uint64_t strategy_bound = 500000;
    int jobs = 1;
    std::uint64_t seed = 0;
};

// One conflict analysis at a fixed instant: Def.-1 detection plus the
// level-by-level resolution loop.
class ConflictAnalyzer {
public:
    ConflictAnalyzer(WorldModel m, InformationBase base, GoalSet goals_a, GoalSet believed_goals_b,
                     CooperationData coop, std::vector<std::string> observables,
                     AnalysisConfig cfg = {});

    struct Detection {
        bool conflict = false;
        std::vector<ConflictCause> causes;
        std::vector<std::string> survivors; // A-strategy ids that endured every test
    };

    // Def. 1: true iff every cooperative winner of a maximal A-goal set is
    // blocked, in some group, by a believed-maximal-winning B-strategy.
    Detection detect_conflict();

    // Alg. 1: detection plus resolution levels C1..max_level.
    ConflictReport find_strategy();

    // Alg. 2 for one candidate: empty result iff the strategy composes with
    // every believed-maximal-winning B-strategy in every group.
    std::vector<std::string> test_strategy(const Strategy& d_a,
                                           const std::vector<std::string>& goals_a_subset);

    // Alg. 3: apply one resolution level; returns true when anything changed.
    bool fix(const std::vector<ConflictCause>& causes, ResolutionLevel level, LevelDelta& delta);

    Explanation explain(const ConflictReport& report) const;

    const InformationBase& base() const { return base_; }
    const GoalSet& goals_a() const { return goals_a_; }
    const GoalSet& believed_goals_b() const { return believed_b_; }

private:
    struct Round {
        std::shared_ptr<StrategyAnalyzer> analyzer;
        std::vector<std::size_t> groups;
        std::vector<Lit> fact_selectors;
        std::map<Lit, std::string> fact_names;
    };

    Round build_round();
    Detection run_detection(Round& round, std::vector<ConflictCause>& causes, int round_idx,
                            std::vector<std::string>* survivor_ids);
    std::vector<std::string> get_just(Round& round, const Strategy& d_a, const Strategy& d_b,
                                      std::size_t group_index,
                                      const std::vector<Formula>& joint_goals,
                                      const RunWitness& witness);
    GoalSet effective_goals_b() const;
    GoalSet joint_goal_set() const;
    std::vector<Formula> goal_formulas(const GoalSet& gs, const std::vector<std::string>& names) const;

    WorldModel model_;
    InformationBase base_;
    EvidenceBase initial_evidence_; // for explaining contradictions after replacements
    GoalSet goals_a_;
    GoalSet believed_b_;
    CooperationData coop_;
    std::vector<std::string> observables_;
    AnalysisConfig cfg_;
};

} // namespace cfl

#endif
