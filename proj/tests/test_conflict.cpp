#include "doctest.h"
#include "world_oracle.hpp"

#include "cfl/cli.hpp"
#include "cfl/scenario.hpp"

#include <algorithm>

using namespace cfl;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(CFL_FIXTURE_DIR) + "/" + name;
}

ConflictAnalyzer analyzer_for(const Scenario& s, int max_level = 4) {
    RunConfig cfg;
    cfg.max_level = max_level;
    return make_analyzer(s, cfg);
}

// Side-by-side driving, both agents prioritizing collision-freedom: no agent
// has a reason to steer into the other.
const char* kSideBySide = R"(
HORIZON: 2

VARS:
  l_A : {1, 2}
  l_B : {2}
  p_A : 0..6
  p_B : 0..6
  s_B : {slow, fast}

ACTIONS:
  A: keep, change
  B: keepB, decB
  Env: tick

TRANS:
  (*, *, *) : true => p_A' = p_A + 1
  (change, *, *) : l_A = 1 => l_A' = 2
  (*, *, *) : s_B = slow => p_B' = p_B + 1
  (*, *, *) : s_B = fast => p_B' = p_B + 2
  (*, decB, *) : s_B = fast => s_B' = slow

INIT: l_A=1, p_A=2, p_B=2, s_B=slow

GOALS_A:
  a_col: G<=2 (l_A != l_B | (p_A != p_B & p_A != p_B + 1 & p_B != p_A + 1))

WEIGHTS_A:
  {a_col}: 1

GOALS_B:
  b_col: G<=2 (l_A != l_B | (p_A != p_B & p_A != p_B + 1 & p_B != p_A + 1))

WEIGHTS_B:
  {b_col}: 1
)";

// Broken-car variant: B cannot reach its own goal in any of A's worlds (a
// fault right in front of it), so A assumes B behaves arbitrarily. A's merge
// around the obstacle is then blocked by a braking B.
const char* kBrokenCar = R"(
HORIZON: 2

VARS:
  l_A : {1, 2}
  l_B : {2}
  p_A : 0..6
  p_B : 0..6
  s_B : {slow, fast}
  l_o : {1}
  p_o : {4}
  fault : {3}

ACTIONS:
  A: keep, change
  B: keepB, decB
  Env: tick

TRANS:
  (*, *, *) : true => p_A' = p_A + 1
  (change, *, *) : l_A = 1 => l_A' = 2
  (*, *, *) : s_B = slow => p_B' = p_B + 1
  (*, *, *) : s_B = fast => p_B' = p_B + 2
  (*, decB, *) : s_B = fast => s_B' = slow

INIT: l_A=1, p_A=2, p_B=1, s_B=fast

EVIDENCE:
  radar: s_B = fast

GOALS_A:
  a_col: G<=2 ((l_A != l_B | p_A != p_B) & (l_A != l_o | p_A != p_o))

WEIGHTS_A:
  {a_col}: 1

GOALS_B:
  b_fault: G<=2 p_B != fault

WEIGHTS_B:
  {b_fault}: 1
)";

} // namespace

TEST_CASE("side-by-side driving with shared collision-freedom is not a conflict") {
    Scenario s = parse_scenario(kSideBySide);
    auto det = analyzer_for(s).detect_conflict();
    CHECK(!det.conflict);
    CHECK(!det.survivors.empty());
}

TEST_CASE("a blocked B with no winning strategy makes A assume arbitrary behavior") {
    Scenario s = parse_scenario(kBrokenCar);
    // B cannot avoid the wall at 5: from 3 it advances 1 or 2 per step and
    // lands on 5 under every behavior, so its believed-maximal goal is empty
    // and every B behavior is in scope; A's lane change can then be rammed.
    auto det = analyzer_for(s).detect_conflict();
    CHECK(det.conflict);
    REQUIRE(!det.causes.empty());
    for (const auto& c : det.causes) CHECK(!c.justification.empty());
}

TEST_CASE("fixture verdicts: ex3 no conflict, ex4 conflict resolved at C1") {
    Scenario ex3 = load_scenario_file(fixture_path("highway_ex3.cfl"));
    auto det3 = analyzer_for(ex3).detect_conflict();
    CHECK(!det3.conflict);
    auto report3 = analyzer_for(ex3).find_strategy();
    CHECK(report3.verdict == ConflictReport::Verdict::NoConflict);
    CHECK(!report3.level);
    CHECK(report3.trace.empty());

    Scenario ex4 = load_scenario_file(fixture_path("highway_ex4.cfl"));
    auto det4 = analyzer_for(ex4).detect_conflict();
    CHECK(det4.conflict);
    auto report4 = analyzer_for(ex4).find_strategy();
    REQUIRE(report4.verdict == ConflictReport::Verdict::Resolved);
    CHECK(*report4.level == ResolutionLevel::C1);
    REQUIRE(!report4.trace.empty());
    CHECK(report4.trace[0].added == std::vector<std::string>{"b_fast"});
    CHECK(report4.trace[0].removed == std::vector<std::string>{"lidar"});
    CHECK(!report4.strategies.empty());
    // causes name the lidar evidence
    bool lidar_named = false;
    for (const auto& c : report4.causes)
        for (const auto& j : c.justification) lidar_named = lidar_named || j == "lidar";
    CHECK(lidar_named);
}

TEST_CASE("fixture verdicts: ex5 resolves at C2 and is stuck below") {
    Scenario ex5 = load_scenario_file(fixture_path("highway_ex5.cfl"));
    auto report = analyzer_for(ex5).find_strategy();
    REQUIRE(report.verdict == ConflictReport::Verdict::Resolved);
    CHECK(*report.level == ResolutionLevel::C2);
    auto capped = analyzer_for(ex5, 1).find_strategy();
    CHECK(capped.verdict == ConflictReport::Verdict::Unresolved);
}

TEST_CASE("fixture verdicts: ex6 resolves at C3 via goal adoption") {
    Scenario ex6 = load_scenario_file(fixture_path("highway_ex6.cfl"));
    auto report = analyzer_for(ex6).find_strategy();
    REQUIRE(report.verdict == ConflictReport::Verdict::Resolved);
    CHECK(*report.level == ResolutionLevel::C3);
    CHECK(report.trace[0].added == std::vector<std::string>{"phi_kf"});
    auto capped = analyzer_for(ex6, 2).find_strategy();
    CHECK(capped.verdict == ConflictReport::Verdict::Unresolved);
}

TEST_CASE("fixture verdicts: ex7 negotiates the priority-weighted goal set at C4") {
    Scenario ex7 = load_scenario_file(fixture_path("highway_ex7.cfl"));
    auto report = analyzer_for(ex7).find_strategy();
    REQUIRE(report.verdict == ConflictReport::Verdict::Resolved);
    CHECK(*report.level == ResolutionLevel::C4);
    REQUIRE(report.negotiated_goals);
    CHECK(*report.negotiated_goals ==
          std::vector<std::string>{"phi_A_col", "phi_B_col", "phi_B_fast"});
    CHECK(!report.strategies.empty());
    auto capped = analyzer_for(ex7, 3).find_strategy();
    CHECK(capped.verdict == ConflictReport::Verdict::Unresolved);
}

TEST_CASE("C4 without a joint weight table is a configuration error") {
    Scenario ex7 = load_scenario_file(fixture_path("highway_ex7.cfl"));
    ex7.coop.joint_weights.reset();
    CHECK_THROWS_AS(analyzer_for(ex7).find_strategy(), configuration_error);
}

TEST_CASE("fix is a fixed point when a level has nothing to offer") {
    Scenario ex5 = load_scenario_file(fixture_path("highway_ex5.cfl"));
    auto an = analyzer_for(ex5);
    ConflictCause cause;
    cause.justification = {"radar"};
    LevelDelta d1;
    // C1: radar is uncontradicted, so nothing changes
    CHECK(!an.fix({cause}, ResolutionLevel::C1, d1));
    CHECK(an.base().evidence.items.size() == 1);
    // C3: no adoption data declared
    LevelDelta d3;
    CHECK(!an.fix({cause}, ResolutionLevel::C3, d3));
    // C2 applies the commitment, once
    LevelDelta d2;
    CHECK(an.fix({cause}, ResolutionLevel::C2, d2));
    CHECK(an.base().shared_strategy_facts.size() == 1);
    LevelDelta d2again;
    CHECK(!an.fix({cause}, ResolutionLevel::C2, d2again));
}

TEST_CASE("test_strategy reports the justification of the first failure") {
    Scenario ex5 = load_scenario_file(fixture_path("highway_ex5.cfl"));
    auto an = analyzer_for(ex5);
    // the blind late-merge candidate: keep, keep, change
    Strategy d;
    d.owner = "A";
    auto ws = build_possible_worlds(ex5.evidence, ex5.world);
    StrategyAnalyzer sa(ws, ex5.observables);
    for (const auto& node : sa.tree(sa.all_groups()))
        d.decisions[{node.step, node.class_id}] = node.step == 2 ? "change" : "keep";
    auto just = an.test_strategy(d, {"phi_cl", "phi_lc"});
    CHECK(!just.empty());
    // the scenario's only evidence atom backs the failing world
    CHECK(std::find(just.begin(), just.end(), "radar") != just.end());
}

TEST_CASE("resolution soundness: re-detection on the updated base finds no conflict") {
    for (const char* name : {"highway_ex4.cfl", "highway_ex5.cfl", "highway_ex6.cfl"}) {
        Scenario s = load_scenario_file(fixture_path(name));
        auto an = analyzer_for(s);
        auto report = an.find_strategy();
        REQUIRE(report.verdict == ConflictReport::Verdict::Resolved);
        // rebuild an analyzer whose starting point is the mutated base
        AnalysisConfig cfg;
        ConflictAnalyzer re(s.world, an.base(), an.goals_a(), an.believed_goals_b(), s.coop,
                            s.observables, cfg);
        auto det = re.detect_conflict();
        INFO(name);
        CHECK(!det.conflict);
        // the base only ever grew
        CHECK(an.base().size() >= s.information_base().size());
    }
}

TEST_CASE("cause reproducibility: the recorded pair falsifies the joint goals") {
    Scenario ex5 = load_scenario_file(fixture_path("highway_ex5.cfl"));
    auto det = analyzer_for(ex5).detect_conflict();
    REQUIRE(det.conflict);
    REQUIRE(!det.causes.empty());
    const auto& cause = det.causes.front();
    // replay: rebuild the worlds and check the pair is not winning
    auto ws = build_possible_worlds(ex5.evidence, ex5.world);
    StrategyAnalyzer sa(ws, ex5.observables);
    auto groups = sa.all_groups();
    auto pool = sa.enumerate_joint_strategies(groups, 1u << 20);
    const Strategy* da = nullptr;
    const Strategy* db = nullptr;
    for (const auto& j : pool) {
        if (j.a_part.id() == cause.a_strategy) da = &j.a_part;
        if (j.b_part.id() == cause.b_strategy) db = &j.b_part;
    }
    REQUIRE(da);
    REQUIRE(db);
    std::vector<Formula> goals;
    for (const auto& n : cause.goals_a) goals.push_back(*ex5.goals_a.find_goal(n));
    for (const auto& n : cause.goals_b) goals.push_back(*ex5.believed_goals_b.find_goal(n));
    std::size_t gi = 0; // single group in ex5
    auto win = sa.is_winning(JointStrategy{*da, *db}, {gi}, goals);
    CHECK(!win.winning);
    REQUIRE(win.witness);
    // the witness run falsifies the conjunction under direct evaluation
    bool all_true = true;
    for (const auto& g : goals)
        all_true = all_true && oracles::eval_oracle(g, win.witness->to_run(), ex5.world.now_pos());
    CHECK(!all_true);
}

TEST_CASE("monotonicity audit: base sizes never shrink, group counts never grow") {
    for (const char* name : {"highway_ex3.cfl", "highway_ex4.cfl", "highway_ex5.cfl",
                             "highway_ex6.cfl", "highway_ex7.cfl"}) {
        Scenario s = load_scenario_file(fixture_path(name));
        auto report = analyzer_for(s).find_strategy();
        INFO(name);
        for (std::size_t i = 1; i < report.base_sizes.size(); ++i)
            CHECK(report.base_sizes[i] >= report.base_sizes[i - 1]);
        for (std::size_t i = 1; i < report.group_counts.size(); ++i)
            CHECK(report.group_counts[i] <= report.group_counts[i - 1]);
        // termination bookkeeping: at most one applied level per extra round
        CHECK(report.trace.size() + 1 >= report.base_sizes.size());
        CHECK(report.trace.size() <= 4u * 4u);
    }
}

TEST_CASE("explain: no-conflict reports carry an empty cause chain") {
    Scenario ex3 = load_scenario_file(fixture_path("highway_ex3.cfl"));
    auto an = analyzer_for(ex3);
    auto report = an.find_strategy();
    auto ex = an.explain(report);
    CHECK(ex.entries.empty());
    CHECK(ex.to_text().find("no causes") != std::string::npos);
}

TEST_CASE("explain: the ex4 chain names the contradiction and its discharge level") {
    Scenario ex4 = load_scenario_file(fixture_path("highway_ex4.cfl"));
    auto an = analyzer_for(ex4);
    auto report = an.find_strategy();
    auto ex = an.explain(report);
    REQUIRE(!ex.entries.empty());
    bool pair_found = false;
    for (const auto& e : ex.entries) {
        bool has_lidar = std::find(e.cause.justification.begin(), e.cause.justification.end(),
                                   "lidar") != e.cause.justification.end();
        bool radar_contra = std::find(e.contradicts.begin(), e.contradicts.end(), "radar") !=
                            e.contradicts.end();
        if (has_lidar && radar_contra) {
            pair_found = true;
            REQUIRE(e.discharged_at);
            CHECK(*e.discharged_at == ResolutionLevel::C1);
        }
    }
    CHECK(pair_found);
    std::string text = ex.to_text();
    CHECK(text.find("lidar") != std::string::npos);
    CHECK(text.find("radar") != std::string::npos);
    CHECK(text.find("C1") != std::string::npos);
}

TEST_CASE("explain: unresolved analyses mark every cause undischarged") {
    Scenario ex5 = load_scenario_file(fixture_path("highway_ex5.cfl"));
    // forbid every disclosure: cap below C2 so the commitment stays private
    auto an = analyzer_for(ex5, 1);
    auto report = an.find_strategy();
    REQUIRE(report.verdict == ConflictReport::Verdict::Unresolved);
    auto ex = an.explain(report);
    REQUIRE(!ex.entries.empty());
    for (const auto& e : ex.entries) CHECK(!e.discharged_at);
}

TEST_CASE("report JSON carries the published schema fields") {
    Scenario ex4 = load_scenario_file(fixture_path("highway_ex4.cfl"));
    auto report = analyzer_for(ex4).find_strategy();
    auto j = report.to_json();
    for (const char* key :
         {"verdict", "level", "strategies", "causes", "trace", "negotiated_goals"})
        CHECK(j.contains(key));
    CHECK(j["verdict"] == "resolved");
    CHECK(j["level"] == "C1");
    CHECK(j["negotiated_goals"].is_null());
    REQUIRE(j["causes"].is_array());
    for (const auto& c : j["causes"]) {
        CHECK(c.contains("justification"));
        CHECK(c.contains("goals_A"));
        CHECK(c.contains("goals_B"));
        CHECK(c.contains("group"));
    }
}
