#include "doctest.h"
#include "world_oracle.hpp"

#include "cfl/mus.hpp"
#include "cfl/strategy.hpp"

#include <algorithm>

using namespace cfl;

namespace {

Formula cmp_eq(const std::string& var, const std::string& val) {
    return Formula::atom(Vocabulary::value_atom(var, val));
}

WorldModel tiny_deterministic() {
    WorldModel m;
    m.vars = {StateVar{"v", {"f", "t"}}};
    m.actions.a = {"keep"};
    m.actions.b = {"idle"};
    m.actions.env = {"tick"};
    m.rules.push_back({Formula::top(), {"keep", "*", "*"}, {{"v", {}, "v", 0}}});
    m.observations = {{{"v", "t"}}};
    m.horizon = 2;
    return m;
}

WorldModel mini_highway() {
    WorldModel m;
    m.vars = {StateVar{"l_A", {"1", "2"}}, StateVar{"p_A", {"0", "1", "2", "3", "4", "5"}},
              StateVar{"p_B", {"0", "1", "2", "3", "4", "5"}},
              StateVar{"s_B", {"slow", "fast"}}};
    m.actions.a = {"keep", "change"};
    m.actions.b = {"keepB", "acc"};
    m.actions.env = {"tick"};
    m.rules.push_back({Formula::top(), {"*", "*", "*"}, {{"p_A", {}, "p_A", 1}}});
    m.rules.push_back({cmp_eq("l_A", "1"), {"change", "*", "*"}, {{"l_A", "2", {}, 0}}});
    m.rules.push_back({cmp_eq("s_B", "slow"), {"*", "*", "*"}, {{"p_B", {}, "p_B", 0}}});
    m.rules.push_back({cmp_eq("s_B", "fast"), {"*", "*", "*"}, {{"p_B", {}, "p_B", 2}}});
    m.rules.push_back({cmp_eq("s_B", "slow"), {"*", "acc", "*"}, {{"s_B", "fast", {}, 0}}});
    m.observations = {{{"l_A", "1"}, {"p_A", "1"}, {"p_B", "0"}}};
    m.horizon = 2;
    return m;
}

PossibleWorldSet radar_lidar_worlds(const WorldModel& m) {
    EvidenceBase base;
    base.items.push_back({"radar", cmp_eq("s_B", "fast"), "sensor"});
    base.items.push_back({"lidar", cmp_eq("s_B", "slow"), "sensor"});
    return build_possible_worlds(base, m);
}

std::size_t count_full_models(const CnfFormula& f, WorldContext& ctx) {
    std::vector<int> proj;
    for (const auto& [key, var] : ctx.pool().named()) proj.push_back(var);
    return enumerate_models(f, proj, 1u << 18).size();
}

} // namespace

TEST_CASE("a constant strategy in a deterministic world pins a single run") {
    WorldModel m = tiny_deterministic();
    EvidenceBase base;
    auto ws = build_possible_worlds(base, m);
    StrategyAnalyzer an(ws, {});
    auto pool = an.enumerate_strategies(Slot::A, an.all_groups(), 1000);
    REQUIRE(pool.size() == 1); // one action, blind classes
    CnfFormula f = an.encode_strategy(pool[0], 0);
    CHECK(count_full_models(f, an.ctx()) == 1);
}

TEST_CASE("encode_strategy rejects partial strategies naming the uncovered class") {
    WorldModel m = mini_highway();
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    Strategy partial;
    partial.owner = "A";
    // no decisions at all
    try {
        an.encode_strategy(partial, 0);
        FAIL("expected totality_error");
    } catch (const totality_error& e) {
        CHECK(std::string(e.what()).find("class") != std::string::npos);
    }
}

TEST_CASE("strategy enumeration counts: blind tree, two actions, two steps") {
    WorldModel m = mini_highway();
    // deterministic B so the blind tree is thin
    m.actions.b = {"keepB"};
    m.rules.pop_back(); // drop the acc rule referencing the removed action
    EvidenceBase base;
    base.items.push_back({"radar", cmp_eq("s_B", "fast"), "sensor"});
    auto ws = build_possible_worlds(base, m);
    StrategyAnalyzer an(ws, {}); // no observables: one class per step
    CHECK(an.count_strategies(Slot::A, an.all_groups()) == 4); // 2 actions ^ 2 steps
    auto pool = an.enumerate_strategies(Slot::A, an.all_groups(), 10);
    CHECK(pool.size() == 4);
    CHECK_THROWS_AS(an.enumerate_strategies(Slot::A, an.all_groups(), 3), capacity_error);
    // lexicographic order by (step, class id, action id): first strategy takes
    // the alphabetically first action everywhere
    for (const auto& [key, act] : pool[0].decisions) CHECK(act == "change");
}

TEST_CASE("observation classes split exactly where runs become distinguishable") {
    WorldModel m = mini_highway();
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    const auto& nodes = an.tree(an.all_groups());
    // step 0: both groups observe p_B = 0; step 1: fast group shows p_B = 2,
    // slow group p_B = 0 (acc acts on the speed only afterwards)
    std::size_t step0 = 0, step1 = 0;
    for (const auto& n : nodes) {
        if (n.step == 0) step0++;
        if (n.step == 1) step1++;
    }
    CHECK(step0 == 1);
    CHECK(step1 == 2);
    // per-group trees are thinner
    const auto& radar_tree = an.tree({1});
    CHECK(radar_tree.size() == 2);
}

TEST_CASE("random strategies: compliant model sets equal the simulation oracle") {
    oracles::XorShift rng(0x57A7ull);
    WorldModel m = mini_highway();
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    auto groups = an.all_groups();
    auto pool = an.enumerate_joint_strategies(groups, 1u << 20);
    oracles::SimWorld sim(m);

    for (int round = 0; round < 10; ++round) {
        const JointStrategy& j = pool[rng.below(pool.size())];
        for (std::size_t gi : groups) {
            // register B's selectors first so the materialized CNF has them
            auto sels = an.strategy_assumptions(Slot::B, j.b_part);
            CnfFormula f = an.encode_strategy(j.a_part, gi);
            for (Lit s : sels) f.add_clause({s});
            std::size_t got = count_full_models(f, an.ctx());

            // oracle side: explicit runs compliant with both parts, filtered
            // by the group's evidence on s_B at the current state
            auto runs = sim.compliant_runs(j.a_part, j.b_part, {"p_B"});
            std::string speed = gi == 1 ? "fast" : "slow";
            std::size_t expect = 0;
            for (const auto& r : runs)
                if (r.states[(std::size_t)m.now_pos()].at("s_B") == speed) expect++;
            CHECK(got == expect);
        }
    }
}

TEST_CASE("is_winning: impossible goals fail with a valid falsifying witness") {
    WorldModel m = mini_highway();
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    auto pool = an.enumerate_strategies(Slot::A, an.all_groups(), 1u << 16);
    auto res = an.is_winning(pool[0], an.all_groups(), {Formula::bottom()});
    CHECK(!res.winning);
    REQUIRE(res.witness);
    // the witness run falsifies the goal under formula evaluation
    Run r = res.witness->to_run();
    CHECK(!eval(Formula::bottom(), r, an.ctx().now()));
    // and it is a genuine run of the model
    oracles::SimWorld sim(m);
    bool found = false;
    for (const auto& sr : sim.runs(m.last_pos() + 1)) {
        bool same = true;
        for (std::size_t p = 0; p < sr.states.size() && same; ++p)
            for (const auto& [var, val] : sr.states[p])
                if (res.witness->states[p].at(var) != val) same = false;
        if (same) found = true;
    }
    CHECK(found);
}

TEST_CASE("winning verdicts agree with exhaustive game-tree evaluation") {
    WorldModel m = mini_highway();
    m.horizon = 2;
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    auto groups = an.all_groups();
    auto pool = an.enumerate_strategies(Slot::A, groups, 1u << 16);
    oracles::SimWorld sim(m);

    // goal: A eventually reaches lane 2 and B never reaches the last cell
    Formula goal = Formula::and_(
        Formula::bounded_finally(2, cmp_eq("l_A", "2")),
        Formula::bounded_globally(2, Formula::not_(cmp_eq("p_B", "5"))));
    int winners = 0;
    for (const auto& d : pool) {
        auto res = an.is_winning(d, groups, {goal});
        // oracle: every compliant run in every group satisfies the goal
        bool expect = true;
        for (const auto& r : sim.compliant_runs(d, std::nullopt, {"p_B"})) {
            if (!oracles::eval_oracle(goal, r.to_run(), m.now_pos())) {
                expect = false;
                break;
            }
        }
        CHECK(res.winning == expect);
        winners += res.winning ? 1 : 0;
    }
    CHECK(winners > 0);
    CHECK(winners < (int)pool.size());
}

TEST_CASE("winning monotonicity: a conjunction winner wins each conjunct") {
    WorldModel m = mini_highway();
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    auto groups = an.all_groups();
    auto pool = an.enumerate_strategies(Slot::A, groups, 1u << 16);
    Formula g1 = Formula::bounded_globally(2, cmp_eq("l_A", "1"));
    Formula g2 = Formula::bounded_globally(1, Formula::not_(cmp_eq("p_A", "5")));
    for (const auto& d : pool) {
        if (an.is_winning(d, groups, {Formula::and_(g1, g2)}).winning) {
            CHECK(an.is_winning(d, groups, {g1}).winning);
            CHECK(an.is_winning(d, groups, {g2}).winning);
        }
    }
}

TEST_CASE("group decomposition: winning over the set is winning per group") {
    WorldModel m = mini_highway();
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    auto groups = an.all_groups();
    auto pool = an.enumerate_strategies(Slot::A, groups, 1u << 16);
    Formula goal = Formula::bounded_globally(2, cmp_eq("l_A", "1"));
    for (const auto& d : pool) {
        bool whole = an.is_winning(d, groups, {goal}).winning;
        bool parts = true;
        for (std::size_t gi : groups) parts = parts && an.is_winning(d, {gi}, {goal}).winning;
        CHECK(whole == parts);
    }
}

TEST_CASE("max_achievable picks the weight-maximal achievable subset") {
    WorldModel m = mini_highway();
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    auto groups = an.all_groups();
    auto pool = an.enumerate_joint_strategies(groups, 1u << 20);

    GoalSet gs;
    gs.goals.push_back({"phi_cl", Formula::bounded_globally(2, Formula::not_(cmp_eq("p_A", "5")))});
    gs.goals.push_back({"phi_cf", Formula::bounded_globally(2, cmp_eq("l_A", "1"))});
    gs.weights[{"phi_cf", "phi_cl"}] = 2;
    gs.weights[{"phi_cl"}] = 1;

    auto maxres = an.max_achievable(gs, pool, groups);
    REQUIRE(maxres.size() == 1);
    CHECK(maxres[0].subset == std::vector<std::string>{"phi_cf", "phi_cl"});
    CHECK(maxres[0].weight == 2);
    CHECK(!maxres[0].witnesses.empty());
}

TEST_CASE("max_achievable falls back to the empty subset when nothing is winnable") {
    WorldModel m = mini_highway();
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    auto groups = an.all_groups();
    auto pool = an.enumerate_joint_strategies(groups, 1u << 20);
    GoalSet gs;
    gs.goals.push_back({"impossible", Formula::bottom()});
    gs.weights[{"impossible"}] = 5;
    auto maxres = an.max_achievable(gs, pool, groups);
    REQUIRE(maxres.size() == 1);
    CHECK(maxres[0].subset.empty());
    CHECK(maxres[0].weight == 0);
}

TEST_CASE("max_achievable equals brute force over subsets and strategies") {
    oracles::XorShift rng(0x90A15ull);
    WorldModel m = mini_highway();
    m.horizon = 2;
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    auto groups = an.all_groups();
    auto pool = an.enumerate_joint_strategies(groups, 1u << 20);
    oracles::SimWorld sim(m);

    std::vector<Formula> candidates = {
        Formula::bounded_globally(2, cmp_eq("l_A", "1")),
        Formula::bounded_finally(2, cmp_eq("l_A", "2")),
        Formula::bounded_globally(2, Formula::not_(cmp_eq("p_B", "4"))),
        Formula::bounded_finally(1, cmp_eq("p_A", "2")),
        Formula::bounded_globally(1, Formula::not_(cmp_eq("s_B", "fast"))),
    };
    for (int round = 0; round < 4; ++round) {
        GoalSet gs;
        for (int g = 0; g < 3; ++g)
            gs.goals.push_back({"g" + std::to_string(g), candidates[rng.below(candidates.size())]});
        for (std::uint64_t mask = 1; mask < 8; ++mask) {
            std::vector<std::string> key;
            for (int g = 0; g < 3; ++g)
                if (mask & (1u << g)) key.push_back("g" + std::to_string(g));
            if (rng.coin()) gs.weights[key] = (int)rng.below(6);
        }

        auto maxres = an.max_achievable(gs, pool, groups);

        // oracle: for every joint strategy, evaluate every goal on all
        // compliant runs per group; then scan all subsets
        std::vector<std::set<std::string>> bits(pool.size());
        for (std::size_t si = 0; si < pool.size(); ++si) {
            auto runs = sim.compliant_runs(pool[si].a_part, pool[si].b_part, {"p_B"});
            for (int g = 0; g < 3; ++g) {
                bool wins = true;
                for (const auto& r : runs)
                    if (!oracles::eval_oracle(gs.goals[(std::size_t)g].second, r.to_run(),
                                              m.now_pos())) {
                        wins = false;
                        break;
                    }
                if (wins) bits[si].insert("g" + std::to_string(g));
            }
        }
        int best = 0;
        std::set<std::vector<std::string>> best_subsets;
        for (std::uint64_t mask = 0; mask < 8; ++mask) {
            std::set<std::string> subset;
            for (int g = 0; g < 3; ++g)
                if (mask & (1u << g)) subset.insert("g" + std::to_string(g));
            bool achievable = subset.empty();
            for (const auto& b : bits)
                achievable = achievable || std::includes(b.begin(), b.end(), subset.begin(),
                                                         subset.end());
            if (!achievable) continue;
            int w = gs.weight_of(subset);
            if (w > best) {
                best = w;
                best_subsets.clear();
            }
            if (w == best) best_subsets.insert({subset.begin(), subset.end()});
        }
        REQUIRE(maxres.size() == best_subsets.size());
        for (const auto& mr : maxres) {
            CHECK(best_subsets.count(mr.subset));
            CHECK(mr.weight == best);
        }
    }
}

TEST_CASE("parallel goal-bit computation matches the sequential result") {
    WorldModel m = mini_highway();
    auto ws = radar_lidar_worlds(m);
    StrategyAnalyzer an(ws, {"p_B"});
    auto groups = an.all_groups();
    auto pool = an.enumerate_joint_strategies(groups, 1u << 20);
    GoalSet gs;
    gs.goals.push_back({"stay", Formula::bounded_globally(2, cmp_eq("l_A", "1"))});
    gs.goals.push_back({"go", Formula::bounded_finally(2, cmp_eq("l_A", "2"))});
    auto seq = an.winning_goal_bits(gs, pool, groups, 1);
    auto par = an.winning_goal_bits(gs, pool, groups, 4);
    CHECK(seq == par);
}
