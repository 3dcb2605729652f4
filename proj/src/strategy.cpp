#include "cfl/strategy.hpp"

#include "cfl/mus.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace cfl {

std::string obs_sequence_id(const ObsSequence& seq) {
    std::string out;
    for (std::size_t k = 0; k < seq.size(); ++k) {
        if (k) out += "|";
        out += "t" + std::to_string(k) + ":";
        for (std::size_t i = 0; i < seq[k].size(); ++i) {
            if (i) out += ",";
            out += seq[k][i];
        }
    }
    return out.empty() ? "-" : out;
}

std::string Strategy::id() const {
    std::string out = owner + "[";
    bool first = true;
    for (const auto& [key, act] : decisions) {
        if (!first) out += "; ";
        first = false;
        out += "k" + std::to_string(key.first) + "(" + key.second + ")->" + act;
    }
    return out + "]";
}

std::string JointStrategy::id() const { return a_part.id() + "+" + b_part.id(); }

int GoalSet::weight_of(const std::set<std::string>& subset) const {
    std::set<std::string> rest = subset;
    int bonus = 0;
    for (const auto& d : dominant)
        if (rest.erase(d)) bonus += dominant_bonus;
    std::vector<std::string> key(rest.begin(), rest.end());
    auto it = weights.find(key);
    return (it == weights.end() ? 0 : it->second) + bonus;
}

const Formula* GoalSet::find_goal(const std::string& name) const {
    for (const auto& [n, f] : goals)
        if (n == name) return &f;
    return nullptr;
}

std::vector<std::string> GoalSet::names() const {
    std::vector<std::string> out;
    for (const auto& [n, f] : goals) out.push_back(n);
    return out;
}

Run RunWitness::to_run() const {
    Run r;
    for (std::size_t p = 0; p < states.size(); ++p) {
        std::set<std::string> st;
        for (const auto& [var, val] : states[p]) st.insert(var + "=" + val);
        if (p < joint_actions.size()) {
            st.insert(std::string("act_A=") + joint_actions[p][0]);
            st.insert(std::string("act_B=") + joint_actions[p][1]);
            st.insert(std::string("act_env=") + joint_actions[p][2]);
        }
        r.states.push_back(std::move(st));
    }
    return r;
}

//=================================================================================================

StrategyAnalyzer::StrategyAnalyzer(PossibleWorldSet ws, std::vector<std::string> observables)
    : ws_(std::move(ws)), observables_(std::move(observables)) {
    for (const auto& o : observables_)
        if (!ws_.ctx->model().find_var(o))
            throw input_error("strategy: observable '" + o + "' is not a state variable");
}

std::vector<std::size_t> StrategyAnalyzer::all_groups() const {
    std::vector<std::size_t> idx(ws_.groups.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
}

const std::vector<ObsNode>& StrategyAnalyzer::tree(const std::vector<std::size_t>& groups) {
    auto it = tree_cache_.find(groups);
    if (it != tree_cache_.end()) return it->second;

    WorldContext& ctx = *ws_.ctx;
    const WorldModel& m = ctx.model();
    std::set<ObsSequence> prefixes;

    for (std::size_t gi : groups) {
        // frontier of (prefix, assumption literals pinning it)
        std::vector<std::pair<ObsSequence, std::vector<Lit>>> frontier = {
            {ObsSequence{}, ws_.groups.at(gi).assumptions}};
        for (int step = 0; step < m.horizon; ++step) {
            std::vector<std::pair<ObsSequence, std::vector<Lit>>> next;
            for (auto& [prefix, assumps] : frontier) {
                std::vector<int> proj;
                for (const auto& name : observables_) {
                    const StateVar* v = m.find_var(name);
                    for (const auto& val : v->values)
                        proj.push_back(ctx.state_lit(name, val, ctx.now() + step));
                }
                auto models = ctx.enumerate(proj, assumps, 1u << 12);
                for (const auto& model : models) {
                    ObsValuation obs;
                    std::vector<Lit> pin = assumps;
                    for (const auto& name : observables_) {
                        const StateVar* v = m.find_var(name);
                        for (const auto& val : v->values) {
                            Lit l = ctx.state_lit(name, val, ctx.now() + step);
                            if (model.at(var_of(l))) {
                                obs.push_back(name + "=" + val);
                                pin.push_back(l);
                            }
                        }
                    }
                    ObsSequence extended = prefix;
                    extended.push_back(obs);
                    prefixes.insert(extended);
                    next.push_back({std::move(extended), std::move(pin)});
                }
            }
            frontier = std::move(next);
        }
    }

    std::vector<ObsNode> nodes;
    for (const auto& p : prefixes) {
        ObsNode n;
        n.step = (int)p.size() - 1;
        n.prefix = p;
        n.class_id = obs_sequence_id(p);
        nodes.push_back(std::move(n));
    }
    std::sort(nodes.begin(), nodes.end(), [](const ObsNode& a, const ObsNode& b) {
        if (a.step != b.step) return a.step < b.step;
        return a.class_id < b.class_id;
    });
    return tree_cache_.emplace(groups, std::move(nodes)).first->second;
}

Lit StrategyAnalyzer::class_lit(const ObsNode& node) {
    auto it = class_lit_cache_.find(node.class_id);
    if (it != class_lit_cache_.end()) return it->second;
    WorldContext& ctx = *ws_.ctx;
    std::vector<Lit> conj;
    for (std::size_t k = 0; k < node.prefix.size(); ++k)
        for (const auto& assignment : node.prefix[k]) {
            auto eq = assignment.find('=');
            conj.push_back(ctx.state_lit(assignment.substr(0, eq), assignment.substr(eq + 1),
                                         ctx.now() + (int)k));
        }
    Lit l = ctx.compiler().mk_and(conj);
    class_lit_cache_.emplace(node.class_id, l);
    return l;
}

std::vector<std::string> StrategyAnalyzer::sorted_actions(Slot slot) const {
    auto acts = ws_.ctx->model().actions.of(slot);
    std::sort(acts.begin(), acts.end());
    return acts;
}

std::vector<Lit> StrategyAnalyzer::strategy_assumptions(Slot slot, const Strategy& d) {
    WorldContext& ctx = *ws_.ctx;
    std::vector<Lit> out;
    for (const auto& [key, act] : d.decisions) {
        const auto& [step, class_id] = key;
        auto sel_key = std::make_tuple((int)slot, class_id + "#k" + std::to_string(step), act);
        auto it = selector_cache_.find(sel_key);
        if (it != selector_cache_.end()) {
            out.push_back(it->second);
            continue;
        }
        // find the node to build its class literal
        const ObsNode* node = nullptr;
        for (const auto& [groups, nodes] : tree_cache_)
            for (const auto& n : nodes)
                if (n.step == step && n.class_id == class_id) {
                    node = &n;
                    break;
                }
        if (!node) throw input_error("strategy: decision references unknown class '" + class_id + "'");
        Lit cls = class_lit(*node);
        Lit act_l = ctx.action_lit(slot, act, ctx.now() + step);
        Lit sel = ctx.pool().aux_var();
        // sel -> (class -> action)
        ctx.pool().add_clause({-sel, -cls, act_l});
        out.push_back(sel);
        selector_cache_.emplace(sel_key, sel);
    }
    return out;
}

Lit StrategyAnalyzer::goal_lit(const Formula& goal) {
    auto it = goal_lit_cache_.find(goal.id());
    if (it != goal_lit_cache_.end()) return it->second;
    if (goal.future_depth() > ws_.ctx->model().horizon)
        throw horizon_overflow_error("strategy: goal temporal depth " +
                                     std::to_string(goal.future_depth()) + " exceeds horizon " +
                                     std::to_string(ws_.ctx->model().horizon));
    Lit l = ws_.ctx->compiler().compile(goal, ws_.ctx->now());
    pinned_goals_.push_back(goal);
    goal_lit_cache_.emplace(goal.id(), l);
    return l;
}

void StrategyAnalyzer::check_total(const Strategy& d, const std::vector<std::size_t>& groups) {
    for (const auto& node : tree(groups)) {
        if (!d.decisions.count({node.step, node.class_id}))
            throw totality_error("strategy: no decision for step " + std::to_string(node.step) +
                                 ", class '" + node.class_id + "'");
    }
}

CnfFormula StrategyAnalyzer::encode_strategy(const Strategy& d, std::size_t group_index) {
    check_total(d, {group_index});
    Slot slot = d.owner == "B" ? Slot::B : Slot::A;
    std::vector<Lit> sels = strategy_assumptions(slot, d);
    CnfFormula f = ws_.ctx->pool().cnf();
    for (Lit a : ws_.groups.at(group_index).assumptions) f.add_clause({a});
    for (Lit s : sels) f.add_clause({s});
    return f;
}

RunWitness StrategyAnalyzer::decode_model(const std::vector<bool>& model) {
    WorldContext& ctx = *ws_.ctx;
    const WorldModel& m = ctx.model();
    RunWitness w;
    w.states.resize((std::size_t)m.last_pos() + 1);
    w.joint_actions.resize((std::size_t)m.last_pos());
    for (const auto& [key, var] : ctx.pool().named()) {
        if (var >= (int)model.size() || !model[(std::size_t)var]) continue;
        const auto& [atom, pos] = key;
        auto eq = atom.find('=');
        std::string name = atom.substr(0, eq);
        std::string value = atom.substr(eq + 1);
        if (name == "act_A" && pos < m.last_pos()) w.joint_actions[(std::size_t)pos][0] = value;
        else if (name == "act_B" && pos < m.last_pos()) w.joint_actions[(std::size_t)pos][1] = value;
        else if (name == "act_env" && pos < m.last_pos()) w.joint_actions[(std::size_t)pos][2] = value;
        else if (m.find_var(name)) w.states[(std::size_t)pos][name] = value;
    }
    return w;
}

StrategyAnalyzer::WinResult StrategyAnalyzer::is_winning(const Strategy& d,
                                                         const std::vector<std::size_t>& groups,
                                                         const std::vector<Formula>& goals) {
    Slot slot = d.owner == "B" ? Slot::B : Slot::A;
    check_total(d, groups);
    std::vector<Lit> sels = strategy_assumptions(slot, d);
    std::vector<Lit> goal_lits;
    for (const auto& g : goals) goal_lits.push_back(goal_lit(g));
    Lit conj = ws_.ctx->compiler().mk_and(goal_lits);

    WinResult res;
    for (std::size_t gi : groups) {
        std::vector<Lit> assumps = ws_.groups.at(gi).assumptions;
        assumps.insert(assumps.end(), sels.begin(), sels.end());
        assumps.push_back(-conj);
        SolveResult r = ws_.ctx->solver().solve(assumps);
        if (r.sat()) {
            res.winning = false;
            res.witness = decode_model(r.model);
            res.witness_group = gi;
            return res;
        }
    }
    return res;
}

StrategyAnalyzer::WinResult StrategyAnalyzer::is_winning(const JointStrategy& d,
                                                         const std::vector<std::size_t>& groups,
                                                         const std::vector<Formula>& goals) {
    check_total(d.a_part, groups);
    check_total(d.b_part, groups);
    std::vector<Lit> sels = strategy_assumptions(Slot::A, d.a_part);
    auto sels_b = strategy_assumptions(Slot::B, d.b_part);
    sels.insert(sels.end(), sels_b.begin(), sels_b.end());
    std::vector<Lit> goal_lits;
    for (const auto& g : goals) goal_lits.push_back(goal_lit(g));
    Lit conj = ws_.ctx->compiler().mk_and(goal_lits);

    WinResult res;
    for (std::size_t gi : groups) {
        std::vector<Lit> assumps = ws_.groups.at(gi).assumptions;
        assumps.insert(assumps.end(), sels.begin(), sels.end());
        assumps.push_back(-conj);
        SolveResult r = ws_.ctx->solver().solve(assumps);
        if (r.sat()) {
            res.winning = false;
            res.witness = decode_model(r.model);
            res.witness_group = gi;
            return res;
        }
    }
    return res;
}

std::uint64_t StrategyAnalyzer::count_strategies(Slot slot, const std::vector<std::size_t>& groups) {
    const auto& nodes = tree(groups);
    std::uint64_t actions = ws_.ctx->model().actions.of(slot).size();
    if (actions == 0) throw input_error("strategy: empty action set");
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (count > (1ull << 62) / actions)
            throw capacity_error("strategy: enumeration count overflows");
        count *= actions;
    }
    return count;
}

std::vector<Strategy> StrategyAnalyzer::enumerate_strategies(Slot slot,
                                                             const std::vector<std::size_t>& groups,
                                                             std::uint64_t bound) {
    const auto& nodes = tree(groups);
    auto acts = sorted_actions(slot);
    if (acts.empty()) throw input_error("strategy: empty action set");
    std::uint64_t total = count_strategies(slot, groups);
    if (total > bound)
        throw capacity_error("strategy: " + std::to_string(total) +
                             " strategies exceed the bound " + std::to_string(bound));
    std::string owner = slot == Slot::B ? "B" : (slot == Slot::A ? "A" : "Env");

    std::vector<Strategy> out;
    out.reserve((std::size_t)total);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        Strategy s;
        s.owner = owner;
        std::uint64_t rem = idx;
        // most-significant digit on the first node gives lexicographic order
        for (std::size_t ni = nodes.size(); ni-- > 0;) {
            s.decisions[{nodes[ni].step, nodes[ni].class_id}] = acts[rem % acts.size()];
            rem /= acts.size();
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<JointStrategy> StrategyAnalyzer::enumerate_joint_strategies(
    const std::vector<std::size_t>& groups, std::uint64_t bound) {
    const auto& nodes = tree(groups);
    auto acts_a = sorted_actions(Slot::A);
    auto acts_b = sorted_actions(Slot::B);
    if (acts_a.empty() || acts_b.empty()) throw input_error("strategy: empty action set");
    std::uint64_t per = (std::uint64_t)acts_a.size() * acts_b.size();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (total > (1ull << 62) / per) throw capacity_error("strategy: enumeration count overflows");
        total *= per;
        if (total > bound)
            throw capacity_error("strategy: joint enumeration exceeds the bound " +
                                 std::to_string(bound));
    }
    std::vector<JointStrategy> out;
    out.reserve((std::size_t)total);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        JointStrategy j;
        j.a_part.owner = "A";
        j.b_part.owner = "B";
        std::uint64_t rem = idx;
        for (std::size_t ni = nodes.size(); ni-- > 0;) {
            std::uint64_t digit = rem % per;
            rem /= per;
            j.a_part.decisions[{nodes[ni].step, nodes[ni].class_id}] =
                acts_a[(std::size_t)(digit / acts_b.size())];
            j.b_part.decisions[{nodes[ni].step, nodes[ni].class_id}] =
                acts_b[(std::size_t)(digit % acts_b.size())];
        }
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<std::set<std::string>> StrategyAnalyzer::winning_goal_bits(
    const GoalSet& gs, const std::vector<JointStrategy>& pool,
    const std::vector<std::size_t>& groups, int jobs) {
    // pre-register selectors and goal literals on the shared context
    std::vector<std::vector<Lit>> assumps(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        check_total(pool[i].a_part, groups);
        check_total(pool[i].b_part, groups);
        auto a = strategy_assumptions(Slot::A, pool[i].a_part);
        auto b = strategy_assumptions(Slot::B, pool[i].b_part);
        a.insert(a.end(), b.begin(), b.end());
        assumps[i] = std::move(a);
    }
    std::vector<Lit> goal_lits;
    for (const auto& [name, f] : gs.goals) goal_lits.push_back(goal_lit(f));
    ws_.ctx->solver(); // sync clauses

    std::vector<std::set<std::string>> bits(pool.size());
    auto work = [&](Solver& solver, std::size_t i) {
        for (std::size_t g = 0; g < gs.goals.size(); ++g) {
            bool wins = true;
            for (std::size_t gi : groups) {
                std::vector<Lit> as = ws_.groups.at(gi).assumptions;
                as.insert(as.end(), assumps[i].begin(), assumps[i].end());
                as.push_back(-goal_lits[g]);
                if (solver.solve(as).sat()) {
                    wins = false;
                    break;
                }
            }
            if (wins) bits[i].insert(gs.goals[g].first);
        }
    };

    if (jobs <= 1 || pool.size() < 2) {
        for (std::size_t i = 0; i < pool.size(); ++i) work(ws_.ctx->solver(), i);
    } else {
        // worker-local solvers over the same CNF; slot-indexed results make
        // the aggregation order-independent
        std::atomic<std::size_t> cursor{0};
        const CnfFormula cnf = ws_.ctx->pool().cnf();
        std::vector<std::thread> workers;
        int n = std::min<int>(jobs, (int)std::thread::hardware_concurrency());
        if (n < 1) n = 1;
        for (int w = 0; w < n; ++w) {
            workers.emplace_back([&]() {
                Solver local(cnf);
                for (;;) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= pool.size()) break;
                    work(local, i);
                }
            });
        }
        for (auto& t : workers) t.join();
    }
    return bits;
}

std::vector<StrategyAnalyzer::MaxAchievable> StrategyAnalyzer::max_achievable(
    const GoalSet& gs, const std::vector<JointStrategy>& pool,
    const std::vector<std::size_t>& groups, int jobs) {
    auto bits = winning_goal_bits(gs, pool, groups, jobs);

    // achievable subsets are exactly the downward closure of the bit sets
    auto names = gs.names();
    std::size_t n = names.size();
    std::vector<std::set<std::string>> achievable_subsets;
    std::vector<std::vector<std::size_t>> witnesses;
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
        std::set<std::string> subset;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1ull << i)) subset.insert(names[i]);
        std::vector<std::size_t> wits;
        for (std::size_t s = 0; s < pool.size(); ++s) {
            bool covered = std::includes(bits[s].begin(), bits[s].end(), subset.begin(),
                                         subset.end());
            if (covered) wits.push_back(s);
        }
        if (subset.empty() || !wits.empty()) {
            achievable_subsets.push_back(std::move(subset));
            witnesses.push_back(std::move(wits));
        }
    }

    int best = 0;
    for (const auto& s : achievable_subsets) best = std::max(best, gs.weight_of(s));
    std::vector<MaxAchievable> out;
    for (std::size_t i = 0; i < achievable_subsets.size(); ++i) {
        if (gs.weight_of(achievable_subsets[i]) != best) continue;
        MaxAchievable m;
        m.subset.assign(achievable_subsets[i].begin(), achievable_subsets[i].end());
        m.weight = best;
        m.witnesses = witnesses[i];
        out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end(),
              [](const MaxAchievable& a, const MaxAchievable& b) { return a.subset < b.subset; });
    return out;
}

} // namespace cfl
