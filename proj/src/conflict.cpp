#include "cfl/conflict.hpp"

#include "cfl/mus.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace cfl {

std::string level_name(ResolutionLevel l) { return "C" + std::to_string((int)l); }

namespace {

int log_level() {
    static int lvl = [] {
        const char* env = std::getenv("CONFLICTLENS_LOG");
        if (!env) return 0;
        std::string s(env);
        if (s == "debug") return 2;
        if (s == "info") return 1;
        return 0;
    }();
    return lvl;
}

template <class... Args> void log_info(const char* fmt, Args... args) {
    if (log_level() >= 1) {
        std::fprintf(stderr, "[conflictlens] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

std::string join(const std::vector<std::string>& xs, const char* sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
    return out;
}

} // namespace

//=================================================================================================
// ConflictAnalyzer

ConflictAnalyzer::ConflictAnalyzer(WorldModel m, InformationBase base, GoalSet goals_a,
                                   GoalSet believed_goals_b, CooperationData coop,
                                   std::vector<std::string> observables, AnalysisConfig cfg)
    : model_(std::move(m)),
      base_(std::move(base)),
      goals_a_(std::move(goals_a)),
      believed_b_(std::move(believed_goals_b)),
      coop_(std::move(coop)),
      observables_(std::move(observables)),
      cfg_(cfg) {
    if (cfg_.max_level < 1 || cfg_.max_level > 4)
        throw configuration_error("conflict: max level must lie in C1..C4");
    if (base_.evidence.vocab.vars.empty()) base_.evidence.vocab = model_.vocabulary();
    initial_evidence_ = base_.evidence;
}

GoalSet ConflictAnalyzer::effective_goals_b() const {
    GoalSet eff = believed_b_;
    int max_weight = 0;
    for (const auto& [k, w] : eff.weights) max_weight = std::max(max_weight, w);
    for (const auto& name : base_.adopted_goals) {
        if (eff.find_goal(name)) continue;
        const Formula* f = goals_a_.find_goal(name);
        if (!f) throw configuration_error("conflict: adopted goal '" + name + "' is not an A goal");
        eff.goals.push_back({name, *f});
    }
    eff.dominant = base_.adopted_goals;
    eff.dominant_bonus = max_weight + 1;
    return eff;
}

GoalSet ConflictAnalyzer::joint_goal_set() const {
    if (!coop_.joint_weights)
        throw configuration_error("conflict: negotiation requires a JOINT_WEIGHTS table");
    GoalSet joint;
    for (const auto& g : goals_a_.goals) joint.goals.push_back(g);
    for (const auto& g : believed_b_.goals)
        if (!joint.find_goal(g.first)) joint.goals.push_back(g);
    joint.weights = *coop_.joint_weights;
    for (const auto& [key, w] : joint.weights)
        for (const auto& name : key)
            if (!joint.find_goal(name))
                throw configuration_error("conflict: JOINT_WEIGHTS names unknown goal '" + name +
                                          "'");
    return joint;
}

std::vector<Formula> ConflictAnalyzer::goal_formulas(const GoalSet& gs,
                                                     const std::vector<std::string>& names) const {
    std::vector<Formula> out;
    for (const auto& n : names) {
        const Formula* f = gs.find_goal(n);
        if (!f) throw configuration_error("conflict: unknown goal '" + n + "'");
        out.push_back(*f);
    }
    return out;
}

ConflictAnalyzer::Round ConflictAnalyzer::build_round() {
    Round round;
    PossibleWorldSet ws = build_possible_worlds(base_.evidence, model_);
    // Shared strategy facts get selector literals so cores can name them.
    std::vector<Lit> fact_sels;
    for (const auto& [name, f] : base_.shared_strategy_facts) {
        Lit sel = ws.ctx->selector_for(f);
        fact_sels.push_back(sel);
        round.fact_names[sel] = name;
    }
    for (auto& g : ws.groups) {
        for (Lit s : fact_sels) g.assumptions.push_back(s);
        for (std::size_t i = 0; i + fact_sels.size() < g.assumptions.size(); ++i)
            round.fact_names.emplace(g.assumptions[i], g.evidence.atoms[i]);
    }
    // Facts may dismiss an entire group of worlds; drop groups that became empty.
    PossibleWorldSet kept;
    kept.ctx = ws.ctx;
    for (auto& g : ws.groups) {
        if (ws.ctx->solver().solve(g.assumptions).sat())
            kept.groups.push_back(std::move(g));
        else
            log_info("group %s dismissed by shared facts", g.evidence.id().c_str());
    }
    round.fact_selectors = fact_sels;
    round.analyzer = std::make_shared<StrategyAnalyzer>(std::move(kept), observables_);
    for (std::size_t i = 0; i < round.analyzer->worlds().groups.size(); ++i)
        round.groups.push_back(i);
    return round;
}

std::vector<std::string> ConflictAnalyzer::get_just(Round& round, const Strategy& d_a,
                                                    const Strategy& d_b, std::size_t group_index,
                                                    const std::vector<Formula>& joint_goals,
                                                    const RunWitness& witness) {
    StrategyAnalyzer& an = *round.analyzer;
    WorldContext& ctx = an.ctx();

    std::vector<Lit> assumptions = an.worlds().groups.at(group_index).assumptions;
    auto a_sels = an.strategy_assumptions(Slot::A, d_a);
    auto b_sels = an.strategy_assumptions(Slot::B, d_b);
    assumptions.insert(assumptions.end(), a_sels.begin(), a_sels.end());
    assumptions.insert(assumptions.end(), b_sels.begin(), b_sels.end());
    for (const auto& g : joint_goals) assumptions.push_back(an.goal_lit(g));
    // Pin the witness run: past valuations and the non-A action choices make
    // the compliant run unique, so asserting the goals is contradictory.
    for (int pos = 0; pos <= ctx.now(); ++pos)
        for (const auto& [var, val] : witness.states[(std::size_t)pos])
            assumptions.push_back(ctx.state_lit(var, val, pos));
    for (int step = 0; step < ctx.last(); ++step) {
        const auto& acts = witness.joint_actions[(std::size_t)step];
        if (step < ctx.now() && !acts[0].empty())
            assumptions.push_back(ctx.action_lit(Slot::A, acts[0], step));
        if (!acts[1].empty()) assumptions.push_back(ctx.action_lit(Slot::B, acts[1], step));
        if (!acts[2].empty()) assumptions.push_back(ctx.action_lit(Slot::Env, acts[2], step));
    }

    SolveResult r = ctx.solver().solve(assumptions);
    std::vector<std::string> labels;
    if (!r.sat()) {
        std::vector<Lit> minimal = minimize_core(ctx.solver(), r.core);
        bool model_member = false;
        for (Lit l : minimal) {
            auto it = round.fact_names.find(l);
            if (it != round.fact_names.end())
                labels.push_back(it->second);
            else
                model_member = true;
        }
        if (model_member || labels.empty()) labels.push_back("model");
    } else {
        // The pinned run satisfied the goals after all; attribute the failure
        // to the group's evidence as a whole.
        labels = an.worlds().groups.at(group_index).evidence.atoms;
        labels.push_back("model");
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

ConflictAnalyzer::Detection ConflictAnalyzer::run_detection(Round& round,
                                                            std::vector<ConflictCause>& causes_out,
                                                            int round_idx,
                                                            std::vector<std::string>* survivor_ids) {
    StrategyAnalyzer& an = *round.analyzer;
    Detection det;
    if (round.groups.empty()) {
        // no possible world left at all; treat as integrity failure
        throw model_integrity_error("conflict: information base admits no possible world");
    }

    auto pool = an.enumerate_joint_strategies(round.groups, cfg_.strategy_bound);
    auto maxres = an.max_achievable(goals_a_, pool, round.groups, cfg_.jobs);
    log_info("round %d: %zu groups, %zu joint candidates, %zu maximal A-goal sets", round_idx,
             round.groups.size(), pool.size(), maxres.size());

    bool any_nonempty = false;
    for (const auto& m : maxres) any_nonempty = any_nonempty || !m.subset.empty();
    if (!any_nonempty && !goals_a_.goals.empty()) {
        ConflictCause cause;
        cause.justification = {"model"};
        cause.a_strategy = "-";
        cause.b_strategy = "-";
        cause.goals_a = goals_a_.names();
        cause.group = "no cooperative winning strategy";
        cause.round = round_idx;
        causes_out.push_back(cause);
        det.conflict = true;
        return det;
    }

    // candidate A-parts per maximal subset, deduplicated
    std::vector<std::pair<Strategy, std::vector<std::string>>> candidates;
    std::set<std::string> seen;
    for (const auto& m : maxres) {
        for (std::size_t wi : m.witnesses) {
            const Strategy& a_part = pool[wi].a_part;
            std::string key = a_part.id() + "@" + join(m.subset, "&");
            if (!seen.insert(key).second) continue;
            candidates.push_back({a_part, m.subset});
        }
    }

    // per-group believed-maximal B strategies, computed once
    std::map<std::size_t, std::vector<std::pair<std::vector<std::string>, std::vector<Strategy>>>>
        b_analysis;
    GoalSet eff_b = effective_goals_b();
    for (std::size_t gi : round.groups) {
        auto pool_b = an.enumerate_joint_strategies({gi}, cfg_.strategy_bound);
        auto maxres_b = an.max_achievable(eff_b, pool_b, {gi}, cfg_.jobs);
        std::vector<std::pair<std::vector<std::string>, std::vector<Strategy>>> entries;
        for (const auto& mb : maxres_b) {
            std::vector<Strategy> parts;
            std::set<std::string> seen_b;
            for (std::size_t wi : mb.witnesses) {
                const Strategy& b_part = pool_b[wi].b_part;
                if (seen_b.insert(b_part.id()).second) parts.push_back(b_part);
            }
            entries.push_back({mb.subset, std::move(parts)});
        }
        b_analysis[gi] = std::move(entries);
    }

    std::set<std::string> survivors;
    std::vector<ConflictCause> local_causes;
    for (const auto& [a_part, subset] : candidates) {
        std::optional<ConflictCause> blocked;
        for (std::size_t gi : round.groups) {
            for (const auto& [b_subset, b_parts] : b_analysis[gi]) {
                for (const Strategy& b_part : b_parts) {
                    std::vector<std::string> joint_names = subset;
                    for (const auto& n : b_subset)
                        if (std::find(joint_names.begin(), joint_names.end(), n) ==
                            joint_names.end())
                            joint_names.push_back(n);
                    std::vector<Formula> goals;
                    for (const auto& n : joint_names) {
                        const Formula* f = goals_a_.find_goal(n);
                        if (!f) f = eff_b.find_goal(n);
                        if (!f) throw configuration_error("conflict: unknown goal '" + n + "'");
                        goals.push_back(*f);
                    }
                    JointStrategy joint{a_part, b_part};
                    auto win = an.is_winning(joint, {gi}, goals);
                    if (!win.winning) {
                        ConflictCause cause;
                        cause.justification =
                            get_just(round, a_part, b_part, gi, goals, *win.witness);
                        cause.a_strategy = a_part.id();
                        cause.b_strategy = b_part.id();
                        cause.goals_a = subset;
                        cause.goals_b = b_subset;
                        cause.group = an.worlds().groups.at(gi).evidence.id();
                        cause.round = round_idx;
                        blocked = std::move(cause);
                        break;
                    }
                }
                if (blocked) break;
            }
            if (blocked) break;
        }
        if (blocked)
            local_causes.push_back(std::move(*blocked));
        else
            survivors.insert(a_part.id());
    }

    det.conflict = survivors.empty();
    det.survivors.assign(survivors.begin(), survivors.end());
    if (det.conflict) {
        for (auto& c : local_causes) causes_out.push_back(std::move(c));
    }
    if (survivor_ids) *survivor_ids = det.survivors;
    log_info("round %d: %zu candidates, %zu survivors", round_idx, candidates.size(),
             det.survivors.size());
    return det;
}

ConflictAnalyzer::Detection ConflictAnalyzer::detect_conflict() {
    Round round = build_round();
    Detection det;
    std::vector<ConflictCause> causes;
    det = run_detection(round, causes, 0, nullptr);
    det.causes = std::move(causes);
    return det;
}

std::vector<std::string> ConflictAnalyzer::test_strategy(
    const Strategy& d_a, const std::vector<std::string>& goals_a_subset) {
    Round round = build_round();
    std::vector<ConflictCause> causes;
    StrategyAnalyzer& an = *round.analyzer;
    GoalSet eff_b = effective_goals_b();
    for (std::size_t gi : round.groups) {
        auto pool_b = an.enumerate_joint_strategies({gi}, cfg_.strategy_bound);
        auto maxres_b = an.max_achievable(eff_b, pool_b, {gi}, cfg_.jobs);
        for (const auto& mb : maxres_b) {
            std::set<std::string> seen_b;
            for (std::size_t wi : mb.witnesses) {
                const Strategy& b_part = pool_b[wi].b_part;
                if (!seen_b.insert(b_part.id()).second) continue;
                std::vector<std::string> joint_names = goals_a_subset;
                for (const auto& n : mb.subset)
                    if (std::find(joint_names.begin(), joint_names.end(), n) == joint_names.end())
                        joint_names.push_back(n);
                std::vector<Formula> goals;
                for (const auto& n : joint_names) {
                    const Formula* f = goals_a_.find_goal(n);
                    if (!f) f = eff_b.find_goal(n);
                    if (!f) throw configuration_error("conflict: unknown goal '" + n + "'");
                    goals.push_back(*f);
                }
                JointStrategy joint{d_a, b_part};
                auto win = an.is_winning(joint, {gi}, goals);
                if (!win.winning)
                    return get_just(round, d_a, b_part, gi, goals, *win.witness);
            }
        }
    }
    return {};
}

bool ConflictAnalyzer::fix(const std::vector<ConflictCause>& causes, ResolutionLevel level,
                           LevelDelta& delta) {
    delta.level = level;
    bool changed = false;
    switch (level) {
        case ResolutionLevel::C1: {
            for (const auto& cause : causes) {
                for (const auto& atom : cause.justification) {
                    int idx = base_.evidence.index_of(atom);
                    if (idx < 0) continue;
                    // contradicted within the base?
                    bool contradicted = false;
                    for (const auto& other : base_.evidence.items) {
                        if (other.atom == atom) continue;
                        if (!is_consistent(base_.evidence, {atom, other.atom}, model_.horizon)) {
                            contradicted = true;
                            break;
                        }
                    }
                    if (!contradicted) continue;
                    for (const auto& [name, fact] : coop_.b_knows) {
                        if (base_.applied.count("b_knows:" + name)) continue;
                        // replace only evidence the declared observation refutes
                        EvidenceBase probe;
                        probe.vocab = base_.evidence.vocab.vars.empty()
                                          ? model_.vocabulary()
                                          : base_.evidence.vocab;
                        probe.items.push_back(base_.evidence.items[(std::size_t)idx]);
                        probe.items.push_back({name, fact, "B_KNOWS"});
                        if (is_consistent(probe, {atom, name}, model_.horizon)) continue;
                        base_.evidence.items.erase(base_.evidence.items.begin() + idx);
                        base_.evidence.items.push_back({name, fact, "B_KNOWS"});
                        base_.applied.insert("b_knows:" + name);
                        base_.level_log.push_back("C1: replaced " + atom + " by " + name);
                        delta.removed.push_back(atom);
                        delta.added.push_back(name);
                        changed = true;
                        break;
                    }
                    if (changed) break;
                }
                if (changed) break;
            }
            // keep applying to further causes in the same pass
            if (changed) {
                LevelDelta more;
                if (fix(causes, level, more)) {
                    for (auto& a : more.added) delta.added.push_back(a);
                    for (auto& r : more.removed) delta.removed.push_back(r);
                }
            }
            break;
        }
        case ResolutionLevel::C2: {
            for (const auto& [name, f] : coop_.b_commits) {
                if (base_.applied.count("b_commits:" + name)) continue;
                base_.shared_strategy_facts.push_back({name, f});
                base_.applied.insert("b_commits:" + name);
                base_.level_log.push_back("C2: committed " + name);
                delta.added.push_back(name);
                changed = true;
            }
            break;
        }
        case ResolutionLevel::C3: {
            for (const auto& name : coop_.b_adopts) {
                if (base_.applied.count("b_adopts:" + name)) continue;
                if (!goals_a_.find_goal(name))
                    throw configuration_error("conflict: B_ADOPTS references unknown A goal '" +
                                              name + "'");
                base_.adopted_goals.push_back(name);
                base_.applied.insert("b_adopts:" + name);
                base_.level_log.push_back("C3: B adopted " + name);
                delta.added.push_back(name);
                changed = true;
            }
            break;
        }
        case ResolutionLevel::C4: {
            if (!coop_.joint_weights)
                throw configuration_error(
                    "conflict: resolution reached C4 but no JOINT_WEIGHTS table is declared");
            if (!base_.negotiated) {
                base_.negotiated = true;
                base_.level_log.push_back("C4: joint goal negotiation");
                delta.added.push_back("joint goal negotiation");
                changed = true;
            }
            break;
        }
    }
    return changed;
}

ConflictReport ConflictAnalyzer::find_strategy() {
    ConflictReport report;
    int round_idx = 0;
    for (;;) {
        Round round = build_round();
        report.base_sizes.push_back(base_.size());
        report.group_counts.push_back(round.groups.size());
        if (!report.trace.empty() && report.trace.back().group_count_after == 0)
            report.trace.back().group_count_after = round.groups.size();

        if (base_.negotiated) {
            StrategyAnalyzer& an = *round.analyzer;
            auto pool = an.enumerate_joint_strategies(round.groups, cfg_.strategy_bound);
            GoalSet joint = joint_goal_set();
            auto maxres = an.max_achievable(joint, pool, round.groups, cfg_.jobs);
            // maximal entries are sorted by subset; the first is the
            // lexicographic tie-break winner
            const auto& pick = maxres.front();
            log_info("negotiation: weight %d subset {%s}", pick.weight, join(pick.subset).c_str());
            if (pick.subset.empty() && pick.weight == 0 && !joint.goals.empty()) {
                report.verdict = ConflictReport::Verdict::Unresolved;
            } else {
                report.verdict = ConflictReport::Verdict::Resolved;
                report.level = ResolutionLevel::C4;
                report.negotiated_goals = pick.subset;
                std::set<std::string> ids;
                for (std::size_t wi : pick.witnesses) ids.insert(pool[wi].id());
                report.strategies.assign(ids.begin(), ids.end());
            }
            return report;
        }

        std::vector<ConflictCause> causes_round;
        Detection det = run_detection(round, causes_round, round_idx, nullptr);
        for (const auto& c : causes_round) report.causes.push_back(c);

        if (!det.conflict) {
            if (report.trace.empty()) {
                report.verdict = ConflictReport::Verdict::NoConflict;
            } else {
                report.verdict = ConflictReport::Verdict::Resolved;
                report.level = report.trace.back().level;
            }
            report.strategies = det.survivors;
            return report;
        }

        bool progressed = false;
        for (int lv = 1; lv <= cfg_.max_level; ++lv) {
            LevelDelta delta;
            if (fix(causes_round, (ResolutionLevel)lv, delta)) {
                delta.base_size_after = base_.size();
                delta.group_count_after = 0; // patched when the next round builds
                log_info("applied %s: +{%s} -{%s}", level_name((ResolutionLevel)lv).c_str(),
                         join(delta.added).c_str(), join(delta.removed).c_str());
                report.trace.push_back(std::move(delta));
                progressed = true;
                break;
            }
        }
        if (!progressed) {
            report.verdict = ConflictReport::Verdict::Unresolved;
            return report;
        }
        round_idx++;
    }
}

Explanation ConflictAnalyzer::explain(const ConflictReport& report) const {
    Explanation ex;
    ex.verdict = report.verdict;
    for (const auto& cause : report.causes) {
        Explanation::Entry e;
        e.cause = cause;
        for (const auto& atom : cause.justification) {
            if (initial_evidence_.index_of(atom) < 0) continue;
            for (const auto& other : initial_evidence_.items) {
                if (other.atom == atom) continue;
                if (!is_consistent(initial_evidence_, {atom, other.atom}, model_.horizon))
                    e.contradicts.push_back(other.atom);
            }
        }
        std::sort(e.contradicts.begin(), e.contradicts.end());
        e.contradicts.erase(std::unique(e.contradicts.begin(), e.contradicts.end()),
                            e.contradicts.end());
        if (report.verdict != ConflictReport::Verdict::Unresolved &&
            cause.round < (int)report.trace.size())
            e.discharged_at = report.trace[(std::size_t)cause.round].level;
        ex.entries.push_back(std::move(e));
    }
    return ex;
}

//=================================================================================================
// Serialization

static std::string verdict_name(ConflictReport::Verdict v) {
    switch (v) {
        case ConflictReport::Verdict::NoConflict: return "no-conflict";
        case ConflictReport::Verdict::Resolved: return "resolved";
        default: return "unresolved";
    }
}

nlohmann::ordered_json ConflictReport::to_json() const {
    nlohmann::ordered_json j;
    j["verdict"] = verdict_name(verdict);
    j["level"] = level ? nlohmann::ordered_json(level_name(*level)) : nlohmann::ordered_json();
    j["strategies"] = strategies;
    auto causes_j = nlohmann::ordered_json::array();
    for (const auto& c : causes) {
        nlohmann::ordered_json cj;
        cj["justification"] = c.justification;
        cj["goals_A"] = c.goals_a;
        cj["goals_B"] = c.goals_b;
        cj["group"] = c.group;
        cj["a_strategy"] = c.a_strategy;
        cj["b_strategy"] = c.b_strategy;
        causes_j.push_back(std::move(cj));
    }
    j["causes"] = std::move(causes_j);
    auto trace_j = nlohmann::ordered_json::array();
    for (const auto& t : trace) {
        nlohmann::ordered_json tj;
        tj["level"] = level_name(t.level);
        tj["added"] = t.added;
        tj["removed"] = t.removed;
        tj["base_size"] = t.base_size_after;
        tj["group_count"] = t.group_count_after;
        trace_j.push_back(std::move(tj));
    }
    j["trace"] = std::move(trace_j);
    j["negotiated_goals"] =
        negotiated_goals ? nlohmann::ordered_json(*negotiated_goals) : nlohmann::ordered_json();
    return j;
}

nlohmann::ordered_json Explanation::to_json() const {
    nlohmann::ordered_json j;
    j["verdict"] = verdict_name(verdict);
    auto entries_j = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json ej;
        ej["justification"] = e.cause.justification;
        ej["contradicts"] = e.contradicts;
        ej["goals_A"] = e.cause.goals_a;
        ej["goals_B"] = e.cause.goals_b;
        ej["group"] = e.cause.group;
        ej["a_strategy"] = e.cause.a_strategy;
        ej["b_strategy"] = e.cause.b_strategy;
        ej["discharged_at"] = e.discharged_at
                                  ? nlohmann::ordered_json(level_name(*e.discharged_at))
                                  : nlohmann::ordered_json();
        entries_j.push_back(std::move(ej));
    }
    j["causes"] = std::move(entries_j);
    return j;
}

std::string Explanation::to_text() const {
    std::string out = "verdict: " + verdict_name(verdict) + "\n";
    int i = 1;
    for (const auto& e : entries) {
        out += "cause " + std::to_string(i++) + " [group " + e.cause.group + "]\n";
        out += "  justification\n";
        for (const auto& atom : e.cause.justification) {
            out += "    " + atom;
            if (!e.contradicts.empty() && atom != "model")
                out += " (contradicts: " + join(e.contradicts) + ")";
            out += "\n";
        }
        out += "  blocking\n";
        out += "    A: " + e.cause.a_strategy + "\n";
        out += "    B: " + e.cause.b_strategy + "\n";
        out += "  goals\n";
        out += "    A: " + join(e.cause.goals_a) + "\n";
        out += "    B: " + join(e.cause.goals_b) + "\n";
        out += "  discharged: " +
               (e.discharged_at ? level_name(*e.discharged_at) : std::string("undischarged")) +
               "\n";
    }
    if (entries.empty()) out += "no causes\n";
    return out;
}

} // namespace cfl
