#include "cfl/world.hpp"

#include "cfl/mus.hpp"

#include <algorithm>
#include <set>

namespace cfl {

const StateVar* WorldModel::find_var(const std::string& name) const {
    for (const auto& v : vars)
        if (v.name == name) return &v;
    return nullptr;
}

Vocabulary WorldModel::vocabulary() const { return Vocabulary{vars}; }

Formula TransitionRule::effect_formula(const std::vector<StateVar>& vars) const {
    std::vector<Formula> parts;
    for (const auto& e : effects) {
        if (e.value) {
            parts.push_back(Formula::next(Formula::atom(Vocabulary::value_atom(e.var, *e.value))));
        } else {
            const StateVar* src = nullptr;
            for (const auto& v : vars)
                if (v.name == *e.src) src = &v;
            if (!src) throw input_error("effect: unknown source variable '" + *e.src + "'");
            std::vector<Formula> cases;
            for (std::size_t i = 0; i < src->values.size(); ++i) {
                int j = (int)i + e.delta;
                j = std::max(0, std::min(j, (int)src->values.size() - 1));
                cases.push_back(Formula::implies(
                    Formula::atom(Vocabulary::value_atom(*e.src, src->values[i])),
                    Formula::next(
                        Formula::atom(Vocabulary::value_atom(e.var, src->values[(std::size_t)j])))));
            }
            parts.push_back(Formula::and_all(cases));
        }
    }
    return Formula::and_all(parts);
}

//=================================================================================================
// Validation and the explicit integrity check

namespace {

bool has_past_operator(const Formula& f) {
    switch (f.op()) {
        case Op::Bottom:
        case Op::Atom: return false;
        case Op::Prev:
        case Op::Since: return true;
        case Op::Believes:
        case Op::Next: return has_past_operator(f.lhs());
        default: return has_past_operator(f.lhs()) || has_past_operator(f.rhs());
    }
}

struct ExplicitState {
    std::vector<int> value_idx; // per variable

    bool operator<(const ExplicitState& o) const { return value_idx < o.value_idx; }
};

struct ExplicitModel {
    const WorldModel& m;
    std::vector<std::map<std::string, int>> value_index; // per var: value -> idx

    explicit ExplicitModel(const WorldModel& model) : m(model) {
        for (const auto& v : m.vars) {
            std::map<std::string, int> idx;
            for (std::size_t i = 0; i < v.values.size(); ++i) idx[v.values[i]] = (int)i;
            value_index.push_back(std::move(idx));
        }
    }

    int var_index(const std::string& name) const {
        for (std::size_t i = 0; i < m.vars.size(); ++i)
            if (m.vars[i].name == name) return (int)i;
        throw input_error("world: unknown variable '" + name + "'");
    }

    Run to_run(const ExplicitState& s) const {
        Run r;
        std::set<std::string> st;
        for (std::size_t i = 0; i < m.vars.size(); ++i)
            st.insert(Vocabulary::value_atom(m.vars[i].name,
                                             m.vars[i].values[(std::size_t)s.value_idx[i]]));
        r.states.push_back(std::move(st));
        return r;
    }

    std::string describe(const ExplicitState& s) const {
        std::string out = "{";
        for (std::size_t i = 0; i < m.vars.size(); ++i) {
            if (i) out += ", ";
            out += m.vars[i].name + "=" + m.vars[i].values[(std::size_t)s.value_idx[i]];
        }
        return out + "}";
    }

    bool matches(const ExplicitState& s,
                 const std::vector<std::pair<std::string, std::string>>& obs) const {
        for (const auto& [var, val] : obs) {
            int vi = var_index(var);
            if (m.vars[(std::size_t)vi].values[(std::size_t)s.value_idx[(std::size_t)vi]] != val)
                return false;
        }
        return true;
    }

    std::vector<ExplicitState> all_states_matching(
        const std::vector<std::pair<std::string, std::string>>& obs) const {
        std::vector<ExplicitState> out;
        ExplicitState s;
        s.value_idx.assign(m.vars.size(), 0);
        while (true) {
            if (matches(s, obs)) out.push_back(s);
            std::size_t i = 0;
            for (; i < m.vars.size(); ++i) {
                if (++s.value_idx[i] < (int)m.vars[i].values.size()) break;
                s.value_idx[i] = 0;
            }
            if (i == m.vars.size()) break;
        }
        return out;
    }

    bool pattern_matches(const JointActionPattern& pat, const std::string& a, const std::string& b,
                         const std::string& e) const {
        return (pat.a == "*" || pat.a == a) && (pat.b == "*" || pat.b == b) &&
               (pat.env == "*" || pat.env == e);
    }

    // Deterministic successor; nullopt when applicable effects conflict.
    std::optional<ExplicitState> apply(const ExplicitState& s, const std::string& a,
                                       const std::string& b, const std::string& e) const {
        Run here = to_run(s);
        std::vector<std::pair<int, int>> assign; // (var idx, value idx)
        for (const auto& rule : m.rules) {
            if (!pattern_matches(rule.actions, a, b, e)) continue;
            if (!eval(rule.guard, here, 0)) continue;
            for (const auto& eff : rule.effects) {
                int vi = var_index(eff.var);
                int target;
                if (eff.value) {
                    auto it = value_index[(std::size_t)vi].find(*eff.value);
                    if (it == value_index[(std::size_t)vi].end())
                        throw input_error("effect: value '" + *eff.value + "' not in domain of '" +
                                          eff.var + "'");
                    target = it->second;
                } else {
                    int si = var_index(*eff.src);
                    int j = s.value_idx[(std::size_t)si] + eff.delta;
                    j = std::max(0, std::min(j, (int)m.vars[(std::size_t)si].values.size() - 1));
                    const std::string& val = m.vars[(std::size_t)si].values[(std::size_t)j];
                    auto it = value_index[(std::size_t)vi].find(val);
                    if (it == value_index[(std::size_t)vi].end())
                        return std::nullopt; // shifted value outside target domain
                    target = it->second;
                }
                assign.push_back({vi, target});
            }
        }
        ExplicitState next = s;
        std::vector<char> assigned(m.vars.size(), 0);
        for (auto [vi, val] : assign) {
            if (assigned[(std::size_t)vi] && next.value_idx[(std::size_t)vi] != val)
                return std::nullopt; // conflicting effects
            next.value_idx[(std::size_t)vi] = val;
            assigned[(std::size_t)vi] = 1;
        }
        return next;
    }
};

void validate_model(const WorldModel& m) {
    if (m.vars.empty()) throw input_error("world: no state variables declared");
    if (m.horizon < 1) throw precondition_error("world: horizon must be >= 1");
    if (m.observations.empty())
        throw input_error("world: observations must cover at least the current state");
    std::set<std::string> var_names;
    for (const auto& v : m.vars) {
        if (v.values.empty()) throw input_error("world: empty domain for '" + v.name + "'");
        std::set<std::string> vals(v.values.begin(), v.values.end());
        if (vals.size() != v.values.size())
            throw input_error("world: duplicate values in domain of '" + v.name + "'");
        if (!var_names.insert(v.name).second)
            throw input_error("world: duplicate variable '" + v.name + "'");
    }
    std::set<std::string> all_actions;
    for (Slot s : {Slot::A, Slot::B, Slot::Env}) {
        if (m.actions.of(s).empty())
            throw input_error(std::string("world: empty action set for slot ") + slot_name(s));
        for (const auto& a : m.actions.of(s))
            if (!all_actions.insert(a).second)
                throw input_error("world: action '" + a + "' appears in two alphabets");
    }
    for (const auto& rule : m.rules) {
        if (!rule.guard.valid()) throw input_error("world: rule with empty guard formula");
        if (rule.guard.contains_believes() || rule.guard.future_depth() != 0 ||
            has_past_operator(rule.guard))
            throw model_integrity_error("world: guards must be state predicates");
        auto check_pat = [&](const std::string& p, Slot s) {
            const auto& acts = m.actions.of(s);
            if (p != "*" && std::find(acts.begin(), acts.end(), p) == acts.end())
                throw input_error("world: rule pattern action '" + p + "' not declared for " +
                                  slot_name(s));
        };
        check_pat(rule.actions.a, Slot::A);
        check_pat(rule.actions.b, Slot::B);
        check_pat(rule.actions.env, Slot::Env);
        for (const auto& eff : rule.effects) {
            if (!m.find_var(eff.var))
                throw input_error("world: effect assigns unknown variable '" + eff.var + "'");
            if (!eff.value == !eff.src)
                throw input_error("world: effect needs exactly one of value or source");
            if (eff.src && !m.find_var(*eff.src))
                throw input_error("world: effect reads unknown variable '" + *eff.src + "'");
        }
    }
}

// Every (state, joint action) pair reachable while extending the observed
// history must have a successor.
void check_integrity(const WorldModel& m, int steps) {
    ExplicitModel em(m);
    std::set<ExplicitState> frontier;
    for (auto& s : em.all_states_matching(m.observations[0])) frontier.insert(s);
    for (int pos = 0; pos < steps; ++pos) {
        std::set<ExplicitState> next;
        for (const auto& s : frontier) {
            for (const auto& a : m.actions.a)
                for (const auto& b : m.actions.b)
                    for (const auto& e : m.actions.env) {
                        auto succ = em.apply(s, a, b, e);
                        if (!succ)
                            throw model_integrity_error(
                                "world: transition rules give no successor for state " +
                                em.describe(s) + " under (" + a + ", " + b + ", " + e + ")");
                        if (pos + 1 <= m.now_pos() &&
                            !em.matches(*succ, m.observations[(std::size_t)pos + 1]))
                            continue;
                        next.insert(*succ);
                    }
        }
        frontier = std::move(next);
    }
}

} // namespace

//=================================================================================================
// WorldContext

WorldContext::WorldContext(const WorldModel& m) : model_(m), cc_(pool_, m.last_pos()) {
    validate_model(model_);
    check_integrity(model_, model_.last_pos());

    int last = model_.last_pos();
    for (const auto& v : model_.vars) {
        for (int t = 0; t <= last; ++t) {
            std::vector<Lit> lits;
            for (const auto& val : v.values)
                lits.push_back(pool_.named_var(Vocabulary::value_atom(v.name, val), t));
            pool_.add_clause(lits);
            for (std::size_t i = 0; i < lits.size(); ++i)
                for (std::size_t j = i + 1; j < lits.size(); ++j)
                    pool_.add_clause({-lits[i], -lits[j]});
        }
    }
    // action one-hots for steps 0..last-1; the copies at the final position
    // are forced false so clamped references read "no action there"
    for (Slot s : {Slot::A, Slot::B, Slot::Env}) {
        for (int t = 0; t <= last; ++t) {
            std::vector<Lit> lits;
            for (const auto& a : model_.actions.of(s))
                lits.push_back(pool_.named_var(Vocabulary::value_atom(slot_name(s), a), t));
            if (t < last) {
                pool_.add_clause(lits);
                for (std::size_t i = 0; i < lits.size(); ++i)
                    for (std::size_t j = i + 1; j < lits.size(); ++j)
                        pool_.add_clause({-lits[i], -lits[j]});
            } else {
                for (Lit l : lits) pool_.add_clause({-l});
            }
        }
    }
    for (int t = 0; t < last; ++t) {
        std::vector<Lit> triggers(model_.rules.size());
        for (std::size_t ri = 0; ri < model_.rules.size(); ++ri) {
            const auto& rule = model_.rules[ri];
            std::vector<Lit> conj;
            if (rule.actions.a != "*") conj.push_back(action_lit(Slot::A, rule.actions.a, t));
            if (rule.actions.b != "*") conj.push_back(action_lit(Slot::B, rule.actions.b, t));
            if (rule.actions.env != "*") conj.push_back(action_lit(Slot::Env, rule.actions.env, t));
            conj.push_back(cc_.compile(rule.guard, t));
            Lit trig = cc_.mk_and(conj);
            triggers[ri] = trig;
            for (const auto& eff : rule.effects) {
                const StateVar* var = model_.find_var(eff.var);
                if (eff.value) {
                    pool_.add_clause({-trig, state_lit(eff.var, *eff.value, t + 1)});
                } else {
                    const StateVar* src = model_.find_var(*eff.src);
                    for (std::size_t i = 0; i < src->values.size(); ++i) {
                        int j = (int)i + eff.delta;
                        j = std::max(0, std::min(j, (int)src->values.size() - 1));
                        const std::string& target = src->values[(std::size_t)j];
                        if (std::find(var->values.begin(), var->values.end(), target) ==
                            var->values.end())
                            continue; // integrity check rejects runs reaching this case
                        pool_.add_clause({-trig, -state_lit(*eff.src, src->values[i], t),
                                          state_lit(eff.var, target, t + 1)});
                    }
                }
            }
        }
        // frame: a variable keeps its value unless a rule assigning it fires
        for (const auto& v : model_.vars) {
            std::vector<Lit> writers;
            for (std::size_t ri = 0; ri < model_.rules.size(); ++ri)
                for (const auto& eff : model_.rules[ri].effects)
                    if (eff.var == v.name) {
                        writers.push_back(triggers[ri]);
                        break;
                    }
            for (const auto& val : v.values) {
                std::vector<Lit> clause = writers;
                clause.push_back(-state_lit(v.name, val, t));
                clause.push_back(state_lit(v.name, val, t + 1));
                pool_.add_clause(clause);
            }
        }
    }
    for (std::size_t pos = 0; pos < model_.observations.size(); ++pos)
        for (const auto& [var, val] : model_.observations[pos])
            pool_.add_clause({state_lit(var, val, (int)pos)});
}

Lit WorldContext::state_lit(const std::string& var, const std::string& value, int pos) {
    const StateVar* v = model_.find_var(var);
    if (!v) throw input_error("world: unknown variable '" + var + "'");
    if (std::find(v->values.begin(), v->values.end(), value) == v->values.end())
        throw input_error("world: value '" + value + "' not in domain of '" + var + "'");
    return pool_.named_var(Vocabulary::value_atom(var, value), pos);
}

Lit WorldContext::action_lit(Slot slot, const std::string& action, int step_pos) {
    const auto& acts = model_.actions.of(slot);
    if (std::find(acts.begin(), acts.end(), action) == acts.end())
        throw input_error(std::string("world: unknown action '") + action + "' for " +
                          slot_name(slot));
    return pool_.named_var(Vocabulary::value_atom(slot_name(slot), action), step_pos);
}

Lit WorldContext::selector_for(const Formula& f) {
    Lit body = cc_.compile(f, now());
    Lit sel = pool_.aux_var();
    pool_.add_clause({-sel, body});
    return sel;
}

void WorldContext::assert_now(const Formula& f) { pool_.add_clause({cc_.compile(f, now())}); }

Solver& WorldContext::solver() {
    solver_.ensure_vars(pool_.cnf().num_vars);
    const auto& clauses = pool_.cnf().clauses;
    while (clauses_loaded_ < clauses.size()) {
        solver_.add_clause(clauses[clauses_loaded_]);
        clauses_loaded_++;
    }
    return solver_;
}

std::vector<int> WorldContext::state_projection(int from, int to) const {
    std::vector<int> proj;
    for (const auto& v : model_.vars)
        for (const auto& val : v.values)
            for (int t = from; t <= to; ++t) {
                auto it = pool_.named().find({Vocabulary::value_atom(v.name, val), t});
                if (it != pool_.named().end()) proj.push_back(it->second);
            }
    return proj;
}

std::vector<std::map<int, bool>> WorldContext::enumerate(const std::vector<int>& projection,
                                                         const std::vector<Lit>& assumptions,
                                                         std::size_t limit) const {
    CnfFormula f = pool_.cnf();
    for (Lit a : assumptions) f.add_clause({a});
    return enumerate_models(f, projection, limit);
}

//=================================================================================================
// Spec surface

UnrollResult unroll(const WorldModel& m, int horizon) {
    WorldModel copy = m;
    copy.horizon = horizon;
    WorldContext ctx(copy);
    UnrollResult res;
    res.cnf = ctx.pool().cnf();
    res.vars = ctx.pool().named();
    return res;
}

CnfFormula PossibleWorldSet::world_constraint(std::size_t group_index) const {
    CnfFormula f = ctx->pool().cnf();
    for (Lit a : groups.at(group_index).assumptions) f.add_clause({a});
    return f;
}

PossibleWorldSet build_possible_worlds(const EvidenceBase& base, const WorldModel& m) {
    EvidenceBase grouped = base;
    if (grouped.vocab.vars.empty()) grouped.vocab = m.vocabulary();

    PossibleWorldSet ws;
    ws.ctx = std::make_shared<WorldContext>(m);

    auto groups = max_consistent_groups(grouped, m.horizon);
    std::map<std::string, Lit> selector;
    for (const auto& item : grouped.items) selector[item.atom] = ws.ctx->selector_for(item.body);

    for (const auto& g : groups) {
        PossibleWorldSet::Group wg;
        wg.evidence = g;
        for (const auto& atom : g.atoms) wg.assumptions.push_back(selector.at(atom));
        SolveResult r = ws.ctx->solver().solve(wg.assumptions);
        if (!r.sat()) {
            std::vector<std::string> core_atoms;
            for (Lit c : r.core)
                for (const auto& [atom, sel] : selector)
                    if (sel == c) core_atoms.push_back(atom);
            std::sort(core_atoms.begin(), core_atoms.end());
            std::string msg = "world: evidence group " + g.id() +
                              " is incompatible with the world dynamics; core: {";
            for (std::size_t i = 0; i < core_atoms.size(); ++i) msg += (i ? "," : "") + core_atoms[i];
            msg += "}";
            throw evidence_incompatible_error(msg, core_atoms);
        }
        ws.groups.push_back(std::move(wg));
    }
    return ws;
}

std::vector<History> histories(const PossibleWorldSet& ws) {
    std::set<History> seen;
    WorldContext& ctx = *ws.ctx;
    std::vector<int> proj = ctx.state_projection(0, ctx.now());
    std::map<int, std::pair<std::string, int>> rev;
    for (const auto& [key, var] : ctx.pool().named()) rev[var] = key;

    for (const auto& g : ws.groups) {
        auto models = ctx.enumerate(proj, g.assumptions, 1u << 16);
        for (const auto& m : models) {
            History h((std::size_t)ctx.now() + 1);
            for (const auto& [var, val] : m) {
                if (!val) continue;
                const auto& [atom, pos] = rev.at(var);
                auto eq = atom.find('=');
                h[(std::size_t)pos][atom.substr(0, eq)] = atom.substr(eq + 1);
            }
            seen.insert(std::move(h));
        }
    }
    return std::vector<History>(seen.begin(), seen.end());
}

} // namespace cfl
