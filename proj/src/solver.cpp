#include "cfl/solver.hpp"

#include <algorithm>
#include <cassert>

namespace cfl {

//=================================================================================================
// Construction

Solver::Solver() = default;

Solver::Solver(const CnfFormula& f) { load(f); }

void Solver::load(const CnfFormula& f) {
    ensure_vars(f.num_vars);
    for (const auto& c : f.clauses)
        if (!add_clause(c)) return;
}

int Solver::new_var() {
    int v = n_vars_++;
    watches_.emplace_back();
    watches_.emplace_back();
    assigns_.push_back(v_undef);
    polarity_.push_back(1); // branch negative first
    reason_.push_back(CRefUndef);
    level_.push_back(0);
    activity_.push_back(0.0);
    heap_pos_.push_back(-1);
    seen_.push_back(0);
    heap_insert(v);
    return v + 1;
}

void Solver::ensure_vars(int n) {
    while (n_vars_ < n) new_var();
}

bool Solver::add_clause(const std::vector<Lit>& lits) {
    assert(decision_level() == 0);
    if (!ok_) return false;
    std::vector<ILit> c;
    c.reserve(lits.size());
    for (Lit l : lits) {
        if (l == 0 || var_of(l) > n_vars_) throw input_error("solver: malformed literal");
        c.push_back(to_internal(l));
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    // Drop false literals, detect tautologies and satisfied clauses.
    std::vector<ILit> out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i + 1 < c.size() && c[i + 1] == neg(c[i])) return true; // tautology
        if (value(c[i]) == v_true) return true;
        if (value(c[i]) != v_false) out.push_back(c[i]);
    }
    if (out.empty()) {
        ok_ = false;
        return false;
    }
    if (out.size() == 1) {
        unchecked_enqueue(out[0], CRefUndef);
        ok_ = (propagate() == CRefUndef);
        return ok_;
    }
    int cref = (int)clauses_.size();
    clauses_.push_back(Clause{std::move(out), 0.0, false});
    attach_clause(cref);
    return true;
}

void Solver::attach_clause(int cref) {
    const Clause& c = clauses_[cref];
    assert(c.lits.size() >= 2);
    watches_[neg(c.lits[0])].push_back({cref, c.lits[1]});
    watches_[neg(c.lits[1])].push_back({cref, c.lits[0]});
}

//=================================================================================================
// Assignment & propagation

void Solver::unchecked_enqueue(ILit p, int reason_cref) {
    assert(value(p) == v_undef);
    int v = ivar(p);
    assigns_[v] = std::int8_t(p & 1);
    reason_[v] = reason_cref;
    level_[v] = decision_level();
    trail_.push_back(p);
}

int Solver::propagate() {
    int confl = CRefUndef;
    while (qhead_ < (int)trail_.size()) {
        ILit p = trail_[qhead_++];
        propagations_++;
        std::vector<Watcher>& ws = watches_[p];
        std::size_t i = 0, j = 0;
        while (i < ws.size()) {
            Watcher w = ws[i];
            if (value(w.blocker) == v_true) {
                ws[j++] = ws[i++];
                continue;
            }
            Clause& c = clauses_[w.cref];
            ILit false_lit = neg(p);
            if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
            assert(c.lits[1] == false_lit);
            i++;
            ILit first = c.lits[0];
            if (first != w.blocker && value(first) == v_true) {
                ws[j++] = {w.cref, first};
                continue;
            }
            bool moved = false;
            for (std::size_t k = 2; k < c.lits.size(); ++k) {
                if (value(c.lits[k]) != v_false) {
                    std::swap(c.lits[1], c.lits[k]);
                    watches_[neg(c.lits[1])].push_back({w.cref, first});
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            // unit or conflicting
            ws[j++] = {w.cref, first};
            if (value(first) == v_false) {
                confl = w.cref;
                qhead_ = (int)trail_.size();
                while (i < ws.size()) ws[j++] = ws[i++];
            } else {
                unchecked_enqueue(first, w.cref);
            }
        }
        ws.resize(j);
        if (confl != CRefUndef) break;
    }
    return confl;
}

void Solver::cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (int i = (int)trail_.size() - 1; i >= trail_lim_[lvl]; --i) {
        int v = ivar(trail_[i]);
        polarity_[v] = std::int8_t(trail_[i] & 1);
        assigns_[v] = v_undef;
        reason_[v] = CRefUndef;
        if (heap_pos_[v] < 0) heap_insert(v);
    }
    trail_.resize(trail_lim_[lvl]);
    trail_lim_.resize(lvl);
    qhead_ = (int)trail_.size();
}

//=================================================================================================
// Conflict analysis (first UIP)

void Solver::analyze(int confl, std::vector<ILit>& out_learnt, int& out_btlevel) {
    int path_c = 0;
    ILit p = -1;
    out_learnt.clear();
    out_learnt.push_back(-1); // placeholder for the asserting literal
    int index = (int)trail_.size() - 1;

    do {
        assert(confl != CRefUndef);
        Clause& c = clauses_[confl];
        if (c.learnt) cla_bump(c);
        for (std::size_t k = (p == -1 ? 0 : 1); k < c.lits.size(); ++k) {
            ILit q = c.lits[k];
            int v = ivar(q);
            if (!seen_[v] && level_[v] > 0) {
                var_bump(v);
                seen_[v] = 1;
                if (level_[v] >= decision_level())
                    path_c++;
                else
                    out_learnt.push_back(q);
            }
        }
        while (!seen_[ivar(trail_[index--])]) {}
        p = trail_[index + 1];
        confl = reason_[ivar(p)];
        seen_[ivar(p)] = 0;
        path_c--;
    } while (path_c > 0);
    out_learnt[0] = neg(p);

    // Basic minimization: drop literals whose reason is fully covered.
    std::size_t j = 1;
    for (std::size_t i = 1; i < out_learnt.size(); ++i) {
        if (reason_[ivar(out_learnt[i])] == CRefUndef || !lit_redundant(out_learnt[i]))
            out_learnt[j++] = out_learnt[i];
    }
    out_learnt.resize(j);

    out_btlevel = 0;
    if (out_learnt.size() > 1) {
        std::size_t max_i = 1;
        for (std::size_t i = 2; i < out_learnt.size(); ++i)
            if (level_[ivar(out_learnt[i])] > level_[ivar(out_learnt[max_i])]) max_i = i;
        std::swap(out_learnt[1], out_learnt[max_i]);
        out_btlevel = level_[ivar(out_learnt[1])];
    }

    // Every marked variable sits on the trail; one sweep clears them all.
    for (std::size_t i = 0; i < trail_.size(); ++i) seen_[ivar(trail_[i])] = 0;
}

bool Solver::lit_redundant(ILit p) const {
    const Clause& c = clauses_[reason_[ivar(p)]];
    for (std::size_t k = 1; k < c.lits.size(); ++k) {
        int v = ivar(c.lits[k]);
        if (!seen_[v] && level_[v] > 0) return false;
    }
    return true;
}

void Solver::analyze_final(ILit p, std::vector<ILit>& out_core) {
    out_core.clear();
    out_core.push_back(p);
    if (decision_level() == 0) return;
    seen_[ivar(p)] = 1;
    for (int i = (int)trail_.size() - 1; i >= trail_lim_[0]; --i) {
        int v = ivar(trail_[i]);
        if (!seen_[v]) continue;
        if (reason_[v] == CRefUndef) {
            assert(level_[v] > 0);
            out_core.push_back(neg(trail_[i]));
        } else {
            const Clause& c = clauses_[reason_[v]];
            for (std::size_t k = 1; k < c.lits.size(); ++k)
                if (level_[ivar(c.lits[k])] > 0) seen_[ivar(c.lits[k])] = 1;
        }
        seen_[v] = 0;
    }
    seen_[ivar(p)] = 0;
}

//=================================================================================================
// Activities & heap

void Solver::var_bump(int v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
        for (int x = 0; x < n_vars_; ++x) activity_[x] *= 1e-100;
        var_inc_ *= 1e-100;
    }
    if (heap_pos_[v] >= 0) heap_percolate_up(heap_pos_[v]);
}

void Solver::var_decay() { var_inc_ *= (1.0 / 0.95); }

void Solver::cla_bump(Clause& c) {
    c.act += cla_inc_;
    if (c.act > 1e20) {
        for (int ref : learnt_refs_) clauses_[ref].act *= 1e-20;
        cla_inc_ *= 1e-20;
    }
}

void Solver::cla_decay() { cla_inc_ *= (1.0 / 0.999); }

// Max-heap on (activity, then lower var index) so branching is deterministic.
static bool heap_before(const std::vector<double>& act, int a, int b) {
    return act[a] > act[b] || (act[a] == act[b] && a < b);
}

void Solver::heap_insert(int v) {
    heap_pos_[v] = (int)heap_.size();
    heap_.push_back(v);
    heap_percolate_up(heap_pos_[v]);
}

void Solver::heap_percolate_up(int i) {
    int v = heap_[i];
    while (i > 0) {
        int parent = (i - 1) >> 1;
        if (!heap_before(activity_, v, heap_[parent])) break;
        heap_[i] = heap_[parent];
        heap_pos_[heap_[i]] = i;
        i = parent;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
}

void Solver::heap_percolate_down(int i) {
    int v = heap_[i];
    std::size_t n = heap_.size();
    while (true) {
        std::size_t l = 2 * (std::size_t)i + 1, r = l + 1;
        if (l >= n) break;
        std::size_t best = (r < n && heap_before(activity_, heap_[r], heap_[l])) ? r : l;
        if (!heap_before(activity_, heap_[best], v)) break;
        heap_[i] = heap_[best];
        heap_pos_[heap_[i]] = i;
        i = (int)best;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
}

int Solver::heap_pop() {
    int v = heap_[0];
    heap_pos_[v] = -1;
    heap_[0] = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_pos_[heap_[0]] = 0;
        heap_percolate_down(0);
    }
    return v;
}

void Solver::heap_update(int v) {
    if (heap_pos_[v] >= 0) {
        heap_percolate_up(heap_pos_[v]);
        heap_percolate_down(heap_pos_[v]);
    }
}

Solver::ILit Solver::pick_branch_lit() {
    while (!heap_.empty()) {
        int v = heap_[0];
        if (assigns_[v] == v_undef) {
            heap_pop();
            return 2 * v + (polarity_[v] & 1);
        }
        heap_pop();
    }
    return -1;
}

//=================================================================================================
// Learnt-clause reduction

void Solver::reduce_db() {
    assert(decision_level() == 0);
    if (learnt_refs_.size() < max_learnts_) return;
    std::vector<int> keep;
    std::vector<int> sorted = learnt_refs_;
    std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        const Clause& ca = clauses_[a];
        const Clause& cb = clauses_[b];
        if (ca.act != cb.act) return ca.act > cb.act;
        return a < b;
    });
    std::size_t limit = sorted.size() / 2;
    std::vector<char> drop(clauses_.size(), 0);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const Clause& c = clauses_[sorted[i]];
        if (i >= limit && c.lits.size() > 2)
            drop[sorted[i]] = 1;
    }
    // Compact the arena and remap references.
    std::vector<Clause> next;
    std::vector<int> remap(clauses_.size(), -1);
    next.reserve(clauses_.size());
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
        if (drop[i]) continue;
        remap[i] = (int)next.size();
        next.push_back(std::move(clauses_[i]));
    }
    clauses_ = std::move(next);
    learnt_refs_.clear();
    for (std::size_t i = 0; i < clauses_.size(); ++i)
        if (clauses_[i].learnt) learnt_refs_.push_back((int)i);
    for (int v = 0; v < n_vars_; ++v)
        reason_[v] = (reason_[v] == CRefUndef) ? CRefUndef : remap[reason_[v]];
    max_learnts_ += max_learnts_ / 2;
    rebuild_watches();
}

void Solver::rebuild_watches() {
    for (auto& w : watches_) w.clear();
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
        Clause& c = clauses_[i];
        // Keep watched slots on non-false literals where possible (level 0 here).
        std::size_t found = 0;
        for (std::size_t k = 0; k < c.lits.size() && found < 2; ++k) {
            if (value(c.lits[k]) != v_false) std::swap(c.lits[found++], c.lits[k]);
        }
        attach_clause((int)i);
    }
}

//=================================================================================================
// Search

static std::int64_t luby(std::int64_t x) {
    // Finite-subsequence trick from the classic restart sequence.
    std::int64_t size = 1, seq = 0;
    while (size < x + 1) {
        seq++;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        seq--;
        x = x % size;
    }
    return std::int64_t(1) << seq;
}

int Solver::search(std::int64_t conflict_budget, const std::vector<ILit>& assumptions,
                   std::vector<ILit>& out_core) {
    std::int64_t confl_count = 0;
    std::vector<ILit> learnt;
    while (true) {
        int confl = propagate();
        if (confl != CRefUndef) {
            conflicts_++;
            confl_count++;
            if (decision_level() == 0) {
                ok_ = false;
                out_core.clear();
                return 1;
            }
            int btlevel = 0;
            analyze(confl, learnt, btlevel);
            cancel_until(btlevel);
            if (learnt.size() == 1) {
                unchecked_enqueue(learnt[0], CRefUndef);
            } else {
                int cref = (int)clauses_.size();
                clauses_.push_back(Clause{learnt, cla_inc_, true});
                learnt_refs_.push_back(cref);
                attach_clause(cref);
                unchecked_enqueue(learnt[0], cref);
            }
            var_decay();
            cla_decay();
        } else {
            if (conflict_budget >= 0 && confl_count >= conflict_budget) {
                cancel_until(0);
                return 2;
            }
            if (decision_level() == 0) reduce_db();
            ILit next = -1;
            while (decision_level() < (int)assumptions.size()) {
                ILit p = assumptions[decision_level()];
                if (value(p) == v_true) {
                    new_decision_level();
                } else if (value(p) == v_false) {
                    analyze_final(neg(p), out_core);
                    return 1;
                } else {
                    next = p;
                    break;
                }
            }
            if (next == -1) {
                next = pick_branch_lit();
                if (next == -1) return 0; // all variables assigned
                decisions_++;
            }
            new_decision_level();
            unchecked_enqueue(next, CRefUndef);
        }
    }
}

SolveResult Solver::solve(const std::vector<Lit>& assumptions) {
    SolveResult res;
    if (!ok_) {
        res.status = SolveResult::Status::Unsat;
        return res;
    }
    std::vector<ILit> assumps;
    assumps.reserve(assumptions.size());
    for (Lit l : assumptions) {
        if (l == 0 || var_of(l) > n_vars_) throw input_error("solver: malformed assumption literal");
        assumps.push_back(to_internal(l));
    }
    std::vector<ILit> core;
    int status;
    int restarts = 0;
    for (;;) {
        std::int64_t budget = luby(restarts) * 100;
        status = search(budget, assumps, core);
        if (status != 2) break;
        restarts++;
    }
    if (status == 0) {
        res.status = SolveResult::Status::Sat;
        res.model.assign((std::size_t)n_vars_ + 1, false);
        for (int v = 0; v < n_vars_; ++v)
            res.model[(std::size_t)v + 1] = (assigns_[v] == v_true);
    } else {
        res.status = SolveResult::Status::Unsat;
        res.core.clear();
        for (ILit l : core) res.core.push_back(to_external(neg(l)));
        std::sort(res.core.begin(), res.core.end());
        res.core.erase(std::unique(res.core.begin(), res.core.end()), res.core.end());
    }
    cancel_until(0);
    return res;
}

} // namespace cfl
