// Test-side oracles, kept independent of the implementation paths they check:
// brute-force SAT by enumeration, and a direct recursive-definition evaluator
// for the temporal language with explicit quantifier scans.
#ifndef CFL_TESTS_ORACLES_HPP
#define CFL_TESTS_ORACLES_HPP

#include "cfl/cnf.hpp"
#include "cfl/formula.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracles {

struct XorShift {
    std::uint64_t s;
    explicit XorShift(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
    // uniform in [0, n)
    std::uint64_t below(std::uint64_t n) { return next() % n; }
    bool coin() { return next() & 1; }
};

inline std::optional<std::vector<bool>> brute_force_solve(const cfl::CnfFormula& f) {
    if (f.num_vars > 24) throw std::runtime_error("oracle: too many variables to enumerate");
    std::uint64_t total = 1ull << f.num_vars;
    for (std::uint64_t m = 0; m < total; ++m) {
        std::vector<bool> model((std::size_t)f.num_vars + 1, false);
        for (int v = 1; v <= f.num_vars; ++v) model[(std::size_t)v] = (m >> (v - 1)) & 1;
        if (cfl::satisfies(f, model)) return model;
    }
    return std::nullopt;
}

// Distinct projections of all models onto the given variables.
inline std::set<std::vector<bool>> brute_force_projections(const cfl::CnfFormula& f,
                                                           const std::vector<int>& proj) {
    if (f.num_vars > 24) throw std::runtime_error("oracle: too many variables to enumerate");
    std::set<std::vector<bool>> out;
    std::uint64_t total = 1ull << f.num_vars;
    for (std::uint64_t m = 0; m < total; ++m) {
        std::vector<bool> model((std::size_t)f.num_vars + 1, false);
        for (int v = 1; v <= f.num_vars; ++v) model[(std::size_t)v] = (m >> (v - 1)) & 1;
        if (!cfl::satisfies(f, model)) continue;
        std::vector<bool> p;
        p.reserve(proj.size());
        for (int v : proj) p.push_back(model[(std::size_t)v]);
        out.insert(std::move(p));
    }
    return out;
}

// --- direct recursive-definition evaluator ---------------------------------

inline int count_temporal_nodes_impl(const cfl::Formula& f, std::set<const void*>& seen) {
    using cfl::Op;
    if (!seen.insert(f.id()).second) return 0; // shared node already counted
    switch (f.op()) {
        case Op::Bottom:
        case Op::Atom: return 0;
        case Op::Believes: return count_temporal_nodes_impl(f.lhs(), seen);
        case Op::Next:
        case Op::Prev: return 1 + count_temporal_nodes_impl(f.lhs(), seen);
        case Op::Implies:
            return count_temporal_nodes_impl(f.lhs(), seen) +
                   count_temporal_nodes_impl(f.rhs(), seen);
        case Op::Until:
        case Op::Since:
            return 1 + count_temporal_nodes_impl(f.lhs(), seen) +
                   count_temporal_nodes_impl(f.rhs(), seen);
    }
    return 0;
}

inline int count_temporal_nodes(const cfl::Formula& f) {
    std::set<const void*> seen;
    return count_temporal_nodes_impl(f, seen);
}

// Recursive clauses of the model relation, with explicit "for some t'" scans.
// The cutoff clamps positions on the stuttering tail where all values are
// stable; it overapproximates every stabilization point. Results are cached
// per (node, position) since subformulas are shared.
struct EvalOracle {
    const cfl::Run& r;
    int cutoff;
    std::map<std::pair<const void*, int>, bool> memo;

    bool operator()(const cfl::Formula& f, int t) {
        using cfl::Op;
        if (t > cutoff) t = cutoff;
        auto key = std::make_pair(f.id(), t);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        bool v = false;
        switch (f.op()) {
            case Op::Bottom: v = false; break;
            case Op::Atom: {
                int pos = f.atom_time() ? *f.atom_time() : t;
                v = r.at_clamped(pos).count(f.atom_name()) > 0;
                break;
            }
            case Op::Believes: throw cfl::unsupported_fragment_error("oracle: Believes");
            case Op::Implies: v = !(*this)(f.lhs(), t) || (*this)(f.rhs(), t); break;
            case Op::Next: v = (*this)(f.lhs(), t + 1); break;
            case Op::Prev: v = t >= 1 && (*this)(f.lhs(), t - 1); break;
            case Op::Until: {
                for (int tp = t; tp <= cutoff && !v; ++tp) {
                    if ((*this)(f.rhs(), tp)) {
                        bool all = true;
                        for (int tq = t; tq < tp && all; ++tq) all = (*this)(f.lhs(), tq);
                        v = all;
                    }
                }
                break;
            }
            case Op::Since: {
                for (int tp = t; tp >= 0 && !v; --tp) {
                    if ((*this)(f.rhs(), tp)) {
                        bool all = true;
                        for (int tq = tp + 1; tq <= t && all; ++tq) all = (*this)(f.lhs(), tq);
                        v = all;
                    }
                }
                break;
            }
        }
        memo.emplace(key, v);
        return v;
    }
};

inline bool eval_oracle(const cfl::Formula& f, const cfl::Run& r, int t) {
    int cutoff = (int)r.length() - 1 + count_temporal_nodes(f) + 2;
    EvalOracle ev{r, cutoff, {}};
    return ev(f, t);
}

// --- random generators ------------------------------------------------------

inline cfl::CnfFormula random_cnf(XorShift& rng, int max_vars, int max_clauses) {
    cfl::CnfFormula f;
    int n = 1 + (int)rng.below((std::uint64_t)max_vars);
    f.num_vars = n;
    int m = 1 + (int)rng.below((std::uint64_t)max_clauses);
    for (int i = 0; i < m; ++i) {
        int len = 1 + (int)rng.below(4);
        std::vector<cfl::Lit> c;
        for (int k = 0; k < len; ++k) {
            int v = 1 + (int)rng.below((std::uint64_t)n);
            c.push_back(rng.coin() ? v : -v);
        }
        f.add_clause(c);
    }
    return f;
}

inline cfl::Formula random_formula(XorShift& rng, const std::vector<std::string>& atoms,
                                   int depth) {
    using cfl::Formula;
    if (depth == 0 || rng.below(5) == 0) {
        if (rng.below(8) == 0) return Formula::bottom();
        return Formula::atom(atoms[rng.below(atoms.size())]);
    }
    switch (rng.below(12)) {
        case 0: return Formula::implies(random_formula(rng, atoms, depth - 1),
                                        random_formula(rng, atoms, depth - 1));
        case 1: return Formula::next(random_formula(rng, atoms, depth - 1));
        case 2: return Formula::prev(random_formula(rng, atoms, depth - 1));
        case 3: return Formula::until(random_formula(rng, atoms, depth - 1),
                                      random_formula(rng, atoms, depth - 1));
        case 4: return Formula::since(random_formula(rng, atoms, depth - 1),
                                      random_formula(rng, atoms, depth - 1));
        case 5: return Formula::not_(random_formula(rng, atoms, depth - 1));
        case 6: return Formula::or_(random_formula(rng, atoms, depth - 1),
                                    random_formula(rng, atoms, depth - 1));
        case 7: return Formula::and_(random_formula(rng, atoms, depth - 1),
                                     random_formula(rng, atoms, depth - 1));
        case 8: return Formula::globally(random_formula(rng, atoms, depth - 1));
        case 9: return Formula::finally_(random_formula(rng, atoms, depth - 1));
        case 10:
            return Formula::bounded_finally((int)rng.below(3),
                                            random_formula(rng, atoms, depth - 1));
        default:
            return Formula::bounded_globally((int)rng.below(3),
                                             random_formula(rng, atoms, depth - 1));
    }
}

inline cfl::Run random_run(XorShift& rng, const std::vector<std::string>& atoms, int len) {
    cfl::Run r;
    for (int i = 0; i < len; ++i) {
        std::set<std::string> st;
        for (const auto& a : atoms)
            if (rng.coin()) st.insert(a);
        r.states.push_back(std::move(st));
    }
    return r;
}

// All runs of given length over the atom set, for exhaustive checks.
inline std::vector<cfl::Run> all_runs(const std::vector<std::string>& atoms, int len) {
    std::size_t per = 1u << atoms.size();
    std::vector<cfl::Run> out;
    std::vector<std::size_t> idx((std::size_t)len, 0);
    while (true) {
        cfl::Run r;
        for (int i = 0; i < len; ++i) {
            std::set<std::string> st;
            for (std::size_t k = 0; k < atoms.size(); ++k)
                if ((idx[(std::size_t)i] >> k) & 1) st.insert(atoms[k]);
            r.states.push_back(std::move(st));
        }
        out.push_back(std::move(r));
        int i = 0;
        for (; i < len; ++i) {
            if (++idx[(std::size_t)i] < per) break;
            idx[(std::size_t)i] = 0;
        }
        if (i == len) break;
    }
    return out;
}

} // namespace oracles

#endif
