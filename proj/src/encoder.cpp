#include "cfl/encoder.hpp"

#include <algorithm>

namespace cfl {

Lit CircuitCompiler::and2(Lit a, Lit b) {
    Lit t = pool_.true_lit();
    if (a == t) return b;
    if (b == t) return a;
    if (a == -t || b == -t) return -t;
    if (a == b) return a;
    if (a == -b) return -t;
    if (a > b) std::swap(a, b);
    auto key = std::make_tuple('&', a, b);
    auto it = gate_memo_.find(key);
    if (it != gate_memo_.end()) return it->second;
    Lit g = pool_.aux_var();
    pool_.add_clause({-g, a});
    pool_.add_clause({-g, b});
    pool_.add_clause({g, -a, -b});
    gate_memo_.emplace(key, g);
    return g;
}

Lit CircuitCompiler::or2(Lit a, Lit b) { return -and2(-a, -b); }

Lit CircuitCompiler::mk_and(const std::vector<Lit>& xs) {
    Lit acc = pool_.true_lit();
    for (Lit x : xs) acc = and2(acc, x);
    return acc;
}

Lit CircuitCompiler::mk_or(const std::vector<Lit>& xs) {
    Lit acc = pool_.false_lit();
    for (Lit x : xs) acc = or2(acc, x);
    return acc;
}

int CircuitCompiler::clamp_pos(const Formula& f, int t) {
    // Values stabilize at last_pos + temporal_extent(f); positions beyond it
    // coincide with the value there.
    auto key = std::make_pair(f.id(), 0);
    auto it = extent_memo_.find(key);
    int ext;
    if (it != extent_memo_.end()) {
        ext = it->second;
    } else {
        ext = f.temporal_extent();
        extent_memo_.emplace(key, ext);
    }
    int stab = last_pos_ + ext;
    return t > stab ? stab : t;
}

void CircuitCompiler::pin(const Formula& f) {
    if (pinned_ids_.insert(f.id()).second) pinned_.push_back(f);
}

Lit CircuitCompiler::compile(const Formula& f, int t) {
    if (!f.valid()) throw precondition_error("compile: empty formula");
    if (t < 0) throw precondition_error("compile: negative position");
    pin(f);
    t = clamp_pos(f, t);
    auto key = std::make_pair(f.id(), t);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    Lit out = 0;
    switch (f.op()) {
        case Op::Bottom: out = pool_.false_lit(); break;
        case Op::Atom: {
            int pos = f.atom_time() ? *f.atom_time() : t;
            if (pos > last_pos_) pos = last_pos_;
            out = pool_.named_var(f.atom_name(), pos);
            break;
        }
        case Op::Believes:
            throw unsupported_fragment_error("compile: Believes cannot be encoded propositionally");
        case Op::Implies: out = or2(-compile(f.lhs(), t), compile(f.rhs(), t)); break;
        case Op::Next: out = compile(f.lhs(), t + 1); break;
        case Op::Prev: out = (t == 0) ? pool_.false_lit() : compile(f.lhs(), t - 1); break;
        case Op::Until: {
            // Backward unrolling; at the stabilization point the tail value is
            // the right-hand side's stable value.
            int stab = last_pos_ + f.temporal_extent();
            if (t >= stab) {
                out = compile(f.rhs(), t);
            } else {
                Lit tail = compile(f, t + 1);
                out = or2(compile(f.rhs(), t), and2(compile(f.lhs(), t), tail));
            }
            break;
        }
        case Op::Since: {
            if (t == 0) {
                out = compile(f.rhs(), 0);
            } else {
                Lit prior = compile(f, t - 1);
                out = or2(compile(f.rhs(), t), and2(compile(f.lhs(), t), prior));
            }
            break;
        }
    }
    memo_.emplace(key, out);
    return out;
}

EncodeResult encode(const Formula& f, int horizon) {
    if (horizon < 0) throw precondition_error("encode: horizon must be a natural number");
    if (f.contains_believes())
        throw unsupported_fragment_error("encode: formula contains a Believes operator");
    if (f.future_depth() > horizon)
        throw horizon_overflow_error("encode: temporal depth " + std::to_string(f.future_depth()) +
                                     " exceeds horizon " + std::to_string(horizon));
    VarPool pool;
    // Allocate the full run space first so models range over every
    // (atom, position) pair, referenced or not.
    for (const auto& a : f.atoms())
        for (int t = 0; t <= horizon; ++t) pool.named_var(a, t);
    CircuitCompiler cc(pool, horizon);
    Lit out = cc.compile(f, 0);
    pool.add_clause({out});
    EncodeResult res;
    res.cnf = pool.cnf();
    res.atom_vars = pool.named();
    res.output = out;
    return res;
}

} // namespace cfl
