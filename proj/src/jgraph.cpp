#include "cfl/jgraph.hpp"

#include "cfl/encoder.hpp"
#include "cfl/mus.hpp"
#include "cfl/solver.hpp"

#include <algorithm>
#include <map>

namespace cfl {

const StateVar* Vocabulary::find(const std::string& name) const {
    for (const auto& v : vars)
        if (v.name == name) return &v;
    return nullptr;
}

int EvidenceBase::index_of(const std::string& atom_id) const {
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].atom == atom_id) return (int)i;
    return -1;
}

std::set<std::string> EvidenceBase::atom_ids() const {
    std::set<std::string> out;
    for (const auto& it : items) out.insert(it.atom);
    return out;
}

std::string ConsistentGroup::id() const {
    std::string s = "{";
    for (std::size_t i = 0; i < atoms.size(); ++i) s += (i ? "," : "") + atoms[i];
    return s + "}";
}

namespace {

void emit_one_hot(VarPool& pool, const Vocabulary& vocab, int last_pos) {
    for (const auto& var : vocab.vars) {
        for (int t = 0; t <= last_pos; ++t) {
            std::vector<Lit> at_least_one;
            for (const auto& val : var.values)
                at_least_one.push_back(pool.named_var(Vocabulary::value_atom(var.name, val), t));
            pool.add_clause(at_least_one);
            for (std::size_t i = 0; i < at_least_one.size(); ++i)
                for (std::size_t j = i + 1; j < at_least_one.size(); ++j)
                    pool.add_clause({-at_least_one[i], -at_least_one[j]});
        }
    }
}

// Shared machinery: one selector assumption per evidence atom, body compiled
// at position 0 over runs of length horizon+1.
struct GroupingContext {
    std::vector<std::string> atoms; // sorted atom ids
    std::map<std::string, Lit> selector;
    VarPool pool;
    CircuitCompiler cc;
    Solver solver;

    GroupingContext(const EvidenceBase& base, int horizon) : cc(pool, horizon), solver() {
        for (const auto& it : base.items) {
            if (it.body.contains_believes())
                throw unsupported_fragment_error(
                    "evidence: bodies must lie in the non-epistemic fragment (atom '" + it.atom +
                    "')");
            if (std::find(atoms.begin(), atoms.end(), it.atom) != atoms.end())
                throw input_error("evidence: duplicate belief atom '" + it.atom + "'");
            atoms.push_back(it.atom);
        }
        std::sort(atoms.begin(), atoms.end());
        emit_one_hot(pool, base.vocab, horizon);
        for (const auto& id : atoms) {
            const EvidenceItem& it = base.items[(std::size_t)base.index_of(id)];
            Lit body = cc.compile(it.body, 0);
            Lit sel = pool.aux_var();
            pool.add_clause({-sel, body});
            selector.emplace(id, sel);
        }
    }

    void finalize() { solver.load(pool.cnf()); }

    std::vector<Lit> selectors_for(const std::set<std::string>& subset) const {
        std::vector<Lit> out;
        for (const auto& id : subset) out.push_back(selector.at(id));
        return out;
    }
};

ConsistentGroup make_group(std::vector<std::string> atoms, int seq) {
    ConsistentGroup g;
    std::sort(atoms.begin(), atoms.end());
    g.atoms = std::move(atoms);
    g.root.id = "group#" + std::to_string(seq);
    g.root.components = g.atoms;
    return g;
}

} // namespace

bool is_consistent(const EvidenceBase& base, const std::set<std::string>& atoms, int horizon) {
    GroupingContext ctx(base, horizon);
    for (const auto& id : atoms)
        if (!ctx.selector.count(id))
            throw input_error("is_consistent: unknown atom id '" + id + "'");
    ctx.finalize();
    return ctx.solver.solve(ctx.selectors_for(atoms)).sat();
}

std::vector<ConsistentGroup> max_consistent_groups(const EvidenceBase& base, int horizon,
                                                   int bound) {
    if ((int)base.items.size() > bound)
        throw capacity_error("max_consistent_groups: base has " +
                             std::to_string(base.items.size()) + " atoms, enumeration bound is " +
                             std::to_string(bound) +
                             "; raise the bound explicitly to enumerate larger bases");
    GroupingContext ctx(base, horizon);
    ctx.finalize();
    int n = (int)ctx.atoms.size();

    std::vector<ConsistentGroup> groups;
    std::vector<std::uint32_t> group_masks;
    std::vector<std::uint32_t> unsat_cores; // any superset of one of these is inconsistent

    // Scan subsets by decreasing size. A consistent subset not contained in an
    // earlier (hence not-smaller) group has no consistent strict superset, so
    // it is maximal; containment pruning keeps the scan exhaustive.
    std::vector<std::uint32_t> by_size;
    by_size.reserve(1u << n);
    for (std::uint32_t m = 0; m < (1u << n); ++m) by_size.push_back(m);
    std::stable_sort(by_size.begin(), by_size.end(), [](std::uint32_t a, std::uint32_t b) {
        return __builtin_popcount(a) > __builtin_popcount(b);
    });

    for (std::uint32_t mask : by_size) {
        bool skip = false;
        for (std::uint32_t gm : group_masks)
            if ((mask & gm) == mask) {
                skip = true;
                break;
            }
        for (std::uint32_t core : unsat_cores)
            if (!skip && (mask & core) == core) skip = true;
        if (skip) continue;

        std::vector<Lit> sels;
        std::vector<std::string> members;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                members.push_back(ctx.atoms[(std::size_t)i]);
                sels.push_back(ctx.selector.at(ctx.atoms[(std::size_t)i]));
            }
        SolveResult r = ctx.solver.solve(sels);
        if (r.sat()) {
            group_masks.push_back(mask);
            groups.push_back(make_group(members, (int)groups.size()));
        } else {
            std::uint32_t core_mask = 0;
            for (Lit c : r.core)
                for (int i = 0; i < n; ++i)
                    if (ctx.selector.at(ctx.atoms[(std::size_t)i]) == c) core_mask |= 1u << i;
            unsat_cores.push_back(core_mask);
        }
    }
    std::sort(groups.begin(), groups.end(),
              [](const ConsistentGroup& a, const ConsistentGroup& b) { return a.atoms < b.atoms; });
    return groups;
}

EntailResult entails(const EvidenceBase& base, const ConsistentGroup& group, const Formula& query,
                     int horizon) {
    if (query.contains_believes())
        throw unsupported_fragment_error("entails: query must be non-epistemic");
    GroupingContext ctx(base, horizon);
    Lit q = ctx.cc.compile(query, 0);
    ctx.pool.add_clause({-q}); // assert the negated query
    ctx.finalize();

    std::set<std::string> subset(group.atoms.begin(), group.atoms.end());
    for (const auto& id : subset)
        if (!ctx.selector.count(id)) throw input_error("entails: unknown atom id '" + id + "'");

    EntailResult res;
    SolveResult r = ctx.solver.solve(ctx.selectors_for(subset));
    if (r.sat()) {
        res.holds = false;
        return res;
    }
    res.holds = true;
    std::vector<Lit> minimal = minimize_core(ctx.solver, r.core);
    for (Lit m : minimal)
        for (const auto& [id, sel] : ctx.selector)
            if (sel == m) res.justification.push_back(id);
    std::sort(res.justification.begin(), res.justification.end());
    return res;
}

} // namespace cfl
