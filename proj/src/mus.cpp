#include "cfl/mus.hpp"

#include <algorithm>
#include <set>

namespace cfl {

std::vector<Lit> minimize_core(Solver& solver, const std::vector<Lit>& core) {
    std::vector<Lit> work = core;
    std::sort(work.begin(), work.end());
    work.erase(std::unique(work.begin(), work.end()), work.end());

    SolveResult pre = solver.solve(work);
    if (pre.sat()) throw core_logic_error("minimize_core: formula is SAT under the given core");
    // Clause-set refinement: start from the solver's own core.
    {
        std::set<Lit> keep(pre.core.begin(), pre.core.end());
        std::vector<Lit> refined;
        for (Lit l : work)
            if (keep.count(l)) refined.push_back(l);
        work = refined;
    }

    // One deletion pass in fixed order. When dropping l keeps UNSAT, shrink to
    // the returned core; elements already tested stay necessary for any subset.
    std::size_t i = 0;
    while (i < work.size()) {
        std::vector<Lit> candidate;
        candidate.reserve(work.size() - 1);
        for (std::size_t k = 0; k < work.size(); ++k)
            if (k != i) candidate.push_back(work[k]);
        SolveResult r = solver.solve(candidate);
        if (r.sat()) {
            ++i; // work[i] is necessary
        } else {
            std::set<Lit> keep(r.core.begin(), r.core.end());
            std::vector<Lit> refined;
            for (std::size_t k = 0; k < work.size(); ++k)
                if (k != i && keep.count(work[k])) refined.push_back(work[k]);
            // Everything before position i was already proven necessary; keep order.
            std::vector<Lit> next;
            for (std::size_t k = 0; k < i; ++k) next.push_back(work[k]);
            for (Lit l : refined)
                if (std::find(next.begin(), next.end(), l) == next.end()) next.push_back(l);
            work = std::move(next);
        }
    }
    std::sort(work.begin(), work.end());
    return work;
}

std::vector<Lit> minimize_core(const CnfFormula& f, const std::vector<Lit>& core) {
    Solver solver(f);
    return minimize_core(solver, core);
}

std::vector<std::map<int, bool>> enumerate_models(const CnfFormula& f,
                                                  const std::vector<int>& projection,
                                                  std::size_t limit) {
    if (limit < 1) throw input_error("enumerate_models: limit must be >= 1");
    std::vector<int> proj = projection;
    std::sort(proj.begin(), proj.end());
    proj.erase(std::unique(proj.begin(), proj.end()), proj.end());
    for (int v : proj)
        if (v < 1 || v > f.num_vars) throw input_error("enumerate_models: projection variable out of range");

    Solver solver(f);
    std::vector<std::map<int, bool>> out;
    while (out.size() < limit) {
        SolveResult r = solver.solve();
        if (!r.sat()) break;
        std::map<int, bool> val;
        std::vector<Lit> block;
        for (int v : proj) {
            bool b = r.model[(std::size_t)v];
            val.emplace(v, b);
            block.push_back(b ? -v : v);
        }
        out.push_back(std::move(val));
        if (proj.empty()) break; // single empty valuation represents satisfiability
        if (!solver.add_clause(block)) break;
    }
    return out;
}

} // namespace cfl
