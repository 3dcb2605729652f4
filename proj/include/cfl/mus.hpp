#ifndef CFL_MUS_HPP
#define CFL_MUS_HPP

#include "cfl/cnf.hpp"
#include "cfl/solver.hpp"

#include <map>
#include <vector>

namespace cfl {

struct core_logic_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Deletion-based minimization of an assumption core: the result is a subset of
// `core` under which `f` stays UNSAT, and removing any single element makes it
// SAT. Quadratic in the core size; instances here are small.
// Throws core_logic_error when `f` is satisfiable under `core`.
std::vector<Lit> minimize_core(const CnfFormula& f, const std::vector<Lit>& core);

// Same, reusing a prepared solver (must contain all clauses of the instance).
std::vector<Lit> minimize_core(Solver& solver, const std::vector<Lit>& core);

// Enumerates up to `limit` distinct valuations over the projection variables,
// each extendable to a full model; exhaustive when fewer than `limit` exist.
// A valuation maps projection variable -> value.
std::vector<std::map<int, bool>> enumerate_models(const CnfFormula& f,
                                                  const std::vector<int>& projection,
                                                  std::size_t limit);

} // namespace cfl

#endif
