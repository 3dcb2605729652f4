#ifndef CFL_CLI_HPP
#define CFL_CLI_HPP

#include "cfl/scenario.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace cfl {

struct RunConfig {
    enum class Mode { Analyze, Resolve, Explain, Solve };
    Mode mode = Mode::Analyze;
    std::string path; // scenario file, or DIMACS for solve
    int max_level = 4;
    std::string output = "text"; // text | json
    std::uint64_t seed = 0;
    std::uint64_t strategy_bound = 500000;
    int jobs = 1;
    std::optional<int> horizon;
    std::vector<Lit> assumptions; // solve mode
};

// Exit codes: 0 no conflict, 1 resolved, 2 unresolved, 3 input error;
// solve: 10 satisfiable, 20 unsatisfiable.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

ConflictAnalyzer make_analyzer(const Scenario& s, const RunConfig& cfg);

int cli_main(int argc, char** argv);

} // namespace cfl

#endif
