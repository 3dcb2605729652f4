#ifndef CFL_SCENARIO_HPP
#define CFL_SCENARIO_HPP

#include "cfl/conflict.hpp"

#include <map>
#include <string>
#include <vector>

namespace cfl {

struct ParseError : input_error {
    ParseError(const std::string& msg, int line, int col)
        : input_error("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line(line),
          col(col) {}
    int line;
    int col;
};

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    int line = 0;
    std::string message;
};

// A parsed .cfl scenario: the world model, what A can observe, A's evidence
// and goals, A's beliefs about B's goals, and the data B would share at each
// resolution level.
struct Scenario {
    WorldModel world;
    std::vector<std::string> observables;
    EvidenceBase evidence;
    GoalSet goals_a;
    GoalSet believed_goals_b;
    CooperationData coop;

    // declaration lines (key: "section:name") and verbatim formula texts for
    // printing; parse(print(s)) is structurally identical to s
    std::map<std::string, int> decl_lines;
    std::map<std::string, std::string> formula_texts;
    std::vector<std::string> rule_texts;

    InformationBase information_base() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);

std::vector<Diagnostic> validate(const Scenario& s);

std::string print_scenario(const Scenario& s);

// Formula surface syntax. With a scenario, identifiers are typed finite-domain
// variables and comparisons compile to one-hot constraints; without one, bare
// identifiers are plain propositional atoms.
Formula parse_formula(const std::string& text);
Formula parse_formula(const std::string& text, const Scenario& scenario);

} // namespace cfl

#endif
