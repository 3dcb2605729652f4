#ifndef CFL_JGRAPH_HPP
#define CFL_JGRAPH_HPP

#include "cfl/formula.hpp"

#include <set>
#include <string>
#include <vector>

namespace cfl {

struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Least constituent of external information: a sensor, a received message, a
// rule. Accepted or rejected as a whole; its own sole justification.
struct BeliefAtom {
    std::string id;
};

// Node of a justification graph: an atom (no components) or a distinguished
// group of entities. The component relation is acyclic.
struct BeliefEntity {
    std::string id;
    std::vector<std::string> components;
    bool is_atom() const { return components.empty(); }
};

// Finite-domain state variable; values are one-hot encoded and exactly one
// holds per time step.
struct StateVar {
    std::string name;
    std::vector<std::string> values;
};

struct Vocabulary {
    std::vector<StateVar> vars;

    const StateVar* find(const std::string& name) const;
    static std::string value_atom(const std::string& var, const std::string& value) {
        return var + "=" + value;
    }
};

struct EvidenceItem {
    std::string atom; // belief atom id
    Formula body;     // Believes-free claim the atom vouches for
    std::string tag;  // source label
};

struct EvidenceBase {
    std::vector<EvidenceItem> items;
    Vocabulary vocab;

    int index_of(const std::string& atom_id) const;
    std::set<std::string> atom_ids() const;
};

// Maximal consistent set of belief atoms, rooted in a fresh belief entity.
struct ConsistentGroup {
    std::vector<std::string> atoms; // sorted
    BeliefEntity root;

    std::string id() const;
};

inline constexpr int kGroupEnumerationBound = 16;

// True iff the conjunction of the selected bodies (plus the vocabulary's
// one-hot axioms) is satisfiable over runs of length horizon+1.
bool is_consistent(const EvidenceBase& base, const std::set<std::string>& atoms, int horizon);

// All maximal consistent subsets of the base, sorted by atom-id list. Every
// consistent subset is contained in some returned group. Refuses bases larger
// than `bound`.
std::vector<ConsistentGroup> max_consistent_groups(const EvidenceBase& base, int horizon,
                                                   int bound = kGroupEnumerationBound);

struct EntailResult {
    bool holds = false;
    std::vector<std::string> justification; // deletion-minimal atom subset, sorted
};

// holds iff bodies(group) ∧ ¬query is unsatisfiable; the justification is a
// deletion-minimal subset of the group whose bodies alone entail the query.
EntailResult entails(const EvidenceBase& base, const ConsistentGroup& group, const Formula& query,
                     int horizon);

} // namespace cfl

#endif
