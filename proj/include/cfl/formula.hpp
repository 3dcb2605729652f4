#ifndef CFL_FORMULA_HPP
#define CFL_FORMULA_HPP

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfl {

struct precondition_error : std::logic_error {
    using std::logic_error::logic_error;
};
struct unsupported_fragment_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Core constructors of the belief/temporal language. Derived connectives
// (!, |, &, <->, G, F, H, F<=t, G<=t) are smart constructors that build core
// forms directly, so every Formula is in core form by construction.
enum class Op { Bottom, Atom, Implies, Believes, Next, Prev, Until, Since };

class Formula {
public:
    Formula() = default;

    static Formula bottom();
    static Formula top(); // false -> false
    static Formula atom(std::string name, std::optional<int> time_index = std::nullopt);
    static Formula implies(Formula a, Formula b);
    static Formula believes(std::vector<std::string> entities, Formula a);
    static Formula next(Formula a);
    static Formula prev(Formula a);
    static Formula until(Formula a, Formula b);
    static Formula since(Formula a, Formula b);

    // Derived connectives.
    static Formula not_(Formula a);
    static Formula or_(Formula a, Formula b);
    static Formula and_(Formula a, Formula b);
    static Formula iff(Formula a, Formula b);
    static Formula or_all(const std::vector<Formula>& fs);  // empty -> bottom
    static Formula and_all(const std::vector<Formula>& fs); // empty -> top
    static Formula globally(Formula a);                     // !(true U !a)
    static Formula finally_(Formula a);                     // true U a
    static Formula historically(Formula a);                 // !(true S !a)
    static Formula bounded_finally(int t, Formula a);       // a | X a | ... | X^t a
    static Formula bounded_globally(int t, Formula a);      // a & X a & ... & X^t a

    bool valid() const { return node_ != nullptr; }
    Op op() const;
    const std::string& atom_name() const;
    const std::optional<int>& atom_time() const;
    const std::vector<std::string>& entities() const;
    const Formula& lhs() const;
    const Formula& rhs() const;

    bool contains_believes() const;
    bool is_bottom() const { return op() == Op::Bottom; }

    // Number of future steps the formula can inspect from its evaluation
    // position (X adds one, past operators add none, unbounded U rides the
    // stuttering tail and adds none beyond its arguments).
    int future_depth() const;
    // Conservative stabilization bound used by the evaluator and encoder.
    int temporal_extent() const;

    // Set of atom names occurring in the formula.
    std::set<std::string> atoms() const;

    bool structurally_equal(const Formula& other) const;
    std::string to_string() const;

    // Stable identity of the shared node, usable as a memoization key.
    const void* id() const { return node_.get(); }

    struct Node;

private:
    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// A finite run: one valuation (set of true atoms) per position, length >= 1.
// Positions beyond the end behave as the last state repeated.
struct Run {
    std::vector<std::set<std::string>> states;

    std::size_t length() const { return states.size(); }
    const std::set<std::string>& at_clamped(int t) const {
        if (t < 0) throw precondition_error("run: negative position");
        std::size_t i = (std::size_t)t;
        return states[i < states.size() ? i : states.size() - 1];
    }
};

// Finite-trace semantics with infinite stuttering of the last state; past
// operators see the genuine finite prefix only. Requires t < r.length and a
// Believes-free formula.
bool eval(const Formula& f, const Run& r, int t);

// Returns the core form of f. Formulas are core by construction, so this is
// the identity; it exists as the documented normal-form surface.
Formula expand(const Formula& f);

} // namespace cfl

#endif
