#include "cfl/formula.hpp"

#include <algorithm>
#include <unordered_map>

namespace cfl {

struct Formula::Node {
    Op op;
    std::string atom;
    std::optional<int> time_index;
    std::vector<std::string> ents;
    Formula a, b;
};

Formula Formula::bottom() {
    auto n = std::make_shared<Node>();
    n->op = Op::Bottom;
    return Formula(std::move(n));
}

Formula Formula::top() { return implies(bottom(), bottom()); }

Formula Formula::atom(std::string name, std::optional<int> time_index) {
    if (name.empty()) throw precondition_error("formula: atom name must be nonempty");
    auto n = std::make_shared<Node>();
    n->op = Op::Atom;
    n->atom = std::move(name);
    n->time_index = time_index;
    return Formula(std::move(n));
}

Formula Formula::implies(Formula a, Formula b) {
    auto n = std::make_shared<Node>();
    n->op = Op::Implies;
    n->a = std::move(a);
    n->b = std::move(b);
    return Formula(std::move(n));
}

Formula Formula::believes(std::vector<std::string> entities, Formula a) {
    if (entities.empty()) throw precondition_error("formula: belief groups may not be empty");
    std::sort(entities.begin(), entities.end());
    entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
    auto n = std::make_shared<Node>();
    n->op = Op::Believes;
    n->ents = std::move(entities);
    n->a = std::move(a);
    return Formula(std::move(n));
}

Formula Formula::next(Formula a) {
    auto n = std::make_shared<Node>();
    n->op = Op::Next;
    n->a = std::move(a);
    return Formula(std::move(n));
}

Formula Formula::prev(Formula a) {
    auto n = std::make_shared<Node>();
    n->op = Op::Prev;
    n->a = std::move(a);
    return Formula(std::move(n));
}

Formula Formula::until(Formula a, Formula b) {
    auto n = std::make_shared<Node>();
    n->op = Op::Until;
    n->a = std::move(a);
    n->b = std::move(b);
    return Formula(std::move(n));
}

Formula Formula::since(Formula a, Formula b) {
    auto n = std::make_shared<Node>();
    n->op = Op::Since;
    n->a = std::move(a);
    n->b = std::move(b);
    return Formula(std::move(n));
}

Formula Formula::not_(Formula a) { return implies(std::move(a), bottom()); }
Formula Formula::or_(Formula a, Formula b) { return implies(not_(std::move(a)), std::move(b)); }
Formula Formula::and_(Formula a, Formula b) {
    return not_(implies(std::move(a), not_(std::move(b))));
}
Formula Formula::iff(Formula a, Formula b) {
    return and_(implies(a, b), implies(std::move(b), std::move(a)));
}

Formula Formula::or_all(const std::vector<Formula>& fs) {
    if (fs.empty()) return bottom();
    Formula acc = fs.back();
    for (int i = (int)fs.size() - 2; i >= 0; --i) acc = or_(fs[(std::size_t)i], acc);
    return acc;
}

Formula Formula::and_all(const std::vector<Formula>& fs) {
    if (fs.empty()) return top();
    Formula acc = fs.back();
    for (int i = (int)fs.size() - 2; i >= 0; --i) acc = and_(fs[(std::size_t)i], acc);
    return acc;
}

Formula Formula::globally(Formula a) { return not_(until(top(), not_(std::move(a)))); }
Formula Formula::finally_(Formula a) { return until(top(), std::move(a)); }
Formula Formula::historically(Formula a) { return not_(since(top(), not_(std::move(a)))); }

Formula Formula::bounded_finally(int t, Formula a) {
    if (t < 0) throw precondition_error("formula: bound must be a natural number");
    std::vector<Formula> copies;
    Formula shifted = a;
    copies.push_back(shifted);
    for (int i = 1; i <= t; ++i) {
        shifted = next(shifted);
        copies.push_back(shifted);
    }
    return or_all(copies);
}

Formula Formula::bounded_globally(int t, Formula a) {
    if (t < 0) throw precondition_error("formula: bound must be a natural number");
    std::vector<Formula> copies;
    Formula shifted = a;
    copies.push_back(shifted);
    for (int i = 1; i <= t; ++i) {
        shifted = next(shifted);
        copies.push_back(shifted);
    }
    return and_all(copies);
}

Op Formula::op() const { return node_->op; }
const std::string& Formula::atom_name() const { return node_->atom; }
const std::optional<int>& Formula::atom_time() const { return node_->time_index; }
const std::vector<std::string>& Formula::entities() const { return node_->ents; }
const Formula& Formula::lhs() const { return node_->a; }
const Formula& Formula::rhs() const { return node_->b; }

bool Formula::contains_believes() const {
    std::set<const void*> visited;
    struct Walk {
        std::set<const void*>& visited;
        bool operator()(const Formula& f) {
            if (!visited.insert(f.id()).second) return false;
            switch (f.op()) {
                case Op::Bottom:
                case Op::Atom: return false;
                case Op::Believes: return true;
                case Op::Next:
                case Op::Prev: return (*this)(f.lhs());
                default: return (*this)(f.lhs()) || (*this)(f.rhs());
            }
        }
    } walk{visited};
    return walk(*this);
}

namespace {

// Subformulas are shared aggressively (bounded operators reuse shifted
// copies), so depth walks must memoize on node identity.
int dag_walk(const Formula& f, std::unordered_map<const void*, int>& memo, bool extent) {
    auto it = memo.find(f.id());
    if (it != memo.end()) return it->second;
    int r = 0;
    switch (f.op()) {
        case Op::Bottom:
        case Op::Atom: r = 0; break;
        case Op::Believes: r = dag_walk(f.lhs(), memo, extent); break;
        case Op::Next: r = 1 + dag_walk(f.lhs(), memo, extent); break;
        case Op::Prev: r = (extent ? 1 : 0) + dag_walk(f.lhs(), memo, extent); break;
        case Op::Implies:
            r = std::max(dag_walk(f.lhs(), memo, extent), dag_walk(f.rhs(), memo, extent));
            break;
        case Op::Until:
        case Op::Since:
            r = (extent ? 1 : 0) +
                std::max(dag_walk(f.lhs(), memo, extent), dag_walk(f.rhs(), memo, extent));
            break;
    }
    memo.emplace(f.id(), r);
    return r;
}

} // namespace

int Formula::future_depth() const {
    std::unordered_map<const void*, int> memo;
    return dag_walk(*this, memo, false);
}

int Formula::temporal_extent() const {
    std::unordered_map<const void*, int> memo;
    return dag_walk(*this, memo, true);
}

std::set<std::string> Formula::atoms() const {
    std::set<std::string> out;
    std::set<const void*> visited;
    struct Walk {
        std::set<std::string>& out;
        std::set<const void*>& visited;
        void operator()(const Formula& f) {
            if (!visited.insert(f.id()).second) return;
            switch (f.op()) {
                case Op::Bottom: return;
                case Op::Atom: out.insert(f.atom_name()); return;
                case Op::Believes:
                case Op::Next:
                case Op::Prev: (*this)(f.lhs()); return;
                default:
                    (*this)(f.lhs());
                    (*this)(f.rhs());
            }
        }
    } walk{out, visited};
    walk(*this);
    return out;
}

bool Formula::structurally_equal(const Formula& other) const {
    if (node_ == other.node_) return true;
    if (!node_ || !other.node_) return false;
    if (op() != other.op()) return false;
    switch (op()) {
        case Op::Bottom: return true;
        case Op::Atom: return atom_name() == other.atom_name() && atom_time() == other.atom_time();
        case Op::Believes:
            return entities() == other.entities() && lhs().structurally_equal(other.lhs());
        case Op::Next:
        case Op::Prev: return lhs().structurally_equal(other.lhs());
        default:
            return lhs().structurally_equal(other.lhs()) && rhs().structurally_equal(other.rhs());
    }
}

std::string Formula::to_string() const {
    switch (op()) {
        case Op::Bottom: return "false";
        case Op::Atom:
            return atom_time() ? atom_name() + "@" + std::to_string(*atom_time()) : atom_name();
        case Op::Believes: {
            std::string ents;
            if (entities().size() == 1) {
                ents = entities()[0];
            } else {
                ents = "{";
                for (std::size_t i = 0; i < entities().size(); ++i)
                    ents += (i ? "," : "") + entities()[i];
                ents += "}";
            }
            return ents + ":(" + lhs().to_string() + ")";
        }
        case Op::Next: return "X (" + lhs().to_string() + ")";
        case Op::Prev: return "P (" + lhs().to_string() + ")";
        case Op::Until: return "(" + lhs().to_string() + " U " + rhs().to_string() + ")";
        case Op::Since: return "(" + lhs().to_string() + " S " + rhs().to_string() + ")";
        case Op::Implies:
            if (rhs().op() == Op::Bottom) return "!(" + lhs().to_string() + ")";
            return "(" + lhs().to_string() + " -> " + rhs().to_string() + ")";
    }
    return "?";
}

//=================================================================================================
// Evaluation

namespace {

struct EvalTables {
    const Run& run;
    int t_max;
    std::unordered_map<const void*, std::vector<char>> memo;

    const std::vector<char>& table(const Formula& f) {
        const void* key = f.id();
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;

        std::vector<char> vals((std::size_t)t_max + 1, 0);
        switch (f.op()) {
            case Op::Bottom: break;
            case Op::Atom: {
                for (int t = 0; t <= t_max; ++t) {
                    int pos = f.atom_time() ? *f.atom_time() : t;
                    vals[(std::size_t)t] = run.at_clamped(pos).count(f.atom_name()) ? 1 : 0;
                }
                break;
            }
            case Op::Believes:
                throw unsupported_fragment_error(
                    "eval: Believes is not evaluable here; epistemic queries go through the "
                    "justification-graph reduction");
            case Op::Implies: {
                const auto& a = table(f.lhs());
                const auto& b = table(f.rhs());
                for (int t = 0; t <= t_max; ++t)
                    vals[(std::size_t)t] = (!a[(std::size_t)t] || b[(std::size_t)t]) ? 1 : 0;
                break;
            }
            case Op::Next: {
                const auto& a = table(f.lhs());
                for (int t = 0; t <= t_max; ++t) {
                    int nt = std::min(t + 1, t_max); // stable beyond t_max
                    vals[(std::size_t)t] = a[(std::size_t)nt];
                }
                break;
            }
            case Op::Prev: {
                const auto& a = table(f.lhs());
                for (int t = 1; t <= t_max; ++t) vals[(std::size_t)t] = a[(std::size_t)t - 1];
                break;
            }
            case Op::Until: {
                const auto& a = table(f.lhs());
                const auto& b = table(f.rhs());
                vals[(std::size_t)t_max] = b[(std::size_t)t_max];
                for (int t = t_max - 1; t >= 0; --t)
                    vals[(std::size_t)t] =
                        (b[(std::size_t)t] || (a[(std::size_t)t] && vals[(std::size_t)t + 1])) ? 1
                                                                                               : 0;
                break;
            }
            case Op::Since: {
                const auto& a = table(f.lhs());
                const auto& b = table(f.rhs());
                vals[0] = b[0];
                for (int t = 1; t <= t_max; ++t)
                    vals[(std::size_t)t] =
                        (b[(std::size_t)t] || (a[(std::size_t)t] && vals[(std::size_t)t - 1])) ? 1
                                                                                               : 0;
                break;
            }
        }
        return memo.emplace(key, std::move(vals)).first->second;
    }
};

} // namespace

bool eval(const Formula& f, const Run& r, int t) {
    if (!f.valid()) throw precondition_error("eval: empty formula");
    if (r.length() == 0) throw precondition_error("eval: runs must have length >= 1");
    if (t < 0 || (std::size_t)t >= r.length())
        throw precondition_error("eval: position out of range");
    if (f.contains_believes())
        throw unsupported_fragment_error("eval: formula contains a Believes operator");
    // All subformula values stabilize at or before this cutoff on the
    // stuttering extension, so finite tables are exact.
    int t_max = (int)r.length() - 1 + f.temporal_extent() + 1;
    // Explicit time indices may point past the cutoff; clamping handles them.
    EvalTables tables{r, t_max, {}};
    return tables.table(f)[(std::size_t)t] != 0;
}

Formula expand(const Formula& f) {
    if (!f.valid()) throw precondition_error("expand: empty formula");
    return f;
}

} // namespace cfl
