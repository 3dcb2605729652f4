#include "cfl/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cfl {

namespace {

//=================================================================================================
// Tokens

enum class Tok {
    Ident,
    Int,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Prime,
    Eq,
    Neq,
    Le,
    Ge,
    Lt,
    Gt,
    Arrow,      // ->
    FatArrow,   // =>
    Amp,
    Pipe,
    Bang,
    Plus,
    Minus,
    DotDot,
    Star,
    End
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    long value = 0;
    int line = 0;
    int col = 0;
};

struct Lexer {
    std::string src; // owned: call sites hand in substrings
    std::size_t pos = 0;
    int line;
    int col = 1;
    Token cur;

    Lexer(std::string s, int base_line) : src(std::move(s)), line(base_line) { advance(); }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }

    void advance() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\r' ||
                                    src[pos] == '\n')) {
            if (src[pos] == '\n') {
                line++;
                col = 1;
            } else {
                col++;
            }
            pos++;
        }
        cur = Token{};
        cur.line = line;
        cur.col = col;
        if (pos >= src.size()) {
            cur.kind = Tok::End;
            return;
        }
        char c = src[pos];
        auto two = [&](char a, char b) {
            return c == a && pos + 1 < src.size() && src[pos + 1] == b;
        };
        if (std::isalpha((unsigned char)c) || c == '_') {
            std::size_t start = pos;
            while (pos < src.size() &&
                   (std::isalnum((unsigned char)src[pos]) || src[pos] == '_')) {
                pos++;
                col++;
            }
            cur.kind = Tok::Ident;
            cur.text = src.substr(start, pos - start);
            return;
        }
        if (std::isdigit((unsigned char)c)) {
            std::size_t start = pos;
            while (pos < src.size() && std::isdigit((unsigned char)src[pos])) {
                pos++;
                col++;
            }
            cur.kind = Tok::Int;
            cur.text = src.substr(start, pos - start);
            cur.value = std::strtol(cur.text.c_str(), nullptr, 10);
            return;
        }
        auto take = [&](Tok k, int n) {
            cur.kind = k;
            cur.text = src.substr(pos, (std::size_t)n);
            pos += (std::size_t)n;
            col += n;
        };
        if (two('-', '>')) return take(Tok::Arrow, 2);
        if (two('=', '>')) return take(Tok::FatArrow, 2);
        if (two('!', '=')) return take(Tok::Neq, 2);
        if (two('<', '=')) return take(Tok::Le, 2);
        if (two('>', '=')) return take(Tok::Ge, 2);
        if (two('.', '.')) return take(Tok::DotDot, 2);
        switch (c) {
            case '(': return take(Tok::LParen, 1);
            case ')': return take(Tok::RParen, 1);
            case '{': return take(Tok::LBrace, 1);
            case '}': return take(Tok::RBrace, 1);
            case ',': return take(Tok::Comma, 1);
            case ':': return take(Tok::Colon, 1);
            case '\'': return take(Tok::Prime, 1);
            case '=': return take(Tok::Eq, 1);
            case '<': return take(Tok::Lt, 1);
            case '>': return take(Tok::Gt, 1);
            case '&': return take(Tok::Amp, 1);
            case '|': return take(Tok::Pipe, 1);
            case '!': return take(Tok::Bang, 1);
            case '+': return take(Tok::Plus, 1);
            case '-': return take(Tok::Minus, 1);
            case '*': return take(Tok::Star, 1);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    bool accept(Tok k) {
        if (cur.kind != k) return false;
        advance();
        return true;
    }
    Token expect(Tok k, const char* what) {
        if (cur.kind != k) fail(std::string("expected ") + what + ", found '" + cur.text + "'");
        Token t = cur;
        advance();
        return t;
    }
};

//=================================================================================================
// Typed formula parsing

struct VarTable {
    bool typed = false;
    std::map<std::string, std::vector<std::string>> domains; // incl. act_* pseudo vars

    const std::vector<std::string>* find(const std::string& name) const {
        auto it = domains.find(name);
        return it == domains.end() ? nullptr : &it->second;
    }
};

bool is_keyword(const std::string& s) {
    return s == "X" || s == "P" || s == "U" || s == "S" || s == "G" || s == "F" || s == "H" ||
           s == "true" || s == "false";
}

bool numeric_domain(const std::vector<std::string>& values, std::vector<long>& out) {
    out.clear();
    for (const auto& v : values) {
        long x = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc() || p != v.data() + v.size()) return false;
        out.push_back(x);
    }
    return true;
}

struct FormulaParser {
    Lexer& lx;
    const VarTable& vars;
    int depth = 0;

    Formula parse() {
        Formula f = implies();
        return f;
    }

    void push_depth() {
        if (++depth > 200) lx.fail("formula nesting too deep");
    }

    Formula implies() {
        push_depth();
        Formula l = disjunct();
        if (lx.accept(Tok::Arrow)) {
            Formula r = implies();
            depth--;
            return Formula::implies(std::move(l), std::move(r));
        }
        depth--;
        return l;
    }

    Formula disjunct() {
        Formula l = conjunct();
        while (lx.accept(Tok::Pipe)) l = Formula::or_(std::move(l), conjunct());
        return l;
    }

    Formula conjunct() {
        Formula l = until_since();
        while (lx.accept(Tok::Amp)) l = Formula::and_(std::move(l), until_since());
        return l;
    }

    Formula until_since() {
        Formula l = unary();
        for (;;) {
            if (lx.cur.kind == Tok::Ident && lx.cur.text == "U") {
                lx.advance();
                l = Formula::until(std::move(l), unary());
            } else if (lx.cur.kind == Tok::Ident && lx.cur.text == "S") {
                lx.advance();
                l = Formula::since(std::move(l), unary());
            } else {
                break;
            }
        }
        return l;
    }

    Formula unary() {
        push_depth();
        Formula out;
        if (lx.accept(Tok::Bang)) {
            out = Formula::not_(unary());
        } else if (lx.cur.kind == Tok::Ident && is_keyword(lx.cur.text) && lx.cur.text != "true" &&
                   lx.cur.text != "false") {
            std::string kw = lx.cur.text;
            lx.advance();
            if (kw == "X") out = Formula::next(unary());
            else if (kw == "P") out = Formula::prev(unary());
            else if (kw == "H") out = Formula::historically(unary());
            else if (kw == "G" || kw == "F") {
                if (lx.accept(Tok::Le)) {
                    Token b = lx.expect(Tok::Int, "bound");
                    Formula body = unary();
                    out = (kw == "G") ? Formula::bounded_globally((int)b.value, std::move(body))
                                      : Formula::bounded_finally((int)b.value, std::move(body));
                } else {
                    out = (kw == "G") ? Formula::globally(unary()) : Formula::finally_(unary());
                }
            } else {
                lx.fail("operator '" + kw + "' needs a left operand");
            }
        } else if (lx.cur.kind == Tok::LBrace) {
            // {e1,e2}: phi
            lx.advance();
            std::vector<std::string> ents;
            if (lx.cur.kind != Tok::RBrace) {
                for (;;) {
                    ents.push_back(lx.expect(Tok::Ident, "entity name").text);
                    if (!lx.accept(Tok::Comma)) break;
                }
            }
            lx.expect(Tok::RBrace, "'}'");
            lx.expect(Tok::Colon, "':'");
            out = Formula::believes(std::move(ents), unary());
        } else {
            out = primary();
        }
        depth--;
        return out;
    }

    Formula primary() {
        if (lx.accept(Tok::LParen)) {
            Formula f = implies();
            lx.expect(Tok::RParen, "')'");
            return f;
        }
        if (lx.cur.kind == Tok::Ident && lx.cur.text == "true") {
            lx.advance();
            return Formula::top();
        }
        if (lx.cur.kind == Tok::Ident && lx.cur.text == "false") {
            lx.advance();
            return Formula::bottom();
        }
        if (lx.cur.kind != Tok::Ident && lx.cur.kind != Tok::Int)
            lx.fail("expected a formula, found '" + lx.cur.text + "'");
        Token first = lx.cur;
        lx.advance();
        // entity prefix e:phi
        if (first.kind == Tok::Ident && lx.cur.kind == Tok::Colon) {
            lx.advance();
            return Formula::believes({first.text}, unary());
        }
        if (!vars.typed) {
            if (first.kind != Tok::Ident) lx.fail("bare integers are not formulas");
            return Formula::atom(first.text);
        }
        return comparison(first);
    }

    // typed comparisons: var OP (value | var [+/- int])
    Formula comparison(const Token& left) {
        if (left.kind != Tok::Ident)
            lx.fail("comparisons start with a variable name");
        const auto* dom = vars.find(left.text);
        if (!dom) lx.fail("unknown variable '" + left.text + "'");

        Tok op = lx.cur.kind;
        if (op != Tok::Eq && op != Tok::Neq && op != Tok::Lt && op != Tok::Le && op != Tok::Gt &&
            op != Tok::Ge)
            lx.fail("expected a comparison operator after '" + left.text + "'");
        lx.advance();

        Token right = lx.cur;
        if (right.kind != Tok::Ident && right.kind != Tok::Int)
            lx.fail("expected a value or variable after the comparison");
        lx.advance();

        long offset = 0;
        bool has_offset = false;
        if (lx.cur.kind == Tok::Plus || lx.cur.kind == Tok::Minus) {
            bool negative = lx.cur.kind == Tok::Minus;
            lx.advance();
            Token off = lx.expect(Tok::Int, "offset");
            offset = negative ? -off.value : off.value;
            has_offset = true;
        }

        const auto* rdom = right.kind == Tok::Ident ? vars.find(right.text) : nullptr;
        if (right.kind == Tok::Ident && !rdom && (has_offset || op != Tok::Eq))
            lx.fail("unknown variable '" + right.text + "'");

        if (rdom) return compare_vars(left.text, *dom, op, right.text, *rdom, offset);
        if (has_offset) lx.fail("offsets apply to variables only");
        return compare_value(left.text, *dom, op, right.text);
    }

    static bool cmp(long a, Tok op, long b) {
        switch (op) {
            case Tok::Eq: return a == b;
            case Tok::Neq: return a != b;
            case Tok::Lt: return a < b;
            case Tok::Le: return a <= b;
            case Tok::Gt: return a > b;
            default: return a >= b;
        }
    }

    Formula compare_value(const std::string& var, const std::vector<std::string>& dom, Tok op,
                          const std::string& value) {
        std::vector<long> nums;
        if (op == Tok::Eq || op == Tok::Neq) {
            if (std::find(dom.begin(), dom.end(), value) == dom.end())
                lx.fail("value '" + value + "' not in the domain of '" + var + "'");
            Formula a = Formula::atom(Vocabulary::value_atom(var, value));
            return op == Tok::Eq ? a : Formula::not_(a);
        }
        if (!numeric_domain(dom, nums))
            lx.fail("ordering comparisons need an integer-valued variable ('" + var + "')");
        long rhs = 0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), rhs);
        if (ec != std::errc() || p != value.data() + value.size())
            lx.fail("ordering comparisons need an integer value, found '" + value + "'");
        std::vector<Formula> cases;
        for (std::size_t i = 0; i < dom.size(); ++i)
            if (cmp(nums[i], op, rhs))
                cases.push_back(Formula::atom(Vocabulary::value_atom(var, dom[i])));
        return Formula::or_all(cases);
    }

    Formula compare_vars(const std::string& v1, const std::vector<std::string>& d1, Tok op,
                         const std::string& v2, const std::vector<std::string>& d2, long offset) {
        std::vector<long> n1, n2;
        if (!numeric_domain(d1, n1) || !numeric_domain(d2, n2)) {
            if (op != Tok::Eq && op != Tok::Neq)
                lx.fail("ordering comparisons need integer-valued variables");
            if (offset != 0) lx.fail("offsets need integer-valued variables");
            // shared-value equality for enums
            std::vector<Formula> eq_cases;
            for (const auto& val : d1)
                if (std::find(d2.begin(), d2.end(), val) != d2.end())
                    eq_cases.push_back(
                        Formula::and_(Formula::atom(Vocabulary::value_atom(v1, val)),
                                      Formula::atom(Vocabulary::value_atom(v2, val))));
            Formula eq = Formula::or_all(eq_cases);
            return op == Tok::Eq ? eq : Formula::not_(eq);
        }
        std::vector<Formula> cases;
        for (std::size_t i = 0; i < d1.size(); ++i)
            for (std::size_t j = 0; j < d2.size(); ++j)
                if (cmp(n1[i], op, n2[j] + offset))
                    cases.push_back(
                        Formula::and_(Formula::atom(Vocabulary::value_atom(v1, d1[i])),
                                      Formula::atom(Vocabulary::value_atom(v2, d2[j]))));
        return Formula::or_all(cases);
    }
};

Formula parse_formula_text(const std::string& text, const VarTable& vars, int base_line) {
    Lexer lx(text, base_line);
    FormulaParser p{lx, vars};
    Formula f = p.parse();
    if (lx.cur.kind != Tok::End) lx.fail("trailing input after formula: '" + lx.cur.text + "'");
    return f;
}

//=================================================================================================
// Line-oriented scenario reader

struct RawLine {
    int number = 0;
    std::string text; // comment-stripped, trimmed
};

std::vector<RawLine> split_lines(const std::string& text) {
    std::vector<RawLine> out;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        n++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t\r");
        out.push_back({n, line.substr(begin, end - begin + 1)});
    }
    return out;
}

const std::vector<std::string> kSections = {
    "HORIZON", "VARS",      "OBSERVABLE", "ACTIONS",   "TRANS",     "INIT",
    "HISTORY", "EVIDENCE",  "GOALS_A",    "WEIGHTS_A", "GOALS_B",   "WEIGHTS_B",
    "B_KNOWS", "B_COMMITS", "B_ADOPTS",   "JOINT_WEIGHTS"};

// "SECTION:" or "SECTION: inline content"
bool match_section(const RawLine& l, std::string& name, std::string& inline_content) {
    auto colon = l.text.find(':');
    if (colon == std::string::npos) return false;
    std::string head = l.text.substr(0, colon);
    if (std::find(kSections.begin(), kSections.end(), head) == kSections.end()) return false;
    name = head;
    inline_content = l.text.substr(colon + 1);
    auto begin = inline_content.find_first_not_of(" \t");
    inline_content = begin == std::string::npos ? "" : inline_content.substr(begin);
    return true;
}

std::vector<std::pair<std::string, std::string>> parse_assignments(const std::string& text,
                                                                   int line) {
    std::vector<std::pair<std::string, std::string>> out;
    Lexer lx(text, line);
    if (lx.cur.kind == Tok::End) return out;
    for (;;) {
        Token var = lx.expect(Tok::Ident, "variable name");
        lx.expect(Tok::Eq, "'='");
        if (lx.cur.kind != Tok::Ident && lx.cur.kind != Tok::Int)
            lx.fail("expected a value");
        out.push_back({var.text, lx.cur.text});
        lx.advance();
        if (!lx.accept(Tok::Comma)) break;
    }
    if (lx.cur.kind != Tok::End) lx.fail("trailing input after assignments");
    return out;
}

std::vector<std::string> parse_name_list(const std::string& text, int line) {
    std::vector<std::string> out;
    Lexer lx(text, line);
    if (lx.cur.kind == Tok::End) return out;
    for (;;) {
        out.push_back(lx.expect(Tok::Ident, "name").text);
        if (!lx.accept(Tok::Comma)) break;
    }
    if (lx.cur.kind != Tok::End) lx.fail("trailing input after name list");
    return out;
}

// "{n1, n2}: w"
std::pair<std::vector<std::string>, long> parse_weight_line(const std::string& text, int line) {
    Lexer lx(text, line);
    lx.expect(Tok::LBrace, "'{'");
    std::vector<std::string> names;
    if (lx.cur.kind != Tok::RBrace) {
        for (;;) {
            names.push_back(lx.expect(Tok::Ident, "goal name").text);
            if (!lx.accept(Tok::Comma)) break;
        }
    }
    lx.expect(Tok::RBrace, "'}'");
    lx.expect(Tok::Colon, "':'");
    bool negative = lx.accept(Tok::Minus);
    Token w = lx.expect(Tok::Int, "weight");
    if (lx.cur.kind != Tok::End) lx.fail("trailing input after weight");
    std::sort(names.begin(), names.end());
    return {names, negative ? -w.value : w.value};
}

std::pair<std::string, std::string> split_name_colon(const std::string& text, int line) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'name: ...'", line, 1);
    std::string name = text.substr(0, colon);
    auto e = name.find_last_not_of(" \t");
    if (e == std::string::npos) throw ParseError("missing name before ':'", line, 1);
    name = name.substr(0, e + 1);
    std::string rest = text.substr(colon + 1);
    auto b = rest.find_first_not_of(" \t");
    rest = b == std::string::npos ? "" : rest.substr(b);
    for (char c : name)
        if (!std::isalnum((unsigned char)c) && c != '_')
            throw ParseError("invalid name '" + name + "'", line, 1);
    return {name, rest};
}

} // namespace

//=================================================================================================

InformationBase Scenario::information_base() const {
    InformationBase base;
    base.evidence = evidence;
    return base;
}

Formula parse_formula(const std::string& text) {
    VarTable vt;
    return parse_formula_text(text, vt, 1);
}

static VarTable table_for(const Scenario& s) {
    VarTable vt;
    vt.typed = true;
    for (const auto& v : s.world.vars) vt.domains[v.name] = v.values;
    vt.domains["act_A"] = s.world.actions.a;
    vt.domains["act_B"] = s.world.actions.b;
    vt.domains["act_env"] = s.world.actions.env;
    return vt;
}

Formula parse_formula(const std::string& text, const Scenario& scenario) {
    VarTable vt = table_for(scenario);
    return parse_formula_text(text, vt, 1);
}

Scenario parse_scenario(const std::string& text) {
    Scenario s;
    s.world.observations.clear();

    auto lines = split_lines(text);
    // group lines by section
    std::map<std::string, std::vector<RawLine>> sections;
    std::map<std::string, int> section_line;
    std::string current;
    for (const auto& l : lines) {
        std::string name, inline_content;
        if (match_section(l, name, inline_content)) {
            if (sections.count(name))
                throw ParseError("duplicate section " + name, l.number, 1);
            sections[name];
            section_line[name] = l.number;
            current = name;
            if (!inline_content.empty()) sections[name].push_back({l.number, inline_content});
            continue;
        }
        if (current.empty())
            throw ParseError("content before any section header: '" + l.text + "'", l.number, 1);
        sections[current].push_back(l);
    }

    for (const auto& required : {"HORIZON", "VARS", "ACTIONS", "INIT", "GOALS_A"})
        if (!sections.count(required))
            throw ParseError(std::string("missing required section ") + required, 1, 1);

    // HORIZON
    {
        const auto& ls = sections["HORIZON"];
        if (ls.size() != 1) throw ParseError("HORIZON needs exactly one value",
                                             section_line["HORIZON"], 1);
        Lexer lx(ls[0].text, ls[0].number);
        Token h = lx.expect(Tok::Int, "horizon");
        if (lx.cur.kind != Tok::End) lx.fail("trailing input after horizon");
        s.world.horizon = (int)h.value;
    }

    // VARS
    {
        const auto& ls = sections["VARS"];
        if (ls.empty())
            throw ParseError("VARS section declares no variables", section_line["VARS"], 1);
        for (const auto& l : ls) {
            Lexer lx(l.text, l.number);
            Token name = lx.expect(Tok::Ident, "variable name");
            if (is_keyword(name.text) || name.text == "act_A" || name.text == "act_B" ||
                name.text == "act_env")
                lx.fail("'" + name.text + "' is reserved");
            lx.expect(Tok::Colon, "':'");
            StateVar var;
            var.name = name.text;
            if (lx.cur.kind == Tok::Int) {
                Token lo = lx.expect(Tok::Int, "range start");
                lx.expect(Tok::DotDot, "'..'");
                Token hi = lx.expect(Tok::Int, "range end");
                if (hi.value < lo.value) lx.fail("empty range");
                if (hi.value - lo.value > 63) lx.fail("range too large (over 64 values)");
                for (long v = lo.value; v <= hi.value; ++v) var.values.push_back(std::to_string(v));
            } else {
                lx.expect(Tok::LBrace, "'{' or integer range");
                for (;;) {
                    if (lx.cur.kind != Tok::Ident && lx.cur.kind != Tok::Int)
                        lx.fail("expected a domain value");
                    var.values.push_back(lx.cur.text);
                    lx.advance();
                    if (!lx.accept(Tok::Comma)) break;
                }
                lx.expect(Tok::RBrace, "'}'");
            }
            if (lx.cur.kind != Tok::End) lx.fail("trailing input after variable declaration");
            for (const auto& existing : s.world.vars)
                if (existing.name == var.name)
                    throw ParseError("duplicate variable '" + var.name + "'", l.number, 1);
            s.decl_lines["var:" + var.name] = l.number;
            s.world.vars.push_back(std::move(var));
        }
    }

    // ACTIONS
    {
        for (const auto& l : sections["ACTIONS"]) {
            auto [slot, rest] = split_name_colon(l.text, l.number);
            auto acts = parse_name_list(rest, l.number);
            if (acts.empty()) throw ParseError("empty action list for " + slot, l.number, 1);
            if (slot == "A") s.world.actions.a = acts;
            else if (slot == "B") s.world.actions.b = acts;
            else if (slot == "Env") s.world.actions.env = acts;
            else throw ParseError("unknown agent '" + slot + "' (use A, B, Env)", l.number, 1);
        }
        if (s.world.actions.a.empty())
            throw ParseError("ACTIONS declares no actions for A", section_line["ACTIONS"], 1);
        if (s.world.actions.b.empty())
            throw ParseError("ACTIONS declares no actions for B", section_line["ACTIONS"], 1);
        if (s.world.actions.env.empty()) s.world.actions.env = {"tick"};
    }

    VarTable vt = table_for(s);

    // OBSERVABLE
    if (sections.count("OBSERVABLE")) {
        for (const auto& l : sections["OBSERVABLE"])
            for (const auto& name : parse_name_list(l.text, l.number)) {
                if (!s.world.find_var(name))
                    throw ParseError("observable '" + name + "' is not a declared state variable",
                                     l.number, 1);
                s.observables.push_back(name);
            }
    }

    // TRANS
    if (sections.count("TRANS")) {
        for (const auto& l : sections["TRANS"]) {
            TransitionRule rule;
            Lexer lx(l.text, l.number);
            lx.expect(Tok::LParen, "'('");
            auto pattern_tok = [&]() -> std::string {
                if (lx.accept(Tok::Star)) return "*";
                return lx.expect(Tok::Ident, "action or '*'").text;
            };
            rule.actions.a = pattern_tok();
            lx.expect(Tok::Comma, "','");
            rule.actions.b = pattern_tok();
            lx.expect(Tok::Comma, "','");
            rule.actions.env = pattern_tok();
            lx.expect(Tok::RParen, "')'");
            lx.expect(Tok::Colon, "':'");
            // guard runs to '=>' which the formula grammar cannot contain
            auto fat = l.text.find("=>");
            if (fat == std::string::npos)
                throw ParseError("transition rule needs '=> effects'", l.number, 1);
            std::string guard_text = l.text.substr((std::size_t)(lx.cur.col - 1),
                                                   fat - (std::size_t)(lx.cur.col - 1));
            rule.guard = parse_formula_text(guard_text, vt, l.number);
            // effects
            Lexer ex(l.text.substr(fat + 2), l.number);
            for (;;) {
                Token var = ex.expect(Tok::Ident, "assigned variable");
                if (!s.world.find_var(var.text)) ex.fail("unknown variable '" + var.text + "'");
                ex.expect(Tok::Prime, "'");
                ex.expect(Tok::Eq, "'='");
                TransitionRule::Effect eff;
                eff.var = var.text;
                if (ex.cur.kind == Tok::Ident && s.world.find_var(ex.cur.text)) {
                    eff.src = ex.cur.text;
                    ex.advance();
                    if (ex.cur.kind == Tok::Plus || ex.cur.kind == Tok::Minus) {
                        bool neg = ex.cur.kind == Tok::Minus;
                        ex.advance();
                        Token off = ex.expect(Tok::Int, "offset");
                        eff.delta = (int)(neg ? -off.value : off.value);
                    }
                } else if (ex.cur.kind == Tok::Ident || ex.cur.kind == Tok::Int) {
                    eff.value = ex.cur.text;
                    ex.advance();
                } else {
                    ex.fail("expected a value or source variable");
                }
                rule.effects.push_back(std::move(eff));
                if (!ex.accept(Tok::Comma)) break;
            }
            if (ex.cur.kind != Tok::End) ex.fail("trailing input after effects");
            s.rule_texts.push_back(l.text);
            s.world.rules.push_back(std::move(rule));
        }
    }

    // INIT + HISTORY -> observations
    {
        std::vector<std::pair<std::string, std::string>> init;
        for (const auto& l : sections["INIT"]) {
            auto part = parse_assignments(l.text, l.number);
            init.insert(init.end(), part.begin(), part.end());
        }
        s.world.observations.push_back(std::move(init));
        if (sections.count("HISTORY")) {
            for (const auto& l : sections["HISTORY"]) {
                std::string body = l.text;
                if (body.rfind("-", 0) == 0) body = body.substr(1);
                s.world.observations.push_back(parse_assignments(body, l.number));
            }
        }
        for (std::size_t pos = 0; pos < s.world.observations.size(); ++pos)
            for (const auto& [var, val] : s.world.observations[pos]) {
                const auto* dom = vt.find(var);
                if (!dom || var.rfind("act_", 0) == 0)
                    throw ParseError("observation of undeclared variable '" + var + "'",
                                     section_line["INIT"], 1);
                if (std::find(dom->begin(), dom->end(), val) == dom->end())
                    throw ParseError("value '" + val + "' not in the domain of '" + var + "'",
                                     section_line["INIT"], 1);
            }
    }

    // EVIDENCE
    if (sections.count("EVIDENCE")) {
        for (const auto& l : sections["EVIDENCE"]) {
            auto [name, rest] = split_name_colon(l.text, l.number);
            if (s.evidence.index_of(name) >= 0)
                throw ParseError("duplicate evidence atom '" + name + "'", l.number, 1);
            EvidenceItem item;
            item.atom = name;
            item.body = parse_formula_text(rest, vt, l.number);
            item.tag = "sensor";
            s.formula_texts["evidence:" + name] = rest;
            s.decl_lines["evidence:" + name] = l.number;
            s.evidence.items.push_back(std::move(item));
        }
    }
    s.evidence.vocab = s.world.vocabulary();

    auto parse_goals = [&](const char* section, GoalSet& gs, const char* key) {
        if (!sections.count(section)) return;
        for (const auto& l : sections[section]) {
            auto [name, rest] = split_name_colon(l.text, l.number);
            if (gs.find_goal(name))
                throw ParseError("duplicate goal '" + name + "'", l.number, 1);
            gs.goals.push_back({name, parse_formula_text(rest, vt, l.number)});
            s.formula_texts[std::string(key) + ":" + name] = rest;
            s.decl_lines[std::string(key) + ":" + name] = l.number;
        }
    };
    parse_goals("GOALS_A", s.goals_a, "goal_a");
    parse_goals("GOALS_B", s.believed_goals_b, "goal_b");

    auto parse_weights = [&](const char* section, GoalSet& gs) {
        if (!sections.count(section)) return;
        for (const auto& l : sections[section]) {
            auto [names, w] = parse_weight_line(l.text, l.number);
            for (const auto& n : names)
                if (!gs.find_goal(n))
                    throw ParseError("weight references undeclared goal '" + n + "'", l.number, 1);
            if (gs.weights.count(names))
                throw ParseError("duplicate weight entry", l.number, 1);
            gs.weights[names] = (int)w;
        }
    };
    parse_weights("WEIGHTS_A", s.goals_a);
    parse_weights("WEIGHTS_B", s.believed_goals_b);

    if (sections.count("B_KNOWS")) {
        for (const auto& l : sections["B_KNOWS"]) {
            auto [name, rest] = split_name_colon(l.text, l.number);
            s.coop.b_knows.push_back({name, parse_formula_text(rest, vt, l.number)});
            s.formula_texts["b_knows:" + name] = rest;
            s.decl_lines["b_knows:" + name] = l.number;
        }
    }
    if (sections.count("B_COMMITS")) {
        for (const auto& l : sections["B_COMMITS"]) {
            auto [name, rest] = split_name_colon(l.text, l.number);
            s.coop.b_commits.push_back({name, parse_formula_text(rest, vt, l.number)});
            s.formula_texts["b_commits:" + name] = rest;
            s.decl_lines["b_commits:" + name] = l.number;
        }
    }
    if (sections.count("B_ADOPTS")) {
        for (const auto& l : sections["B_ADOPTS"])
            for (const auto& name : parse_name_list(l.text, l.number)) {
                if (!s.goals_a.find_goal(name))
                    throw ParseError("B_ADOPTS references undeclared A goal '" + name + "'",
                                     l.number, 1);
                s.coop.b_adopts.push_back(name);
            }
    }
    if (sections.count("JOINT_WEIGHTS")) {
        std::map<std::vector<std::string>, int> jw;
        for (const auto& l : sections["JOINT_WEIGHTS"]) {
            auto [names, w] = parse_weight_line(l.text, l.number);
            for (const auto& n : names)
                if (!s.goals_a.find_goal(n) && !s.believed_goals_b.find_goal(n))
                    throw ParseError("JOINT_WEIGHTS references undeclared goal '" + n + "'",
                                     l.number, 1);
            jw[names] = (int)w;
        }
        s.coop.joint_weights = std::move(jw);
    }

    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("scenario: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

//=================================================================================================
// Validation

namespace {

bool formula_has_past(const Formula& f) {
    switch (f.op()) {
        case Op::Bottom:
        case Op::Atom: return false;
        case Op::Prev:
        case Op::Since: return true;
        case Op::Believes:
        case Op::Next: return formula_has_past(f.lhs());
        default: return formula_has_past(f.lhs()) || formula_has_past(f.rhs());
    }
}

std::set<std::string> formula_vars(const Formula& f) {
    std::set<std::string> out;
    for (const auto& a : f.atoms()) {
        auto eq = a.find('=');
        out.insert(eq == std::string::npos ? a : a.substr(0, eq));
    }
    return out;
}

} // namespace

std::vector<Diagnostic> validate(const Scenario& s) {
    std::vector<Diagnostic> diags;
    auto error = [&](int line, const std::string& msg) {
        diags.push_back({Diagnostic::Severity::Error, line, msg});
    };
    auto warning = [&](int line, const std::string& msg) {
        diags.push_back({Diagnostic::Severity::Warning, line, msg});
    };
    auto line_of = [&](const std::string& key) {
        auto it = s.decl_lines.find(key);
        return it == s.decl_lines.end() ? 0 : it->second;
    };

    if (s.world.horizon < 1) error(0, "horizon must be >= 1");

    // pairwise-disjoint action alphabets
    std::map<std::string, std::string> action_owner;
    for (const auto& [slot, acts] :
         {std::make_pair(std::string("A"), s.world.actions.a),
          std::make_pair(std::string("B"), s.world.actions.b),
          std::make_pair(std::string("Env"), s.world.actions.env)}) {
        for (const auto& a : acts) {
            auto [it, fresh] = action_owner.emplace(a, slot);
            if (!fresh)
                error(0, "action '" + a + "' declared for both " + it->second + " and " + slot);
        }
    }

    // weights must be natural numbers
    auto check_weights = [&](const GoalSet& gs, const char* which) {
        for (const auto& [key, w] : gs.weights)
            if (w < 0) error(0, std::string(which) + ": weights must be natural numbers");
    };
    check_weights(s.goals_a, "WEIGHTS_A");
    check_weights(s.believed_goals_b, "WEIGHTS_B");
    if (s.coop.joint_weights)
        for (const auto& [key, w] : *s.coop.joint_weights)
            if (w < 0) error(0, "JOINT_WEIGHTS: weights must be natural numbers");

    // goal names must be globally unique so joint tables are unambiguous
    for (const auto& g : s.believed_goals_b.goals)
        if (s.goals_a.find_goal(g.first))
            error(line_of("goal_b:" + g.first),
                  "goal '" + g.first + "' is declared for both A and B");

    // temporal depth within the horizon
    auto check_depth = [&](const std::string& key, const std::string& name, const Formula& f) {
        if (f.future_depth() > s.world.horizon)
            error(line_of(key), "'" + name + "' looks " + std::to_string(f.future_depth()) +
                                    " steps ahead but the horizon is " +
                                    std::to_string(s.world.horizon));
    };
    for (const auto& [name, f] : s.goals_a.goals) check_depth("goal_a:" + name, name, f);
    for (const auto& [name, f] : s.believed_goals_b.goals) check_depth("goal_b:" + name, name, f);
    for (const auto& [name, f] : s.coop.b_commits) check_depth("b_commits:" + name, name, f);
    for (const auto& item : s.evidence.items)
        check_depth("evidence:" + item.atom, item.atom, item.body);

    // evidence bodies must be epistemic-free
    for (const auto& item : s.evidence.items)
        if (item.body.contains_believes())
            error(line_of("evidence:" + item.atom),
                  "evidence '" + item.atom + "' contains a belief operator");

    // unreferenced evidence: no variable overlap with goals, observables or
    // the transition structure
    std::set<std::string> relevant(s.observables.begin(), s.observables.end());
    for (const auto& [name, f] : s.goals_a.goals)
        for (const auto& v : formula_vars(f)) relevant.insert(v);
    for (const auto& [name, f] : s.believed_goals_b.goals)
        for (const auto& v : formula_vars(f)) relevant.insert(v);
    for (const auto& rule : s.world.rules) {
        for (const auto& v : formula_vars(rule.guard)) relevant.insert(v);
        for (const auto& eff : rule.effects) {
            relevant.insert(eff.var);
            if (eff.src) relevant.insert(*eff.src);
        }
    }
    for (const auto& item : s.evidence.items) {
        bool touches = false;
        for (const auto& v : formula_vars(item.body)) touches = touches || relevant.count(v);
        if (!touches)
            warning(line_of("evidence:" + item.atom),
                    "evidence '" + item.atom + "' mentions no goal or observable variable");
    }

    // goals of Believes kind cannot be model-checked
    for (const auto& [name, f] : s.goals_a.goals)
        if (f.contains_believes())
            error(line_of("goal_a:" + name), "goal '" + name + "' contains a belief operator");
    for (const auto& [name, f] : s.believed_goals_b.goals)
        if (f.contains_believes())
            error(line_of("goal_b:" + name), "goal '" + name + "' contains a belief operator");

    // past operators in guards were rejected at parse time via world checks;
    // here flag past operators in goals (allowed) only when they look beyond
    // the recorded history -- informational, so no diagnostic.

    return diags;
}

//=================================================================================================
// Printing

namespace {

std::string print_domain(const StateVar& v) {
    // contiguous integer ranges print as a..b
    std::vector<long> nums;
    if (numeric_domain(v.values, nums) && nums.size() > 1) {
        bool contiguous = true;
        for (std::size_t i = 1; i < nums.size(); ++i)
            contiguous = contiguous && nums[i] == nums[i - 1] + 1;
        if (contiguous)
            return std::to_string(nums.front()) + ".." + std::to_string(nums.back());
    }
    std::string out = "{";
    for (std::size_t i = 0; i < v.values.size(); ++i) out += (i ? ", " : "") + v.values[i];
    return out + "}";
}

std::string print_assignments(const std::vector<std::pair<std::string, std::string>>& a) {
    std::string out;
    for (std::size_t i = 0; i < a.size(); ++i)
        out += (i ? ", " : "") + a[i].first + "=" + a[i].second;
    return out;
}

} // namespace

std::string print_scenario(const Scenario& s) {
    std::string out;
    out += "HORIZON: " + std::to_string(s.world.horizon) + "\n\n";
    out += "VARS:\n";
    for (const auto& v : s.world.vars) out += "  " + v.name + " : " + print_domain(v) + "\n";
    if (!s.observables.empty()) {
        out += "\nOBSERVABLE: ";
        for (std::size_t i = 0; i < s.observables.size(); ++i)
            out += (i ? ", " : "") + s.observables[i];
        out += "\n";
    }
    out += "\nACTIONS:\n";
    auto print_acts = [&](const char* slot, const std::vector<std::string>& acts) {
        out += std::string("  ") + slot + ": ";
        for (std::size_t i = 0; i < acts.size(); ++i) out += (i ? ", " : "") + acts[i];
        out += "\n";
    };
    print_acts("A", s.world.actions.a);
    print_acts("B", s.world.actions.b);
    print_acts("Env", s.world.actions.env);
    if (!s.rule_texts.empty()) {
        out += "\nTRANS:\n";
        for (const auto& r : s.rule_texts) out += "  " + r + "\n";
    }
    out += "\nINIT: " + print_assignments(s.world.observations.at(0)) + "\n";
    if (s.world.observations.size() > 1) {
        out += "\nHISTORY:\n";
        for (std::size_t i = 1; i < s.world.observations.size(); ++i)
            out += "  - " + print_assignments(s.world.observations[i]) + "\n";
    }
    auto text_of = [&](const std::string& key) { return s.formula_texts.at(key); };
    if (!s.evidence.items.empty()) {
        out += "\nEVIDENCE:\n";
        for (const auto& item : s.evidence.items)
            out += "  " + item.atom + ": " + text_of("evidence:" + item.atom) + "\n";
    }
    auto print_goalset = [&](const char* header, const GoalSet& gs, const char* key) {
        if (gs.goals.empty()) return;
        out += std::string("\n") + header + ":\n";
        for (const auto& [name, f] : gs.goals)
            out += "  " + name + ": " + text_of(std::string(key) + ":" + name) + "\n";
    };
    auto print_weight_table = [&](const char* header,
                                  const std::map<std::vector<std::string>, int>& w) {
        if (w.empty()) return;
        out += std::string("\n") + header + ":\n";
        for (const auto& [names, weight] : w) {
            out += "  {";
            for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
            out += "}: " + std::to_string(weight) + "\n";
        }
    };
    print_goalset("GOALS_A", s.goals_a, "goal_a");
    print_weight_table("WEIGHTS_A", s.goals_a.weights);
    print_goalset("GOALS_B", s.believed_goals_b, "goal_b");
    print_weight_table("WEIGHTS_B", s.believed_goals_b.weights);
    if (!s.coop.b_knows.empty()) {
        out += "\nB_KNOWS:\n";
        for (const auto& [name, f] : s.coop.b_knows)
            out += "  " + name + ": " + text_of("b_knows:" + name) + "\n";
    }
    if (!s.coop.b_commits.empty()) {
        out += "\nB_COMMITS:\n";
        for (const auto& [name, f] : s.coop.b_commits)
            out += "  " + name + ": " + text_of("b_commits:" + name) + "\n";
    }
    if (!s.coop.b_adopts.empty()) {
        out += "\nB_ADOPTS: ";
        for (std::size_t i = 0; i < s.coop.b_adopts.size(); ++i)
            out += (i ? ", " : "") + s.coop.b_adopts[i];
        out += "\n";
    }
    if (s.coop.joint_weights) print_weight_table("JOINT_WEIGHTS", *s.coop.joint_weights);
    return out;
}

} // namespace cfl
