#ifndef LEFKIT_SCENARIO_HPP
#define LEFKIT_SCENARIO_HPP

#include "lefkit/rational.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace lefkit {

struct Pos {
    std::size_t line = 0;
    std::size_t col = 0;
};

/// Error tied to a source position; `expected` lists acceptable tokens when known.
class ScenarioError : public Error {
public:
    ScenarioError(Pos p, const std::string& msg, std::vector<std::string> expected = {})
        : Error(format(p, msg, expected)), pos(p), expected(std::move(expected))
    {
    }

    Pos pos;
    std::vector<std::string> expected;

private:
    static std::string format(Pos p, const std::string& msg, const std::vector<std::string>& exp)
    {
        std::string s = std::to_string(p.line) + ":" + std::to_string(p.col) + ": " + msg;
        if (!exp.empty()) {
            s += " (expected ";
            for (std::size_t i = 0; i < exp.size(); ++i) {
                s += (i ? ", " : "") + exp[i];
            }
            s += ")";
        }
        return s;
    }
};

struct Value {
    enum class Kind { Rational, Name, List, Tuple };
    Kind kind = Kind::Rational;
    Q q;
    std::string name;
    int sign = 0;  ///< for names: ±1 when written with a sign prefix
    std::vector<Value> items;
    Pos pos;

    static Value rational(Q v) { return Value{Kind::Rational, std::move(v), {}, 0, {}, {}}; }
    static Value ident(std::string n, int s = 0) { return Value{Kind::Name, 0, std::move(n), s, {}, {}}; }
    static Value list(std::vector<Value> v = {}) { return Value{Kind::List, 0, {}, 0, std::move(v), {}}; }
    static Value tuple(std::vector<Value> v) { return Value{Kind::Tuple, 0, {}, 0, std::move(v), {}}; }

    bool operator==(const Value& o) const
    {
        return kind == o.kind && q == o.q && name == o.name && sign == o.sign && items == o.items;
    }
};

struct Field {
    std::string key;
    Value value;
    Pos pos;

    bool operator==(const Field& o) const { return key == o.key && value == o.value; }
};

struct Block {
    std::string kind;
    std::string name;
    std::vector<Field> fields;
    Pos pos;

    std::vector<const Field*> all(const std::string& key) const
    {
        std::vector<const Field*> out;
        for (const auto& f : fields) {
            if (f.key == key) {
                out.push_back(&f);
            }
        }
        return out;
    }
    const Field* get(const std::string& key) const
    {
        auto v = all(key);
        if (v.size() > 1) {
            throw ScenarioError(v[1]->pos, "field '" + key + "' given twice in " + kind + " '" + name + "'");
        }
        return v.empty() ? nullptr : v[0];
    }
    void add(std::string key, Value v) { fields.push_back({std::move(key), std::move(v), {}}); }
};

struct ScenarioDoc {
    std::vector<Block> blocks;

    const Block* find(const std::string& kind, const std::string& name) const
    {
        for (const auto& b : blocks) {
            if (b.kind == kind && b.name == name) {
                return &b;
            }
        }
        return nullptr;
    }
};

inline const std::vector<std::string>& block_kinds()
{
    static const std::vector<std::string> k{"complex", "sheaf",        "map",      "hom",           "fan", "conic_sheaf",
                                            "fiber_endo", "normal_model", "function", "test_function", "task"};
    return k;
}

/// Fields stable-sorted by key: the canonical order.
inline ScenarioDoc canonical(ScenarioDoc d)
{
    for (auto& b : d.blocks) {
        std::stable_sort(b.fields.begin(), b.fields.end(),
                         [](const Field& x, const Field& y) { return x.key < y.key; });
    }
    return d;
}

inline bool equivalent(const ScenarioDoc& a, const ScenarioDoc& b)
{
    auto ca = canonical(a);
    auto cb = canonical(b);
    if (ca.blocks.size() != cb.blocks.size()) {
        return false;
    }
    for (std::size_t i = 0; i < ca.blocks.size(); ++i) {
        const auto& x = ca.blocks[i];
        const auto& y = cb.blocks[i];
        if (x.kind != y.kind || x.name != y.name || !(x.fields == y.fields)) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------------------
// parsing

namespace detail {

inline bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool name_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':';
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    ScenarioDoc run()
    {
        ScenarioDoc doc;
        std::set<std::pair<std::string, std::string>> names;
        for (;;) {
            skip_blank_lines();
            if (at_end()) {
                break;
            }
            Pos p = pos();
            std::string w = word();
            if (w != "begin") {
                throw ScenarioError(p, w.empty() ? "unexpected character '" + std::string(1, peek()) + "'"
                                                 : "unexpected '" + w + "'",
                                    {"'begin'"});
            }
            doc.blocks.push_back(block(p));
            const Block& b = doc.blocks.back();
            if (!names.insert({b.kind, b.name}).second) {
                throw ScenarioError(p, b.kind + " '" + b.name + "' is defined twice");
            }
        }
        return doc;
    }

private:
    Block block(Pos start)
    {
        Block b;
        b.pos = start;
        skip_spaces();
        Pos kp = pos();
        b.kind = word();
        const auto& kinds = block_kinds();
        if (std::find(kinds.begin(), kinds.end(), b.kind) == kinds.end()) {
            std::vector<std::string> exp;
            for (const auto& k : kinds) {
                exp.push_back(k);
            }
            throw ScenarioError(kp, b.kind.empty() ? "missing block kind" : "unknown block kind '" + b.kind + "'", exp);
        }
        skip_spaces();
        Pos np = pos();
        b.name = name_token();
        if (b.name.empty()) {
            throw ScenarioError(np, "missing block name", {"name"});
        }
        end_of_line();
        for (;;) {
            skip_blank_lines();
            if (at_end()) {
                throw ScenarioError(pos(), "unterminated block '" + b.name + "'", {"'end'"});
            }
            Pos fp = pos();
            std::string key = word();
            if (key == "end") {
                end_of_line();
                return b;
            }
            if (key == "begin") {
                throw ScenarioError(fp, "block '" + b.name + "' is not closed before the next block", {"'end'"});
            }
            if (key.empty()) {
                throw ScenarioError(fp, "unexpected character '" + std::string(1, peek()) + "'", {"field name", "'end'"});
            }
            skip_spaces();
            if (peek() != '=') {
                throw ScenarioError(pos(), "missing '=' after field '" + key + "'", {"'='"});
            }
            ++i_;
            skip_spaces();
            Field f{key, value(), fp};
            end_of_line();
            b.fields.push_back(std::move(f));
        }
    }

    Value value()
    {
        skip_spaces(depth_ > 0);
        Pos p = pos();
        char c = peek();
        Value v;
        if (c == '[' || c == '(') {
            const char close = c == '[' ? ']' : ')';
            ++i_;
            ++depth_;
            v = c == '[' ? Value::list() : Value::tuple({});
            skip_spaces(true);
            if (peek() == close) {
                ++i_;
                --depth_;
                if (c == '(') {
                    throw ScenarioError(p, "empty tuple");
                }
                v.pos = p;
                return v;
            }
            for (;;) {
                v.items.push_back(value());
                skip_spaces(true);
                if (peek() == ',') {
                    ++i_;
                    continue;
                }
                if (peek() == close) {
                    ++i_;
                    break;
                }
                throw ScenarioError(pos(), at_end() ? "unterminated list" : "unexpected '" + std::string(1, peek()) + "'",
                                    {"','", std::string("'") + close + "'"});
            }
            --depth_;
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   ((c == '-' || c == '+') && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            v = Value::rational(rational_literal());
        } else if (c == '-' || c == '+') {
            ++i_;
            int s = c == '-' ? -1 : 1;
            Pos np = pos();
            std::string n = name_token();
            if (n.empty()) {
                throw ScenarioError(np, "expected a name after sign", {"name"});
            }
            v = Value::ident(n, s);
        } else {
            std::string n = name_token();
            if (n.empty()) {
                throw ScenarioError(p, at_end() || c == '\n' ? "missing value" : "unexpected '" + std::string(1, c) + "'",
                                    {"rational", "name", "'['", "'('"});
            }
            v = Value::ident(n);
        }
        v.pos = p;
        return v;
    }

    Q rational_literal()
    {
        Pos p = pos();
        std::string s;
        if (peek() == '-' || peek() == '+') {
            s += text_[i_++];
        }
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            s += text_[i_++];
        }
        if (peek() == '/') {
            s += text_[i_++];
            if (!std::isdigit(static_cast<unsigned char>(peek()))) {
                throw ScenarioError(pos(), "malformed rational '" + s + "': missing denominator", {"digit"});
            }
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                s += text_[i_++];
            }
        }
        if (name_char(peek()) || peek() == '/') {
            throw ScenarioError(pos(), "malformed rational: unexpected '" + std::string(1, peek()) + "'");
        }
        auto q = parse_rational(s);
        if (!q) {
            throw ScenarioError(p, "malformed rational '" + s + "'");
        }
        return *q;
    }

    /// Bare names or double-quoted strings.
    std::string name_token()
    {
        if (peek() == '"') {
            Pos p = pos();
            ++i_;
            std::string s;
            while (!at_end() && peek() != '"' && peek() != '\n') {
                if (peek() == '\\' && (peek(1) == '"' || peek(1) == '\\')) {
                    ++i_;
                }
                s += text_[i_++];
            }
            if (peek() != '"') {
                throw ScenarioError(p, "unterminated string", {"'\"'"});
            }
            ++i_;
            if (s.empty()) {
                throw ScenarioError(p, "empty name");
            }
            return s;
        }
        if (!name_start(peek())) {
            return {};
        }
        std::string s;
        while (name_char(peek())) {
            s += text_[i_++];
        }
        return s;
    }

    std::string word()
    {
        std::string s;
        if (!name_start(peek())) {
            return s;
        }
        while (name_char(peek())) {
            s += text_[i_++];
        }
        return s;
    }

    void end_of_line()
    {
        skip_spaces();
        if (peek() == '#') {
            while (!at_end() && peek() != '\n') {
                ++i_;
            }
        }
        if (at_end()) {
            return;
        }
        if (peek() != '\n') {
            throw ScenarioError(pos(), "unexpected '" + std::string(1, peek()) + "' at end of line", {"end of line"});
        }
        advance_newline();
    }

    void skip_spaces(bool newlines = false)
    {
        for (;;) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                ++i_;
            } else if (newlines && c == '\n') {
                advance_newline();
            } else if (newlines && c == '#') {
                while (!at_end() && peek() != '\n') {
                    ++i_;
                }
            } else {
                return;
            }
        }
    }

    void skip_blank_lines()
    {
        for (;;) {
            skip_spaces();
            if (peek() == '#') {
                while (!at_end() && peek() != '\n') {
                    ++i_;
                }
            }
            if (peek() == '\n') {
                advance_newline();
            } else {
                return;
            }
        }
    }

    void advance_newline()
    {
        ++i_;
        ++line_;
        line_start_ = i_;
    }

    bool at_end() const { return i_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const { return i_ + ahead < text_.size() ? text_[i_ + ahead] : '\0'; }
    Pos pos() const { return {line_, i_ - line_start_ + 1}; }

    const std::string& text_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::size_t line_start_ = 0;
    int depth_ = 0;
};

}  // namespace detail

inline ScenarioDoc parse_scenario(const std::string& text) { return detail::Parser(text).run(); }

// ---------------------------------------------------------------------------------------
// emission

inline std::string emit_name(const std::string& n)
{
    bool plain = !n.empty() && detail::name_start(n[0]);
    for (char c : n) {
        plain = plain && detail::name_char(c);
    }
    if (plain && n != "begin" && n != "end") {
        return n;
    }
    std::string s = "\"";
    for (char c : n) {
        if (c == '"' || c == '\\') {
            s += '\\';
        }
        s += c;
    }
    return s + "\"";
}

inline std::string emit_value(const Value& v)
{
    switch (v.kind) {
    case Value::Kind::Rational: return to_string(v.q);
    case Value::Kind::Name: return (v.sign > 0 ? "+" : v.sign < 0 ? "-" : "") + emit_name(v.name);
    case Value::Kind::List:
    case Value::Kind::Tuple: {
        std::string s = v.kind == Value::Kind::List ? "[" : "(";
        for (std::size_t i = 0; i < v.items.size(); ++i) {
            s += (i ? ", " : "") + emit_value(v.items[i]);
        }
        return s + (v.kind == Value::Kind::List ? "]" : ")");
    }
    }
    return {};
}

inline std::string emit_scenario(const ScenarioDoc& doc)
{
    std::string out;
    auto c = canonical(doc);
    for (std::size_t i = 0; i < c.blocks.size(); ++i) {
        const Block& b = c.blocks[i];
        if (i) {
            out += "\n";
        }
        out += "begin " + b.kind + " " + emit_name(b.name) + "\n";
        for (const auto& f : b.fields) {
            out += "  " + f.key + " = " + emit_value(f.value) + "\n";
        }
        out += "end\n";
    }
    return out;
}

/// 64-bit FNV-1a, hex.
inline std::string fnv1a_hex(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

// ---------------------------------------------------------------------------------------
// value helpers for readers and writers

inline Value rational_list(const std::vector<Q>& v)
{
    Value l = Value::list();
    for (const auto& q : v) {
        l.items.push_back(Value::rational(q));
    }
    return l;
}

inline Value name_list(const std::vector<std::string>& v)
{
    Value l = Value::list();
    for (const auto& n : v) {
        l.items.push_back(Value::ident(n));
    }
    return l;
}

inline const Value& expect_kind(const Value& v, Value::Kind k, const char* what)
{
    if (v.kind != k) {
        throw ScenarioError(v.pos, std::string("expected ") + what);
    }
    return v;
}

inline const Q& as_rational(const Value& v) { return expect_kind(v, Value::Kind::Rational, "a rational").q; }

inline long as_integer(const Value& v)
{
    const Q& q = as_rational(v);
    if (denominator(q) != 1) {
        throw ScenarioError(v.pos, "expected an integer");
    }
    return static_cast<long>(numerator(q));
}

inline const std::string& as_name(const Value& v)
{
    expect_kind(v, Value::Kind::Name, "a name");
    if (v.sign != 0) {
        throw ScenarioError(v.pos, "unexpected sign on name");
    }
    return v.name;
}

inline const std::vector<Value>& as_list(const Value& v) { return expect_kind(v, Value::Kind::List, "a list").items; }

inline const std::vector<Value>& as_tuple(const Value& v, std::size_t lo, std::size_t hi)
{
    const auto& t = expect_kind(v, Value::Kind::Tuple, "a tuple").items;
    if (t.size() < lo || t.size() > hi) {
        throw ScenarioError(v.pos, "tuple has " + std::to_string(t.size()) + " entries, expected " +
                                       (lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi)));
    }
    return t;
}

inline std::vector<Q> as_rationals(const Value& v)
{
    std::vector<Q> out;
    for (const auto& x : as_list(v)) {
        out.push_back(as_rational(x));
    }
    return out;
}

}  // namespace lefkit

#endif
