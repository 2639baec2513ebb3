#ifndef LEFKIT_RATIONAL_HPP
#define LEFKIT_RATIONAL_HPP

#include <boost/multiprecision/gmp.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lefkit {

/// Exact rational scalar used for every stalk, matrix entry and trace.
using Q = boost::multiprecision::mpq_rational;
using Z = boost::multiprecision::mpz_int;

/// Raised on any violated precondition or failed validation.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool is_zero(const Q& q) { return q.sign() == 0; }

inline int sign(const Q& q) { return q.sign(); }

/// Canonical text: reduced "p/q", or "p" when the denominator is 1.
inline std::string to_string(const Q& q)
{
    if (boost::multiprecision::denominator(q) == 1) {
        return boost::multiprecision::numerator(q).str();
    }
    return boost::multiprecision::numerator(q).str() + "/" +
           boost::multiprecision::denominator(q).str();
}

namespace detail {

inline bool parse_integer(std::string_view s, Z& out)
{
    if (s.empty()) {
        return false;
    }
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        i = 1;
    }
    if (i == s.size()) {
        return false;
    }
    for (std::size_t j = i; j < s.size(); ++j) {
        if (s[j] < '0' || s[j] > '9') {
            return false;
        }
    }
    std::string digits(s[0] == '+' ? s.substr(1) : s);
    out = Z(digits);
    return true;
}

}  // namespace detail

/// Parses "p", "p/q" or a terminating decimal "1.25". Returns nullopt on malformed input.
inline std::optional<Q> parse_rational(std::string_view s)
{
    auto slash = s.find('/');
    if (slash != std::string_view::npos) {
        Z num;
        Z den;
        if (!detail::parse_integer(s.substr(0, slash), num) ||
            !detail::parse_integer(s.substr(slash + 1), den)) {
            return std::nullopt;
        }
        if (den == 0) {
            return std::nullopt;
        }
        return Q(num, den);
    }
    auto dot = s.find('.');
    if (dot != std::string_view::npos) {
        std::string whole(s.substr(0, dot));
        std::string frac(s.substr(dot + 1));
        if (frac.empty() || frac.find_first_not_of("0123456789") != std::string::npos) {
            return std::nullopt;
        }
        bool neg = !whole.empty() && whole[0] == '-';
        if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) {
            whole.erase(0, 1);
        }
        if (whole.empty()) {
            whole = "0";
        }
        Z w;
        Z f;
        if (!detail::parse_integer(whole, w) || !detail::parse_integer(frac, f)) {
            return std::nullopt;
        }
        Z scale = boost::multiprecision::pow(Z(10), static_cast<unsigned>(frac.size()));
        Q value = Q(w) + Q(f, scale);
        return neg ? Q(-value) : value;
    }
    Z num;
    if (!detail::parse_integer(s, num)) {
        return std::nullopt;
    }
    return Q(num);
}

inline Q rational_or_throw(std::string_view s)
{
    auto q = parse_rational(s);
    if (!q) {
        throw Error("malformed rational '" + std::string(s) + "'");
    }
    return *q;
}

}  // namespace lefkit

#endif
