#ifndef LEFKIT_POLYNOMIAL_HPP
#define LEFKIT_POLYNOMIAL_HPP

#include "lefkit/rational.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lefkit {

/// Univariate polynomial over Q, coefficients stored low degree first.
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<Q> coeffs) : c_(std::move(coeffs)) { trim(); }
    Poly(std::initializer_list<Q> coeffs) : c_(coeffs) { trim(); }

    static Poly constant(const Q& a) { return Poly(std::vector<Q>{a}); }
    static Poly x() { return Poly({Q(0), Q(1)}); }
    /// x - r
    static Poly linear_root(const Q& r) { return Poly({-r, Q(1)}); }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Q>& coeffs() const { return c_; }
    Q coeff(std::size_t k) const { return k < c_.size() ? c_[k] : Q(0); }
    Q leading() const { return c_.empty() ? Q(0) : c_.back(); }

    Q operator()(const Q& t) const
    {
        Q v = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            v = v * t + *it;
        }
        return v;
    }

    Poly monic() const
    {
        if (c_.empty()) {
            return *this;
        }
        Poly p = *this;
        Q lc = p.c_.back();
        for (auto& q : p.c_) {
            q /= lc;
        }
        return p;
    }

    Poly derivative() const
    {
        std::vector<Q> d;
        for (std::size_t k = 1; k < c_.size(); ++k) {
            d.push_back(c_[k] * Q(static_cast<long>(k)));
        }
        return Poly(std::move(d));
    }

    /// p(-x)
    Poly reflect() const
    {
        Poly p = *this;
        for (std::size_t k = 1; k < p.c_.size(); k += 2) {
            p.c_[k] = -p.c_[k];
        }
        return p;
    }

    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

    friend Poly operator+(const Poly& a, const Poly& b)
    {
        std::vector<Q> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t k = 0; k < r.size(); ++k) {
            r[k] = a.coeff(k) + b.coeff(k);
        }
        return Poly(std::move(r));
    }

    friend Poly operator-(const Poly& a) { return Poly() - a; }

    friend Poly operator-(const Poly& a, const Poly& b)
    {
        std::vector<Q> r(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t k = 0; k < r.size(); ++k) {
            r[k] = a.coeff(k) - b.coeff(k);
        }
        return Poly(std::move(r));
    }

    friend Poly operator*(const Poly& a, const Poly& b)
    {
        if (a.is_zero() || b.is_zero()) {
            return {};
        }
        std::vector<Q> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (lefkit::is_zero(a.c_[i])) {
                continue;
            }
            for (std::size_t j = 0; j < b.c_.size(); ++j) {
                r[i + j] += a.c_[i] * b.c_[j];
            }
        }
        return Poly(std::move(r));
    }

    friend Poly operator*(const Q& s, const Poly& a)
    {
        Poly p = a;
        for (auto& q : p.c_) {
            q *= s;
        }
        p.trim();
        return p;
    }

    Poly pow(unsigned e) const
    {
        Poly r = constant(1);
        for (unsigned i = 0; i < e; ++i) {
            r = r * *this;
        }
        return r;
    }

    std::string to_string(char var = 'x') const
    {
        if (c_.empty()) {
            return "0";
        }
        std::string s;
        for (int k = degree(); k >= 0; --k) {
            const Q& a = c_[static_cast<std::size_t>(k)];
            if (lefkit::is_zero(a)) {
                continue;
            }
            Q mag = a < 0 ? Q(-a) : a;
            if (!s.empty()) {
                s += a < 0 ? " - " : " + ";
            } else if (a < 0) {
                s += "-";
            }
            if (k == 0 || mag != 1) {
                s += lefkit::to_string(mag);
            }
            if (k >= 1) {
                s += var;
            }
            if (k >= 2) {
                s += "^" + std::to_string(k);
            }
        }
        return s;
    }

private:
    void trim()
    {
        while (!c_.empty() && lefkit::is_zero(c_.back())) {
            c_.pop_back();
        }
    }

    std::vector<Q> c_;
};

/// Quotient and remainder of a by b.
inline std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b)
{
    if (b.is_zero()) {
        throw Error("polynomial division by zero");
    }
    std::vector<Q> rem = a.coeffs();
    const int db = b.degree();
    const Q lb = b.leading();
    if (a.degree() < db) {
        return {Poly(), a};
    }
    std::vector<Q> quo(static_cast<std::size_t>(a.degree() - db + 1));
    for (int k = a.degree(); k >= db; --k) {
        Q t = rem[static_cast<std::size_t>(k)] / lb;
        quo[static_cast<std::size_t>(k - db)] = t;
        if (is_zero(t)) {
            continue;
        }
        for (int j = 0; j <= db; ++j) {
            rem[static_cast<std::size_t>(k - db + j)] -= t * b.coeff(static_cast<std::size_t>(j));
        }
    }
    return {Poly(std::move(quo)), Poly(std::move(rem))};
}

inline Poly operator%(const Poly& a, const Poly& b) { return divmod(a, b).second; }
inline Poly operator/(const Poly& a, const Poly& b) { return divmod(a, b).first; }

/// Monic greatest common divisor (zero if both are zero).
inline Poly gcd(Poly a, Poly b)
{
    while (!b.is_zero()) {
        Poly r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

struct SquarefreePart {
    Poly factor;        ///< monic, squarefree
    unsigned multiplicity;
};

/// Yun's squarefree decomposition of a nonzero polynomial: p = lc * prod f_i^i.
inline std::vector<SquarefreePart> squarefree_decomposition(const Poly& p)
{
    if (p.is_zero()) {
        throw Error("squarefree decomposition of the zero polynomial");
    }
    std::vector<SquarefreePart> out;
    if (p.degree() == 0) {
        return out;
    }
    Poly a = p.monic();
    Poly da = a.derivative();
    Poly g = gcd(a, da);
    Poly b = a / g;
    Poly c = da / g;
    Poly d = c - b.derivative();
    unsigned i = 1;
    while (b.degree() > 0) {
        Poly f = gcd(b, d);
        if (f.degree() > 0) {
            out.push_back({f, i});
        }
        b = b / f;
        c = d / f;
        d = c - b.derivative();
        ++i;
    }
    return out;
}

namespace detail {

inline std::vector<Z> divisors(Z n)
{
    if (n < 0) {
        n = -n;
    }
    if (n == 0) {
        throw Error("divisors of zero");
    }
    std::vector<std::pair<Z, unsigned>> primes;
    Z m = n;
    for (Z p = 2; p * p <= m; ++p) {
        if (p > Z(100000000)) {
            throw Error("rational root search: coefficient too large to factor");
        }
        unsigned e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        if (e > 0) {
            primes.emplace_back(p, e);
        }
    }
    if (m > 1) {
        primes.emplace_back(m, 1);
    }
    std::vector<Z> divs{Z(1)};
    for (const auto& [p, e] : primes) {
        std::size_t base = divs.size();
        Z pk = 1;
        for (unsigned k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < base; ++i) {
                divs.push_back(divs[i] * pk);
            }
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

/// Integer coefficients with the same roots.
inline std::vector<Z> integer_coefficients(const Poly& p)
{
    Z l = 1;
    for (const auto& q : p.coeffs()) {
        Z d = denominator(q);
        l = l / boost::multiprecision::gcd(l, d) * d;
    }
    std::vector<Z> out;
    Z g = 0;
    for (const auto& q : p.coeffs()) {
        Q scaled = q * Q(l);
        out.push_back(numerator(scaled));
        g = boost::multiprecision::gcd(g, out.back());
    }
    if (g > 1) {
        for (auto& z : out) {
            z /= g;
        }
    }
    return out;
}

}  // namespace detail

/// Distinct rational roots of p (p nonzero), ascending.
inline std::vector<Q> rational_roots(const Poly& p)
{
    std::vector<Q> roots;
    if (p.is_zero()) {
        throw Error("rational roots of the zero polynomial");
    }
    Poly q = p;
    if (q.degree() >= 1 && is_zero(q.coeff(0))) {
        roots.push_back(0);
        std::size_t k = 0;
        while (is_zero(q.coeff(k))) {
            ++k;
        }
        q = Poly(std::vector<Q>(q.coeffs().begin() + static_cast<std::ptrdiff_t>(k), q.coeffs().end()));
    }
    if (q.degree() >= 1) {
        auto z = detail::integer_coefficients(q);
        auto num = detail::divisors(z.front());
        auto den = detail::divisors(z.back());
        std::vector<Q> found;
        for (const auto& b : den) {
            for (const auto& a : num) {
                if (boost::multiprecision::gcd(a, b) != 1) {
                    continue;
                }
                for (int s : {1, -1}) {
                    Q r(Z(a * s), b);
                    if (is_zero(q(r))) {
                        found.push_back(r);
                    }
                }
            }
        }
        roots.insert(roots.end(), found.begin(), found.end());
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

/// Multiplicity of r as a root of p.
inline unsigned root_multiplicity(Poly p, const Q& r)
{
    unsigned m = 0;
    const Poly lin = Poly::linear_root(r);
    while (!p.is_zero() && p.degree() >= 1 && is_zero(p(r))) {
        p = p / lin;
        ++m;
    }
    return m;
}

/// Extended-real endpoint for root counting; nullopt means infinity of the given side.
using Endpoint = std::optional<Q>;

class SturmChain {
public:
    explicit SturmChain(const Poly& p) : SturmChain(p, p.derivative()) {}

    /// Generalized chain p, q, -rem, ... used both for root counts and Cauchy indices.
    SturmChain(const Poly& p, const Poly& q)
    {
        chain_.push_back(p);
        if (q.is_zero()) {
            return;
        }
        chain_.push_back(q);
        while (true) {
            const Poly& a = chain_[chain_.size() - 2];
            const Poly& b = chain_.back();
            Poly r = a % b;
            if (r.is_zero()) {
                break;
            }
            chain_.push_back(-r);
        }
    }

    /// Sign variations at a finite point (zeros dropped).
    std::size_t variations_at(const Q& t) const
    {
        std::vector<int> s;
        for (const auto& p : chain_) {
            s.push_back(sign(p(t)));
        }
        return count(s);
    }

    /// Sign variations at +infinity (positive) or -infinity (negative).
    std::size_t variations_at_infinity(bool positive) const
    {
        std::vector<int> s;
        for (const auto& p : chain_) {
            int lc = sign(p.leading());
            if (!positive && p.degree() % 2 == 1) {
                lc = -lc;
            }
            s.push_back(lc);
        }
        return count(s);
    }

    std::size_t variations(const Endpoint& e, bool is_upper) const
    {
        return e ? variations_at(*e) : variations_at_infinity(is_upper);
    }

    const std::vector<Poly>& polys() const { return chain_; }

private:
    static std::size_t count(const std::vector<int>& s)
    {
        std::size_t v = 0;
        int last = 0;
        for (int x : s) {
            if (x == 0) {
                continue;
            }
            if (last != 0 && x != last) {
                ++v;
            }
            last = x;
        }
        return v;
    }

    std::vector<Poly> chain_;
};

/// Number of distinct real roots of a squarefree p in the open interval (lo, hi).
inline std::size_t count_roots_open(const Poly& p, const Endpoint& lo, const Endpoint& hi)
{
    if (p.degree() <= 0) {
        return 0;
    }
    SturmChain s(p);
    // For squarefree p, V(a) - V(b) counts roots in (a, b].
    long n = static_cast<long>(s.variations(lo, false)) - static_cast<long>(s.variations(hi, true));
    if (hi && is_zero(p(*hi))) {
        --n;
    }
    return static_cast<std::size_t>(n);
}

/// Real roots in (lo, hi) counted with multiplicity.
inline std::size_t count_roots_open_mult(const Poly& p, const Endpoint& lo, const Endpoint& hi)
{
    std::size_t n = 0;
    for (const auto& part : squarefree_decomposition(p)) {
        n += part.multiplicity * count_roots_open(part.factor, lo, hi);
    }
    return n;
}

/// Cauchy index of q/p over the whole real line.
inline long cauchy_index(const Poly& q, const Poly& p)
{
    if (p.degree() <= 0) {
        return 0;
    }
    Poly r = q % p;
    if (r.is_zero()) {
        return 0;
    }
    SturmChain s(p, r);
    return static_cast<long>(s.variations_at_infinity(false)) - static_cast<long>(s.variations_at_infinity(true));
}

/// Root counts of a polynomial relative to the unit circle, with multiplicity.
struct UnitCircleCounts {
    std::size_t inside = 0;
    std::size_t on = 0;
    std::size_t outside = 0;
};

namespace detail {

/// Root counts in the left half plane, on the imaginary axis, and in the right half plane.
struct HalfPlaneCounts {
    std::size_t left = 0;
    std::size_t axis = 0;
    std::size_t right = 0;
};

/// Routh-Hurwitz count for h with no roots on the imaginary axis.
inline HalfPlaneCounts half_plane_regular(const Poly& h)
{
    const int n = h.degree();
    std::vector<Q> a, b;
    for (int k = 0; k <= n; ++k) {
        Q hk = h.coeff(static_cast<std::size_t>(k));
        // i^k = (+1, i, -1, -i)
        switch (k % 4) {
        case 0: a.resize(k + 1); a[k] = hk; break;
        case 1: b.resize(k + 1); b[k] = hk; break;
        case 2: a.resize(k + 1); a[k] = -hk; break;
        default: b.resize(k + 1); b[k] = -hk; break;
        }
    }
    Poly pa(a), pb(b);
    long diff = n % 2 == 0 ? -cauchy_index(pb, pa) : cauchy_index(pa, pb);
    HalfPlaneCounts c;
    c.left = static_cast<std::size_t>((n + diff) / 2);
    c.right = static_cast<std::size_t>((n - diff) / 2);
    return c;
}

inline HalfPlaneCounts half_plane_counts(const Poly& q)
{
    HalfPlaneCounts out;
    Poly d = gcd(q, q.reflect());
    Poly h = q / d;
    auto reg = half_plane_regular(h);
    out.left = reg.left;
    out.right = reg.right;
    if (d.degree() > 0) {
        std::size_t a = 0;
        while (is_zero(d.coeff(a))) {
            ++a;
        }
        // d / w^a is even: E(w^2)
        std::vector<Q> e;
        for (std::size_t k = a; k < d.coeffs().size(); k += 2) {
            e.push_back(d.coeff(k));
        }
        Poly pe(e);
        std::size_t neg = count_roots_open_mult(pe, std::nullopt, Q(0));
        std::size_t axis = a + 2 * neg;
        std::size_t rest = static_cast<std::size_t>(d.degree()) - axis;
        out.axis = axis;
        out.left += rest / 2;
        out.right += rest / 2;
    }
    return out;
}

}  // namespace detail

/// Unit-circle root counts via the Cayley map z = (1 + w) / (1 - w), which sends the
/// open unit disk to the left half plane.
inline UnitCircleCounts unit_circle_counts(const Poly& p)
{
    UnitCircleCounts out;
    if (p.degree() <= 0) {
        return out;
    }
    Poly r = p;
    const Poly zp1 = Poly::linear_root(Q(-1));
    while (r.degree() >= 1 && is_zero(r(Q(-1)))) {
        r = r / zp1;
        ++out.on;
    }
    const int n = r.degree();
    if (n <= 0) {
        return out;
    }
    Poly one_plus({Q(1), Q(1)});
    Poly one_minus({Q(1), Q(-1)});
    Poly q;
    for (int j = 0; j <= n; ++j) {
        q = q + r.coeff(static_cast<std::size_t>(j)) * (one_plus.pow(static_cast<unsigned>(j)) * one_minus.pow(static_cast<unsigned>(n - j)));
    }
    auto hp = detail::half_plane_counts(q);
    out.inside = hp.left;
    out.on += hp.axis;
    out.outside = hp.right;
    return out;
}

}  // namespace lefkit

#endif
