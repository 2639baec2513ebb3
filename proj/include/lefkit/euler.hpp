#ifndef LEFKIT_EULER_HPP
#define LEFKIT_EULER_HPP

#include "lefkit/complex.hpp"
#include "lefkit/sheaf.hpp"

#include <vector>

namespace lefkit {

/// A rational value per cell of a fixed base complex.
struct ConstructibleFunction {
    const Complex* base = nullptr;
    std::vector<Q> value;

    static ConstructibleFunction zero(const Complex& x) { return {&x, std::vector<Q>(x.size())}; }
    static ConstructibleFunction constant(const Complex& x, const Q& v) { return {&x, std::vector<Q>(x.size(), v)}; }
    static ConstructibleFunction indicator(const Complex& x, const std::vector<CellId>& s, const Q& v = Q(1))
    {
        auto f = zero(x);
        for (auto c : s) {
            f.value[c] = v;
        }
        return f;
    }

    const Q& operator()(CellId c) const { return value.at(c); }

    friend ConstructibleFunction operator+(ConstructibleFunction a, const ConstructibleFunction& b)
    {
        require_same_base(a, b);
        for (std::size_t i = 0; i < a.value.size(); ++i) {
            a.value[i] += b.value[i];
        }
        return a;
    }

    friend ConstructibleFunction operator*(const Q& s, ConstructibleFunction a)
    {
        for (auto& v : a.value) {
            v *= s;
        }
        return a;
    }

    friend bool operator==(const ConstructibleFunction& a, const ConstructibleFunction& b)
    {
        return a.base == b.base && a.value == b.value;
    }

    static void require_same_base(const ConstructibleFunction& a, const ConstructibleFunction& b)
    {
        if (a.base != b.base || a.value.size() != b.value.size()) {
            throw Error("constructible functions on different complexes");
        }
    }
};

inline long chi_c(const Complex& x, const CellSet& s)
{
    require_kind(x, s);
    if (!is_locally_closed(x, s.cells)) {
        throw Error("chi_c: set is not locally closed");
    }
    long chi = 0;
    for (auto c : s.cells) {
        chi += x.dim(c) % 2 == 0 ? 1 : -1;
    }
    return chi;
}

/// Σ θ(c)·(−1)^{dim c} over a locally closed set.
inline Q euler_integral_c(const ConstructibleFunction& theta, const CellSet& s)
{
    const Complex& x = *theta.base;
    require_kind(x, s);
    if (!is_locally_closed(x, s.cells)) {
        throw Error("euler_integral_c: set is not locally closed");
    }
    Q total = 0;
    for (auto c : s.cells) {
        if (x.dim(c) % 2 == 0) {
            total += theta(c);
        } else {
            total -= theta(c);
        }
    }
    return total;
}

inline Q euler_integral_c(const ConstructibleFunction& theta)
{
    return euler_integral_c(theta, all_cells(*theta.base));
}

/// χ(RΓ(U; Q_α)) for each cell α of an open set U (zero elsewhere):
/// w(α) = 1 − Σ_{β < α, β ∈ U} w(β).
inline std::vector<long> open_weights(const Complex& x, const std::vector<CellId>& u)
{
    std::vector<bool> in(x.size(), false);
    for (auto c : u) {
        in[c] = true;
    }
    std::vector<long> w(x.size(), 0);
    for (CellId a = 0; a < x.size(); ++a) {  // faces precede cofaces
        if (!in[a]) {
            continue;
        }
        long s = 1;
        for (CellId b : x.closure(a)) {
            if (b != a && in[b]) {
                s -= w[b];
            }
        }
        w[a] = s;
    }
    return w;
}

/// Σ_α θ(α)·χ(RΓ(U; Q_α)), the open-set convention.
inline Q euler_integral_open(const ConstructibleFunction& theta, const std::vector<CellId>& u)
{
    const Complex& x = *theta.base;
    if (!is_open(x, u)) {
        throw Error("euler_integral_open: set is not open");
    }
    auto w = open_weights(x, u);
    Q total = 0;
    for (auto c : u) {
        total += theta(c) * Q(w[c]);
    }
    return total;
}

/// tr Φ_c on the cells of M (zero elsewhere); every cell of M must be fixed by φ.
inline ConstructibleFunction local_trace_function(const SheafHom& h, const std::vector<CellId>& m)
{
    const Complex& x = h.sheaf->base();
    auto out = ConstructibleFunction::zero(x);
    for (auto c : m) {
        if (h.map.image[c] != c) {
            throw Error("local_trace_function: cell '" + x.name(c) + "' is not fixed");
        }
        out.value[c] = h.phi[c].trace();
    }
    return out;
}

struct RestrictedTrace {
    Q integral;       ///< euler_integral_c of the local trace function
    Q chain_level;    ///< alternating trace on sections of F|_M
    bool agree() const { return integral == chain_level; }
};

inline RestrictedTrace trace_restricted(const SheafHom& h, const CellSet& m)
{
    const CellSheaf& f = *h.sheaf;
    const Complex& x = f.base();
    std::vector<CellId> supp;
    for (auto c : m.cells) {
        if (f.stalk(c) > 0) {
            supp.push_back(c);
        }
    }
    for (auto c : closure_of(x, supp)) {
        if (!m.contains(c)) {
            throw Error("trace_restricted: support of F on M is not compact (cell '" + x.name(c) + "')");
        }
    }
    RestrictedTrace r;
    r.integral = euler_integral_c(local_trace_function(h, m.cells), m);
    auto sc = sections_complex(f, m);
    auto e = induced_endo(h, sc);
    r.chain_level = alternating_cochain_trace(sc.complex, e);
    return r;
}

/// Σ_c t(c)·(−1)^{dim c} over the whole base: trace of a bundle whose fiberwise trace is t.
inline Q fibered_global_trace(const ConstructibleFunction& fiber_traces)
{
    return euler_integral_c(fiber_traces);
}

}  // namespace lefkit

#endif
