#ifndef LEFKIT_SPECTRUM_HPP
#define LEFKIT_SPECTRUM_HPP

#include "lefkit/matrix.hpp"
#include "lefkit/polynomial.hpp"

#include <array>
#include <string>
#include <vector>

namespace lefkit {

enum class RootClass {
    RealAboveOne,
    RealInOpenUnit,
    RealNonPositive,
    ComplexOutside,
    ComplexInside,
    OnUnitCircle,
    EqualsOne,
    Mixed,
};

inline constexpr std::size_t kRootClassCount = 7;  // Mixed is a tag only

inline const char* to_string(RootClass c)
{
    switch (c) {
    case RootClass::RealAboveOne: return "real-in-(1,inf)";
    case RootClass::RealInOpenUnit: return "real-in-(0,1)";
    case RootClass::RealNonPositive: return "real-in-(-inf,0]";
    case RootClass::ComplexOutside: return "complex-modulus>1";
    case RootClass::ComplexInside: return "complex-modulus<1";
    case RootClass::OnUnitCircle: return "on-unit-circle";
    case RootClass::EqualsOne: return "equals-1";
    case RootClass::Mixed: return "mixed";
    }
    return "?";
}

/// Exact counts backing a factor's tag.
struct SpectralCertificate {
    std::size_t sturm_nonpositive = 0;   ///< real roots in (-inf, 0]
    std::size_t sturm_open_unit = 0;     ///< real roots in (0, 1)
    std::size_t sturm_above_one = 0;     ///< real roots in (1, inf)
    std::size_t sturm_below_minus_one = 0;
    UnitCircleCounts schur_cohn;         ///< all roots vs the unit circle
};

struct SpectralFactor {
    Poly factor;           ///< monic, squarefree; rational roots are split off as linear factors
    unsigned multiplicity = 1;
    std::array<std::size_t, kRootClassCount> roots{};  ///< distinct roots of `factor` per class
    RootClass tag = RootClass::Mixed;
    SpectralCertificate certificate;

    std::size_t count(RootClass c) const { return roots[static_cast<std::size_t>(c)]; }
    bool has(RootClass c) const { return count(c) > 0; }
};

struct SpectralClassification {
    Poly characteristic;
    std::vector<SpectralFactor> factors;

    /// Eigenvalues of the given class counted with algebraic multiplicity.
    std::size_t count(RootClass c) const
    {
        std::size_t n = 0;
        for (const auto& f : factors) {
            n += f.multiplicity * f.count(c);
        }
        return n;
    }

    bool has_eigenvalue_one() const { return count(RootClass::EqualsOne) > 0; }
    bool has_zero_eigenvalue() const { return is_zero(characteristic(Q(0))); }

    std::size_t total_degree() const
    {
        std::size_t n = 0;
        for (const auto& f : factors) {
            n += f.multiplicity * static_cast<std::size_t>(f.factor.degree());
        }
        return n;
    }

    /// No real eigenvalue in the closed interval [0, 1].
    bool avoids_closed_unit_interval() const
    {
        for (const auto& f : factors) {
            if (f.has(RootClass::RealInOpenUnit) || f.has(RootClass::EqualsOne)) {
                return false;
            }
        }
        return !has_zero_eigenvalue();
    }

    /// No real eigenvalue in [1, inf).
    bool avoids_one_and_above() const
    {
        return count(RootClass::RealAboveOne) == 0 && count(RootClass::EqualsOne) == 0;
    }
};

inline Poly characteristic_polynomial(const QMatrix& m)
{
    return Poly(characteristic_coefficients(m));
}

namespace detail {

inline SpectralFactor linear_factor(const Q& r, unsigned mult)
{
    SpectralFactor f;
    f.factor = Poly::linear_root(r);
    f.multiplicity = mult;
    RootClass c = r == 1 ? RootClass::EqualsOne
                : r > 1  ? RootClass::RealAboveOne
                : r > 0  ? RootClass::RealInOpenUnit
                         : RootClass::RealNonPositive;
    f.roots[static_cast<std::size_t>(c)] = 1;
    f.tag = c;
    f.certificate.sturm_nonpositive = r <= 0 ? 1 : 0;
    f.certificate.sturm_open_unit = (r > 0 && r < 1) ? 1 : 0;
    f.certificate.sturm_above_one = r > 1 ? 1 : 0;
    f.certificate.sturm_below_minus_one = r < -1 ? 1 : 0;
    f.certificate.schur_cohn = unit_circle_counts(f.factor);
    return f;
}

/// Classifies a squarefree factor without rational roots (so 0, 1, -1 are not roots).
inline SpectralFactor irrational_factor(const Poly& g, unsigned mult)
{
    SpectralFactor f;
    f.factor = g;
    f.multiplicity = mult;
    auto& cert = f.certificate;
    cert.sturm_nonpositive = count_roots_open(g, std::nullopt, Q(0));
    cert.sturm_open_unit = count_roots_open(g, Q(0), Q(1));
    cert.sturm_above_one = count_roots_open(g, Q(1), std::nullopt);
    cert.sturm_below_minus_one = count_roots_open(g, std::nullopt, Q(-1));
    cert.schur_cohn = unit_circle_counts(g);
    const std::size_t real_out = cert.sturm_above_one + cert.sturm_below_minus_one;
    const std::size_t real_in = cert.sturm_open_unit + (cert.sturm_nonpositive - cert.sturm_below_minus_one);
    auto set = [&](RootClass c, std::size_t n) { f.roots[static_cast<std::size_t>(c)] = n; };
    set(RootClass::RealAboveOne, cert.sturm_above_one);
    set(RootClass::RealInOpenUnit, cert.sturm_open_unit);
    set(RootClass::RealNonPositive, cert.sturm_nonpositive);
    set(RootClass::ComplexOutside, cert.schur_cohn.outside - real_out);
    set(RootClass::ComplexInside, cert.schur_cohn.inside - real_in);
    set(RootClass::OnUnitCircle, cert.schur_cohn.on);
    std::size_t nonzero = 0;
    for (std::size_t k = 0; k < kRootClassCount; ++k) {
        if (f.roots[k] > 0) {
            ++nonzero;
            f.tag = static_cast<RootClass>(k);
        }
    }
    if (nonzero != 1) {
        f.tag = RootClass::Mixed;
    }
    return f;
}

}  // namespace detail

inline SpectralClassification classify_polynomial(const Poly& p)
{
    SpectralClassification out;
    out.characteristic = p;
    if (p.degree() <= 0) {
        return out;
    }
    for (const auto& part : squarefree_decomposition(p)) {
        Poly rest = part.factor;
        for (const auto& r : rational_roots(part.factor)) {
            out.factors.push_back(detail::linear_factor(r, part.multiplicity));
            rest = rest / Poly::linear_root(r);
        }
        if (rest.degree() > 0) {
            out.factors.push_back(detail::irrational_factor(rest.monic(), part.multiplicity));
        }
    }
    return out;
}

inline SpectralClassification classify_spectrum(const QMatrix& m)
{
    if (!m.square()) {
        throw Error("classify_spectrum: matrix is " + m.shape());
    }
    return classify_polynomial(characteristic_polynomial(m));
}

inline QMatrix evaluate(const Poly& p, const QMatrix& m)
{
    const std::size_t n = m.rows();
    QMatrix acc(n, n);
    for (int k = p.degree(); k >= 0; --k) {
        acc = acc * m;
        for (std::size_t i = 0; i < n; ++i) {
            acc(i, i) += p.coeff(static_cast<std::size_t>(k));
        }
    }
    return acc;
}

/// Basis (columns) of the sum of generalized eigenspaces of the selected factors.
inline QMatrix invariant_subspace(const QMatrix& m, const std::vector<SpectralFactor>& selected)
{
    const std::size_t n = m.rows();
    if (selected.empty()) {
        return QMatrix(n, 0);
    }
    QMatrix prod = QMatrix::identity(n);
    for (const auto& f : selected) {
        QMatrix fm = evaluate(f.factor, m);
        for (unsigned k = 0; k < f.multiplicity; ++k) {
            prod = prod * fm;
        }
    }
    return kernel_basis(prod);
}

/// Matrix of m restricted to the invariant subspace spanned by the columns of basis.
inline QMatrix restrict_to(const QMatrix& m, const QMatrix& basis)
{
    auto x = solve(basis, m * basis);
    if (!x) {
        throw Error("restrict_to: subspace is not invariant");
    }
    return *x;
}

inline bool is_invariant(const QMatrix& m, const QMatrix& basis)
{
    return in_span(basis, m * basis);
}

inline std::vector<SpectralFactor> factors_with(const SpectralClassification& s, RootClass c)
{
    std::vector<SpectralFactor> out;
    for (const auto& f : s.factors) {
        if (f.has(c)) {
            out.push_back(f);
        }
    }
    return out;
}

}  // namespace lefkit

#endif
