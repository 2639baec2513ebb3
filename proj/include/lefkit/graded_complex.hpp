#ifndef LEFKIT_GRADED_COMPLEX_HPP
#define LEFKIT_GRADED_COMPLEX_HPP

#include "lefkit/matrix.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace lefkit {

/// Bounded cochain complex of finite-dimensional Q-spaces in degrees lo .. lo + size - 1.
struct GradedComplex {
    int lo = 0;
    std::vector<std::size_t> dims;
    /// diff[i] : C^{lo+i} -> C^{lo+i+1}; the last one maps to the zero space.
    std::vector<QMatrix> diff;

    int hi() const { return lo + static_cast<int>(dims.size()) - 1; }
    bool empty() const { return dims.empty(); }

    std::size_t dim(int k) const
    {
        if (k < lo || k > hi()) {
            return 0;
        }
        return dims[static_cast<std::size_t>(k - lo)];
    }

    /// d : C^k -> C^{k+1}, possibly an empty-shaped matrix.
    QMatrix d(int k) const
    {
        if (k < lo || k > hi()) {
            return QMatrix(dim(k + 1), dim(k));
        }
        return diff[static_cast<std::size_t>(k - lo)];
    }

    std::size_t total_dim() const
    {
        std::size_t n = 0;
        for (auto x : dims) {
            n += x;
        }
        return n;
    }

    long euler_characteristic() const
    {
        long chi = 0;
        for (int k = lo; k <= hi(); ++k) {
            chi += (k % 2 == 0 ? 1 : -1) * static_cast<long>(dim(k));
        }
        return chi;
    }

    /// Builds a complex from spaces and the differentials between consecutive degrees.
    static GradedComplex make(int lo, std::vector<std::size_t> dims, std::vector<QMatrix> diffs)
    {
        GradedComplex c;
        c.lo = lo;
        c.dims = std::move(dims);
        c.diff = std::move(diffs);
        while (c.diff.size() < c.dims.size()) {
            std::size_t k = c.diff.size();
            std::size_t next = k + 1 < c.dims.size() ? c.dims[k + 1] : 0;
            c.diff.emplace_back(next, c.dims[k]);
        }
        return c;
    }
};

/// Throws unless every differential has the right shape and consecutive composites vanish.
inline void validate_graded(const GradedComplex& c)
{
    if (c.diff.size() != c.dims.size()) {
        throw Error("graded complex: differential count does not match degree count");
    }
    for (int k = c.lo; k <= c.hi(); ++k) {
        const QMatrix& dk = c.diff[static_cast<std::size_t>(k - c.lo)];
        if (dk.rows() != c.dim(k + 1) || dk.cols() != c.dim(k)) {
            throw Error("graded complex: differential in degree " + std::to_string(k) + " has shape " + dk.shape());
        }
    }
    for (int k = c.lo; k < c.hi(); ++k) {
        if (!(c.d(k + 1) * c.d(k)).is_zero()) {
            throw Error("graded complex: d∘d != 0 starting in degree " + std::to_string(k));
        }
    }
}

/// One degree of cohomology: classes are represented by the columns of `representatives`;
/// `projection` sends a cocycle to its class coordinates.
struct CohomologyDegree {
    int degree = 0;
    std::size_t dim = 0;
    QMatrix representatives;  // n_k x h
    QMatrix projection;       // h x n_k, valid on cocycles
};

struct Cohomology {
    std::vector<CohomologyDegree> degrees;

    std::vector<std::size_t> dims() const
    {
        std::vector<std::size_t> out;
        for (const auto& d : degrees) {
            out.push_back(d.dim);
        }
        return out;
    }

    std::size_t dim(int k) const
    {
        for (const auto& d : degrees) {
            if (d.degree == k) {
                return d.dim;
            }
        }
        return 0;
    }

    long euler_characteristic() const
    {
        long chi = 0;
        for (const auto& d : degrees) {
            chi += (d.degree % 2 == 0 ? 1 : -1) * static_cast<long>(d.dim);
        }
        return chi;
    }
};

inline CohomologyDegree cohomology_degree(const GradedComplex& c, int k)
{
    CohomologyDegree out;
    out.degree = k;
    const std::size_t n = c.dim(k);
    if (n == 0) {
        out.representatives = QMatrix(0, 0);
        out.projection = QMatrix(0, 0);
        return out;
    }
    QMatrix z = kernel_basis(c.d(k));
    QMatrix b = column_space_basis(c.d(k - 1));
    // Extend a basis of B to one of Z greedily.
    QMatrix bz = hstack(b, z);
    auto cols = independent_columns(bz);
    std::vector<std::size_t> comp;
    for (auto j : cols) {
        if (j >= b.cols()) {
            comp.push_back(j);
        }
    }
    out.dim = comp.size();
    out.representatives = bz.select_columns(comp);
    QMatrix p = hstack(b, out.representatives);  // n x r, full column rank
    const std::size_t r = p.cols();
    if (r == 0) {
        out.projection = QMatrix(0, n);
        return out;
    }
    auto rows = independent_columns(p.transpose());
    QMatrix pr = p.select_rows(rows);
    QMatrix inv = *inverse(pr);
    out.projection = QMatrix(out.dim, n);
    for (std::size_t i = 0; i < out.dim; ++i) {
        for (std::size_t j = 0; j < rows.size(); ++j) {
            out.projection(i, rows[j]) = inv(b.cols() + i, j);
        }
    }
    return out;
}

inline Cohomology cohomology(const GradedComplex& c)
{
    validate_graded(c);
    Cohomology h;
    for (int k = c.lo; k <= c.hi(); ++k) {
        h.degrees.push_back(cohomology_degree(c, k));
    }
    return h;
}

/// dim H^k = n_k - rank d_k - rank d_{k-1}, without building representatives.
inline std::vector<std::size_t> cohomology_dims_rank_nullity(const GradedComplex& c)
{
    std::vector<std::size_t> out;
    for (int k = c.lo; k <= c.hi(); ++k) {
        std::size_t rk = rank(c.d(k));
        std::size_t rkm = rank(c.d(k - 1));
        out.push_back(c.dim(k) - rk - rkm);
    }
    return out;
}

/// Chain endomorphism: one square matrix per degree of the complex.
using ChainEndo = std::vector<QMatrix>;

inline void check_chain_map(const GradedComplex& c, const ChainEndo& f)
{
    if (f.size() != c.dims.size()) {
        throw Error("chain endomorphism: expected " + std::to_string(c.dims.size()) + " degrees, got " +
                    std::to_string(f.size()));
    }
    for (int k = c.lo; k <= c.hi(); ++k) {
        const QMatrix& fk = f[static_cast<std::size_t>(k - c.lo)];
        if (fk.rows() != c.dim(k) || fk.cols() != c.dim(k)) {
            throw Error("chain endomorphism: degree " + std::to_string(k) + " has shape " + fk.shape());
        }
    }
    for (int k = c.lo; k < c.hi(); ++k) {
        const QMatrix& fk = f[static_cast<std::size_t>(k - c.lo)];
        const QMatrix& fk1 = f[static_cast<std::size_t>(k + 1 - c.lo)];
        if (!(c.d(k) * fk == fk1 * c.d(k))) {
            throw Error("chain endomorphism does not commute with the differential in degree " + std::to_string(k));
        }
    }
}

struct TraceReport {
    int lo = 0;
    std::vector<Q> cochain_traces;
    std::vector<Q> cohomology_traces;
    Q cochain_alternating = 0;
    Q cohomology_alternating = 0;

    bool consistent() const { return cochain_alternating == cohomology_alternating; }
};

inline Q alternating_cochain_trace(const GradedComplex& c, const ChainEndo& f)
{
    Q t = 0;
    for (int k = c.lo; k <= c.hi(); ++k) {
        Q tk = f[static_cast<std::size_t>(k - c.lo)].trace();
        t += k % 2 == 0 ? tk : Q(-tk);
    }
    return t;
}

inline TraceReport endo_trace(const GradedComplex& c, const ChainEndo& f, const Cohomology* precomputed = nullptr)
{
    validate_graded(c);
    check_chain_map(c, f);
    Cohomology local;
    const Cohomology& h = precomputed ? *precomputed : (local = cohomology(c));
    TraceReport r;
    r.lo = c.lo;
    for (int k = c.lo; k <= c.hi(); ++k) {
        const QMatrix& fk = f[static_cast<std::size_t>(k - c.lo)];
        Q ct = fk.trace();
        const CohomologyDegree& hk = h.degrees[static_cast<std::size_t>(k - c.lo)];
        Q ht = 0;
        if (hk.dim > 0) {
            ht = (hk.projection * (fk * hk.representatives)).trace();
        }
        r.cochain_traces.push_back(ct);
        r.cohomology_traces.push_back(ht);
        const bool even = k % 2 == 0;
        r.cochain_alternating += even ? ct : Q(-ct);
        r.cohomology_alternating += even ? ht : Q(-ht);
    }
    return r;
}

/// A chain map between two complexes, one matrix per degree of the source range.
struct ChainMap {
    const GradedComplex* source = nullptr;
    const GradedComplex* target = nullptr;
    /// component(k) : A^k -> B^k
    std::vector<QMatrix> components;  // indexed from source->lo
    int lo = 0;

    QMatrix at(int k) const
    {
        if (k < lo || k >= lo + static_cast<int>(components.size())) {
            return QMatrix(target->dim(k), source->dim(k));
        }
        return components[static_cast<std::size_t>(k - lo)];
    }
};

/// The shifted cone: degree k is A^k ⊕ B^{k-1}, d(a, b) = (d a, f a - d b).
/// Its cohomology fits into ... -> H^k(cone) -> H^k(A) -> H^k(B) -> ...
inline GradedComplex shifted_cone(const GradedComplex& a, const GradedComplex& b, const ChainMap& f)
{
    int lo = std::min(a.empty() ? b.lo + 1 : a.lo, b.empty() ? a.lo : b.lo + 1);
    int hi = std::max(a.empty() ? b.hi() + 1 : a.hi(), b.empty() ? a.hi() : b.hi() + 1);
    if (a.empty() && b.empty()) {
        return {};
    }
    GradedComplex c;
    c.lo = lo;
    for (int k = lo; k <= hi; ++k) {
        c.dims.push_back(a.dim(k) + b.dim(k - 1));
    }
    for (int k = lo; k <= hi; ++k) {
        QMatrix dk(c.dim(k + 1), c.dim(k));
        dk.set_block(0, 0, a.d(k));
        dk.set_block(a.dim(k + 1), 0, f.at(k));
        if (b.dim(k - 1) > 0 && b.dim(k) > 0) {
            dk.add_block(a.dim(k + 1), a.dim(k), b.d(k - 1), Q(-1));
        }
        c.diff.push_back(std::move(dk));
    }
    return c;
}

/// Endomorphism of the shifted cone induced by compatible endomorphisms of A and B.
inline ChainEndo shifted_cone_endo(const GradedComplex& cone, const GradedComplex& a, const GradedComplex& b,
                                   const ChainEndo& ea, const ChainEndo& eb)
{
    ChainEndo out;
    for (int k = cone.lo; k <= cone.hi(); ++k) {
        QMatrix m(cone.dim(k), cone.dim(k));
        if (a.dim(k) > 0) {
            m.set_block(0, 0, ea[static_cast<std::size_t>(k - a.lo)]);
        }
        if (b.dim(k - 1) > 0) {
            m.set_block(a.dim(k), a.dim(k), eb[static_cast<std::size_t>(k - 1 - b.lo)]);
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace lefkit

#endif
