#ifndef LEFKIT_HYPLOC_HPP
#define LEFKIT_HYPLOC_HPP

#include "lefkit/euler.hpp"
#include "lefkit/fan.hpp"
#include "lefkit/parallel.hpp"
#include "lefkit/sheaf.hpp"
#include "lefkit/spectrum.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lefkit {

/// A fan together with its cone poset as a cell complex (cones as cells, incidence as in
/// the compactification, without the faces at infinity).
struct ConeComplex {
    Fan fan;
    Complex cells;
};

using ConeComplexPtr = std::shared_ptr<const ConeComplex>;

inline ConeComplexPtr make_cone_complex(Fan fan)
{
    auto cc = std::make_shared<ConeComplex>();
    cc->fan = std::move(fan);
    const Fan& f = cc->fan;
    for (std::size_t c = 0; c < f.cone_count(); ++c) {
        const RaySet& s = f.cone(c);
        std::vector<Incidence> bd;
        for (std::size_t i = 0; i < s.size(); ++i) {
            RaySet face = s;
            face.erase(face.begin() + static_cast<std::ptrdiff_t>(i));
            bd.push_back({f.cone_index(face), (i + 1) % 2 == 0 ? 1 : -1});
        }
        cc->cells.add_cell(f.cone_label(c), static_cast<int>(s.size()), std::move(bd));
    }
    cc->cells.finalize();
    return cc;
}

/// Fiber datum at one base cell: conic sheaf G on the cone poset, the linear map ψ, and
/// Ψ_σ : G(ψσ) -> G(σ) per cone.
struct FiberModel {
    ConeComplexPtr cones;
    CellSheaf sheaf;
    QMatrix psi;
    std::vector<QMatrix> Psi;

    const Fan& fan() const { return cones->fan; }
    std::size_t cone_count() const { return cones->fan.cone_count(); }
};

/// Fresh rank-0 sheaf with identity-shaped placeholders; callers fill stalks, gens and Ψ.
inline FiberModel empty_fiber(ConeComplexPtr cc, QMatrix psi)
{
    FiberModel m;
    m.cones = std::move(cc);
    m.sheaf = CellSheaf(m.cones->cells);
    m.psi = std::move(psi);
    m.Psi.assign(m.cone_count(), QMatrix());
    return m;
}

inline SheafHom fiber_hom(const FiberModel& m, const FanMapCheck& act)
{
    SheafHom h;
    h.sheaf = &m.sheaf;
    h.map.domain = &m.cones->cells;
    h.map.codomain = &m.cones->cells;
    h.map.image = act.cone_perm;
    h.map.sign = act.orientation;
    h.phi = m.Psi;
    return h;
}

/// Validates ψ (invertible, no eigenvalue 1, fan-compatible), the sheaf, and the naturality of Ψ.
inline Diagnostic validate_fiber(const FiberModel& m, FanMapCheck* action = nullptr)
{
    const Fan& f = m.fan();
    if (m.psi.rows() != static_cast<std::size_t>(f.dim()) || !m.psi.square()) {
        return diagnostic_fail("fiber map has shape " + m.psi.shape());
    }
    auto spec = classify_spectrum(m.psi);
    if (spec.has_eigenvalue_one()) {
        return diagnostic_fail("fiber map has eigenvalue 1");
    }
    if (f.dim() > 0 && spec.has_zero_eigenvalue()) {
        return diagnostic_fail("fiber map is not invertible");
    }
    auto act = map_image_check(m.psi, f);
    if (!act.ok) {
        return diagnostic_fail("fiber map is not fan-compatible: " + act.message);
    }
    if (auto d = validate_sheaf(m.sheaf); !d) {
        return d;
    }
    if (m.Psi.size() != f.cone_count()) {
        return diagnostic_fail("fiber endomorphism does not cover every cone");
    }
    for (std::size_t c = 0; c < f.cone_count(); ++c) {
        const QMatrix& p = m.Psi[c];
        if (p.rows() != m.sheaf.stalk(c) || p.cols() != m.sheaf.stalk(act.cone_perm[c])) {
            return diagnostic_fail("fiber endomorphism at cone " + f.cone_label(c) + " has shape " + p.shape(), c);
        }
    }
    const Complex& x = m.cones->cells;
    for (CellId t = 0; t < x.size(); ++t) {
        for (const auto& inc : x.cell(t).boundary) {
            const CellId s = inc.face;
            QMatrix lhs = m.Psi[t] * m.sheaf.map(act.cone_perm[s], act.cone_perm[t]);
            QMatrix rhs = m.sheaf.map(s, t) * m.Psi[s];
            if (!(lhs == rhs)) {
                return diagnostic_fail("fiber endomorphism is not natural on (" + f.cone_label(s) + ", " +
                                           f.cone_label(t) + ")",
                                       t, s);
            }
        }
    }
    if (action) {
        *action = std::move(act);
    }
    return {};
}

// ---------------------------------------------------------------------------------------
// subspaces

/// Canonical key of the column span (reduced row echelon form of the transpose).
inline std::vector<std::vector<Q>> subspace_key(const QMatrix& basis)
{
    if (basis.cols() == 0) {
        return {};
    }
    auto e = rref(basis.transpose());
    std::vector<std::vector<Q>> key;
    for (std::size_t r = 0; r < e.pivots.size(); ++r) {
        key.push_back(e.reduced.row(r));
    }
    return key;
}

inline bool same_subspace(const QMatrix& a, const QMatrix& b) { return subspace_key(a) == subspace_key(b); }

/// Matrix of the map induced on V / E, using the standard-basis complement of E.
inline QMatrix quotient_map(const QMatrix& psi, const QMatrix& basis)
{
    const std::size_t n = psi.rows();
    QMatrix full = hstack(basis, QMatrix::identity(n));
    auto cols = independent_columns(full);
    QMatrix p = full.select_columns(cols);
    QMatrix conj = *inverse(p) * psi * p;
    const std::size_t e = basis.cols();
    return conj.block(e, e, n - e, n - e);
}

inline QMatrix minimal_expanding(const QMatrix& psi)
{
    auto s = classify_spectrum(psi);
    if (s.has_eigenvalue_one()) {
        throw Error("minimal_expanding: eigenvalue 1 present");
    }
    auto sel = factors_with(s, RootClass::RealAboveOne);
    for (const auto& f : sel) {
        if (f.tag != RootClass::RealAboveOne) {
            throw Error("minimal_expanding: factor " + f.factor.to_string() +
                        " mixes real eigenvalues above 1 with others; the subspace is not rational");
        }
    }
    return invariant_subspace(psi, sel);
}

inline QMatrix minimal_shrinking(const QMatrix& psi)
{
    auto s = classify_spectrum(psi);
    if (s.has_eigenvalue_one()) {
        throw Error("minimal_shrinking: eigenvalue 1 present");
    }
    auto sel = factors_with(s, RootClass::RealInOpenUnit);
    for (const auto& f : sel) {
        if (f.tag != RootClass::RealInOpenUnit) {
            throw Error("minimal_shrinking: factor " + f.factor.to_string() +
                        " mixes real eigenvalues in (0,1) with others; the subspace is not rational");
        }
    }
    return invariant_subspace(psi, sel);
}

struct SubspaceCheck {
    bool ok = true;
    std::vector<int> failed;            ///< condition numbers (i)=1, (ii)=2, (iii)=3
    std::vector<std::string> messages;

    void fail(int cond, std::string msg)
    {
        ok = false;
        failed.push_back(cond);
        messages.push_back(std::move(msg));
    }

    std::string summary() const
    {
        std::string s;
        for (const auto& m : messages) {
            s += (s.empty() ? "" : "; ") + m;
        }
        return s;
    }
};

/// Expanding-subspace conditions: invariant, contains the real >1 spectrum, no eigenvalue in [0,1].
inline SubspaceCheck validate_expanding(const QMatrix& psi, const QMatrix& e)
{
    SubspaceCheck r;
    if (e.rows() != psi.rows()) {
        r.fail(1, "(i) subspace has the wrong ambient dimension");
        return r;
    }
    if (rank(e) != e.cols()) {
        r.fail(1, "(i) basis is not linearly independent");
        return r;
    }
    if (!is_invariant(psi, e)) {
        r.fail(1, "(i) subspace is not invariant");
        return r;
    }
    if (classify_spectrum(quotient_map(psi, e)).count(RootClass::RealAboveOne) > 0) {
        r.fail(2, "(ii) subspace misses real eigenvalues above 1");
    }
    if (!classify_spectrum(restrict_to(psi, e)).avoids_closed_unit_interval()) {
        r.fail(3, "(iii) restricted spectrum meets [0,1]");
    }
    return r;
}

/// Shrinking-subspace conditions, the mirror image under ψ ↦ ψ⁻¹.
inline SubspaceCheck validate_shrinking(const QMatrix& psi, const QMatrix& s)
{
    SubspaceCheck r;
    if (s.rows() != psi.rows() || rank(s) != s.cols()) {
        r.fail(1, "(i) basis is not a subspace basis");
        return r;
    }
    if (!is_invariant(psi, s)) {
        r.fail(1, "(i) subspace is not invariant");
        return r;
    }
    if (classify_spectrum(quotient_map(psi, s)).count(RootClass::RealInOpenUnit) > 0) {
        r.fail(2, "(ii) subspace misses real eigenvalues in (0,1)");
    }
    if (!classify_spectrum(restrict_to(psi, s)).avoids_one_and_above()) {
        r.fail(3, "(iii) restricted spectrum meets [1,inf)");
    }
    return r;
}

/// The fan restricted to a subspace, in coordinates of the given basis.
struct Subfan {
    bool complete = false;
    std::string message;
    Fan fan;
    std::vector<std::size_t> parent_cone;   ///< per subfan cone
    std::vector<std::size_t> parent_ray;    ///< per subfan ray
    QMatrix basis;
};

inline Subfan restrict_fan(const Fan& f, const QMatrix& basis)
{
    Subfan out;
    out.basis = basis;
    const int d = static_cast<int>(basis.cols());
    std::vector<std::vector<Q>> rays;
    std::map<std::size_t, std::size_t> local;
    for (std::size_t r = 0; r < f.rays().size(); ++r) {
        auto x = d == 0 ? std::optional<std::vector<Q>>() : solve(basis, f.rays()[r]);
        if (x) {
            local[r] = rays.size();
            rays.push_back(*x);
            out.parent_ray.push_back(r);
        }
    }
    std::vector<RaySet> gens;
    std::vector<std::size_t> parents;
    for (std::size_t c = 0; c < f.cone_count(); ++c) {
        RaySet s;
        bool inside = true;
        for (auto r : f.cone(c)) {
            auto it = local.find(r);
            if (it == local.end()) {
                inside = false;
                break;
            }
            s.push_back(it->second);
        }
        if (inside) {
            gens.push_back(s);
        }
    }
    out.fan = Fan::from_cones(d, rays, gens);
    for (std::size_t c = 0; c < out.fan.cone_count(); ++c) {
        RaySet s;
        for (auto r : out.fan.cone(c)) {
            s.push_back(out.parent_ray[r]);
        }
        out.parent_cone.push_back(f.cone_index(s));
    }
    auto diag = check_complete(out.fan);
    out.complete = diag.ok;
    out.message = diag.message;
    return out;
}

/// The fiber model restricted to the cones of an invariant subspace.
inline FiberModel restrict_fiber(const FiberModel& m, const Subfan& sub, const FanMapCheck& act)
{
    auto cc = make_cone_complex(sub.fan);
    FiberModel r = empty_fiber(cc, restrict_to(m.psi, sub.basis));
    const std::size_t n = cc->fan.cone_count();
    std::map<std::size_t, std::size_t> local;
    for (std::size_t c = 0; c < n; ++c) {
        local[sub.parent_cone[c]] = c;
        r.sheaf.set_stalk(c, m.sheaf.stalk(sub.parent_cone[c]));
    }
    for (std::size_t t = 0; t < n; ++t) {
        for (const auto& inc : cc->cells.cell(t).boundary) {
            r.sheaf.set_gen(inc.face, t, m.sheaf.gen(sub.parent_cone[inc.face], sub.parent_cone[t]));
        }
    }
    r.sheaf.finalize();
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t p = sub.parent_cone[c];
        if (!local.count(act.cone_perm[p])) {
            throw Error("restrict_fiber: subspace is not invariant under the cone action");
        }
        r.Psi[c] = m.Psi[p];
    }
    return r;
}

/// All spans of ray subsets (plus the zero space and the whole space), deduplicated, by dimension.
inline std::vector<QMatrix> ray_span_subspaces(const Fan& f)
{
    const std::size_t n = static_cast<std::size_t>(f.dim());
    std::vector<QMatrix> out{QMatrix(n, 0)};
    std::map<std::vector<std::vector<Q>>, bool> seen{{subspace_key(out[0]), true}};
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (const auto& r : f.rays()) {
            QMatrix v = QMatrix::from_columns({r});
            if (in_span(out[i], v)) {
                continue;
            }
            QMatrix next = column_space_basis(hstack(out[i], v));
            auto key = subspace_key(next);
            if (!seen.count(key)) {
                seen[key] = true;
                out.push_back(next);
            }
        }
    }
    QMatrix full = QMatrix::identity(n);
    if (!seen.count(subspace_key(full))) {
        out.push_back(full);
    }
    std::stable_sort(out.begin(), out.end(), [](const QMatrix& a, const QMatrix& b) { return a.cols() < b.cols(); });
    return out;
}

// ---------------------------------------------------------------------------------------
// localization routes

struct Localized {
    GradedComplex complex;
    ChainEndo endo;
    TraceReport trace;
    std::vector<std::size_t> dims;  ///< cohomology dimensions, degrees from trace.lo
};

inline Localized finish_route(GradedComplex c, ChainEndo e)
{
    Localized out;
    out.complex = std::move(c);
    out.endo = std::move(e);
    Cohomology h = cohomology(out.complex);
    out.trace = endo_trace(out.complex, out.endo, &h);
    out.dims = h.dims();
    return out;
}

/// Per-degree cohomology dimensions and traces agree (missing degrees count as zero).
inline bool routes_agree(const Localized& a, const Localized& b)
{
    int lo = std::min(a.trace.lo, b.trace.lo);
    int hi = std::max(a.trace.lo + static_cast<int>(a.dims.size()), b.trace.lo + static_cast<int>(b.dims.size()));
    auto at = [](const Localized& l, int k) -> std::pair<std::size_t, Q> {
        int i = k - l.trace.lo;
        if (i < 0 || i >= static_cast<int>(l.dims.size())) {
            return {0, Q(0)};
        }
        return {l.dims[static_cast<std::size_t>(i)], l.trace.cohomology_traces[static_cast<std::size_t>(i)]};
    };
    for (int k = lo; k < hi; ++k) {
        if (at(a, k) != at(b, k)) {
            return false;
        }
    }
    return true;
}

struct Restricted {
    Subfan sub;
    FiberModel model;
    FanMapCheck action;
};

inline Restricted restrict_to_subspace(const FiberModel& m, const QMatrix& e)
{
    FanMapCheck act;
    if (auto d = validate_fiber(m, &act); !d) {
        throw Error("invalid fiber model: " + d.message);
    }
    Restricted r;
    r.sub = restrict_fan(m.fan(), e);
    if (!r.sub.complete) {
        throw Error("fan is not complete on the subspace: " + r.sub.message);
    }
    r.model = restrict_fiber(m, r.sub, act);
    // the restricted model lives in r; rebuild the sheaf pointer-stable copy
    r.action = map_image_check(r.model.psi, r.model.fan());
    if (!r.action.ok) {
        throw Error("restricted map is not fan-compatible: " + r.action.message);
    }
    return r;
}

/// Compactly supported sections over E of G|E, via the compactified E-subfan.
inline Localized compact_support_route(const FiberModel& m, const FanMapCheck& act)
{
    CompactifiedFan cf = fan_compactify(m.fan());
    const Complex& x = cf.complex;
    CellSheaf lifted(x);
    std::vector<CellId> interior;
    for (std::size_t c = 0; c < m.cone_count(); ++c) {
        lifted.set_stalk(cf.interior[c], m.sheaf.stalk(c));
        interior.push_back(cf.interior[c]);
    }
    for (std::size_t t = 0; t < m.cone_count(); ++t) {
        for (const auto& inc : m.cones->cells.cell(t).boundary) {
            lifted.set_gen(cf.interior[inc.face], cf.interior[t], m.sheaf.gen(inc.face, t));
        }
    }
    lifted.finalize();
    SheafHom h;
    h.sheaf = &lifted;
    h.map.domain = &x;
    h.map.codomain = &x;
    h.map.image.resize(x.size());
    h.map.sign.resize(x.size());
    h.phi.resize(x.size());
    for (CellId c = 0; c < x.size(); ++c) {
        const std::size_t cone = cf.cone_of_cell[c];
        const std::size_t img = act.cone_perm[cone];
        h.map.image[c] = cf.is_infinity_cell[c] ? *cf.at_infinity[img] : cf.interior[img];
        h.map.sign[c] = act.orientation[cone];
        h.phi[c] = cf.is_infinity_cell[c] ? QMatrix(0, 0) : m.Psi[cone];
    }
    auto sc = sections_complex(lifted, CellSet{CellSet::of(interior).cells, SetKind::Open});
    auto e = induced_endo(h, sc);
    return finish_route(std::move(sc.complex), std::move(e));
}

/// Hyperbolic localization through compactly supported sections over E.
inline Localized hyperbolic_localize(const FiberModel& m, const QMatrix& e)
{
    auto chk = validate_expanding(m.psi, e);
    if (!chk.ok) {
        throw Error("hyperbolic_localize: invalid expanding subspace: " + chk.summary());
    }
    Restricted r = restrict_to_subspace(m, e);
    return compact_support_route(r.model, r.action);
}

/// Local cohomology at the origin cone of the E-restricted model.
inline Localized hyperbolic_localize_shriek(const FiberModel& m, const QMatrix& e)
{
    auto chk = validate_expanding(m.psi, e);
    if (!chk.ok) {
        throw Error("hyperbolic_localize_shriek: invalid expanding subspace: " + chk.summary());
    }
    Restricted r = restrict_to_subspace(m, e);
    const FiberModel& rm = r.model;
    SheafHom h = fiber_hom(rm, r.action);
    std::vector<CellId> all(rm.cone_count());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    auto lc = local_cohomology(rm.sheaf, {0}, all, &h);
    return finish_route(std::move(lc.complex), std::move(lc.endo));
}

/// Local cohomology along S (a union of cones) at the origin: cone(RΓ(V) -> RΓ(V∖S))[−1].
inline Localized shrinking_localize(const FiberModel& m, const QMatrix& s)
{
    auto chk = validate_shrinking(m.psi, s);
    if (!chk.ok) {
        throw Error("shrinking_localize: invalid shrinking subspace: " + chk.summary());
    }
    FanMapCheck act;
    if (auto d = validate_fiber(m, &act); !d) {
        throw Error("invalid fiber model: " + d.message);
    }
    Subfan sub = restrict_fan(m.fan(), s);
    if (!sub.complete) {
        throw Error("fan is not complete on the shrinking subspace: " + sub.message);
    }
    std::vector<CellId> all(m.cone_count());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    std::vector<CellId> z = sub.parent_cone;
    std::sort(z.begin(), z.end());
    SheafHom h = fiber_hom(m, act);
    auto lc = local_cohomology(m.sheaf, z, all, &h);
    return finish_route(std::move(lc.complex), std::move(lc.endo));
}

/// Σ over ψ-invariant cones σ ⊆ E of (−1)^{dim σ}·sgn det(ψ|span σ)·tr Ψ_σ.
inline Q theta_closed_form(const FiberModel& m, const QMatrix& e)
{
    FanMapCheck act;
    if (auto d = validate_fiber(m, &act); !d) {
        throw Error("invalid fiber model: " + d.message);
    }
    const Fan& f = m.fan();
    Q total = 0;
    for (std::size_t c = 0; c < f.cone_count(); ++c) {
        if (act.cone_perm[c] != c) {
            continue;
        }
        QMatrix rays = f.ray_matrix(f.cone(c));
        if (!in_span(e, rays)) {
            continue;
        }
        int sg = 1;
        if (rays.cols() > 0) {
            sg = sign(determinant(restrict_to(m.psi, rays)));
        }
        Q t = m.Psi[c].trace();
        total += (f.cone(c).size() % 2 == 0 ? Q(sg) : Q(-sg)) * t;
    }
    return total;
}

struct ThetaValue {
    Q value;          ///< cohomology-level trace of the hyperbolic localization
    Q closed_form;
    QMatrix expanding;
    bool agree() const { return value == closed_form; }
};

/// Valid expanding subspaces on which the fan restricts to a complete fan.
inline std::vector<QMatrix> valid_expanding_subspaces(const FiberModel& m)
{
    std::vector<QMatrix> out;
    for (auto& e : ray_span_subspaces(m.fan())) {
        if (validate_expanding(m.psi, e).ok && restrict_fan(m.fan(), e).complete) {
            out.push_back(e);
        }
    }
    return out;
}

inline std::vector<QMatrix> valid_shrinking_subspaces(const FiberModel& m)
{
    std::vector<QMatrix> out;
    for (auto& s : ray_span_subspaces(m.fan())) {
        if (validate_shrinking(m.psi, s).ok && restrict_fan(m.fan(), s).complete) {
            out.push_back(s);
        }
    }
    return out;
}

/// Default choice: the minimal expanding subspace when the fan restricts to it, otherwise the
/// smallest valid ray-spanned expanding subspace.
inline QMatrix choose_expanding(const FiberModel& m, const std::optional<QMatrix>& override_e = std::nullopt)
{
    if (override_e) {
        return *override_e;
    }
    try {
        QMatrix w = minimal_expanding(m.psi);
        if (restrict_fan(m.fan(), w).complete) {
            return w;
        }
    } catch (const Error&) {
    }
    auto valid = valid_expanding_subspaces(m);
    if (valid.empty()) {
        throw Error("no valid fan-compatible expanding subspace");
    }
    return valid.front();
}

inline ThetaValue theta_value(const FiberModel& m, const QMatrix& e)
{
    ThetaValue v;
    v.expanding = e;
    Localized l = hyperbolic_localize(m, e);
    v.value = l.trace.cohomology_alternating;
    v.closed_form = theta_closed_form(m, e);
    return v;
}

inline ThetaValue theta_value(const FiberModel& m) { return theta_value(m, choose_expanding(m)); }

// ---------------------------------------------------------------------------------------
// normal models over a fixed component

struct NormalModel {
    const Complex* base = nullptr;
    std::vector<CellId> cells;                       ///< the component M (sorted)
    std::vector<FiberModel> fibers;
    std::vector<std::size_t> fiber_of;               ///< per entry of `cells`
    std::vector<std::optional<QMatrix>> expanding;   ///< per fiber override

    std::size_t fiber_index(CellId c) const
    {
        auto it = std::lower_bound(cells.begin(), cells.end(), c);
        if (it == cells.end() || *it != c) {
            throw Error("normal model has no fiber at cell '" + base->name(c) + "'");
        }
        return fiber_of[static_cast<std::size_t>(it - cells.begin())];
    }
};

inline Diagnostic validate_normal_model(const NormalModel& nm)
{
    if (nm.fiber_of.size() != nm.cells.size()) {
        return diagnostic_fail("normal model: fiber assignment does not cover the component");
    }
    for (std::size_t i = 0; i < nm.fibers.size(); ++i) {
        if (auto d = validate_fiber(nm.fibers[i]); !d) {
            return diagnostic_fail("normal model fiber " + std::to_string(i) + ": " + d.message);
        }
    }
    return {};
}

struct ThetaTable {
    ConstructibleFunction theta;
    std::vector<ThetaValue> per_fiber;
};

inline ThetaTable theta_function(const NormalModel& nm)
{
    nm.base->finalize();
    ThetaTable t;
    t.per_fiber = parallel_map(nm.fibers.size(), [&](std::size_t i) {
        return theta_value(nm.fibers[i], choose_expanding(nm.fibers[i], nm.expanding[i]));
    });
    t.theta = ConstructibleFunction::zero(*nm.base);
    for (std::size_t i = 0; i < nm.cells.size(); ++i) {
        t.theta.value[nm.cells[i]] = t.per_fiber[nm.fiber_of[i]].value;
    }
    return t;
}

/// Probe comparison for the stalk formula: RΓ_Z at the origin for closed cone sets Z meeting
/// E only at the origin.
struct StalkProbe {
    std::vector<std::size_t> cones;  ///< a closed set of cones
    std::vector<std::size_t> localized_dims;
    std::vector<std::size_t> probe_dims;
    bool match = false;
};

inline StalkProbe stalk_formula_check(const FiberModel& m, const QMatrix& e, std::vector<std::size_t> z)
{
    const Fan& f = m.fan();
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    if (!is_closed(m.cones->cells, z)) {
        throw Error("stalk_formula_check: probe is not closed");
    }
    for (auto c : z) {
        for (auto r : f.cone(c)) {
            if (in_span(e, QMatrix::from_columns({f.rays()[r]}))) {
                throw Error("stalk_formula_check: probe cone " + f.cone_label(c) + " meets the expanding subspace");
            }
        }
    }
    StalkProbe p;
    p.cones = z;
    Localized l = hyperbolic_localize(m, e);
    p.localized_dims = l.dims;
    std::vector<CellId> all(m.cone_count());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    auto lc = local_cohomology(m.sheaf, z, all);
    p.probe_dims = cohomology(lc.complex).dims();
    auto trim = [](std::vector<std::size_t> v, int lo) {
        std::map<int, std::size_t> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i]) {
                out[lo + static_cast<int>(i)] = v[i];
            }
        }
        return out;
    };
    p.match = trim(p.localized_dims, l.trace.lo) == trim(p.probe_dims, lc.complex.lo);
    return p;
}

}  // namespace lefkit

#endif
