#ifndef LEFKIT_ENGINE_HPP
#define LEFKIT_ENGINE_HPP

#include "lefkit/euler.hpp"
#include "lefkit/hyploc.hpp"
#include "lefkit/parallel.hpp"

#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace lefkit {

inline Q global_trace(const SheafHom& h)
{
    h.sheaf->base().finalize();
    auto sc = sections_complex(*h.sheaf, all_cells(h.sheaf->base()));
    return endo_trace(sc.complex, induced_endo(h, sc)).cohomology_alternating;
}

/// Hopf side: Σ over fixed dimension-preserving cells of (−1)^dim · sign · tr Φ_c.
inline Q cochain_fixed_sum(const SheafHom& h)
{
    const Complex& x = h.sheaf->base();
    Q s = 0;
    for (CellId c = 0; c < x.size(); ++c) {
        if (h.map.image[c] == c && h.sheaf->stalk(c) > 0) {
            Q t = h.phi[c].trace() * h.map.sign[c];
            s += x.dim(c) % 2 == 0 ? t : Q(-t);
        }
    }
    return s;
}

/// Data a scenario attaches to a fixed component: the normal model, plus the non-characteristic
/// flag with optional declared signs sgn det(id − φ′) per model cell.
struct ComponentData {
    NormalModel model;
    bool non_characteristic = false;
    std::vector<int> declared_sign;
};

struct FixedComponent {
    std::size_t id = 0;
    std::vector<CellId> cells;
    std::optional<std::size_t> data;  ///< index into the scenario's ComponentData
    bool open = false;                ///< clopen in X: zero normal bundle
};

inline std::vector<FixedComponent> fixed_components(const CellularMap& phi)
{
    const Complex& x = *phi.domain;
    auto fixed = pointwise_fixed_cells(phi);
    std::vector<std::size_t> parent(x.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) {
            a = parent[a] = parent[parent[a]];
        }
        return a;
    };
    for (CellId c : fixed) {
        for (const auto& inc : x.cell(c).boundary) {
            parent[find(inc.face)] = find(c);
        }
    }
    std::vector<FixedComponent> out;
    std::vector<std::optional<std::size_t>> slot(x.size());
    for (CellId c : fixed) {
        auto r = find(c);
        if (!slot[r]) {
            slot[r] = out.size();
            out.push_back({out.size(), {}, std::nullopt, false});
        }
        out[*slot[r]].cells.push_back(c);
    }
    for (auto& comp : out) {
        comp.open = is_open(x, comp.cells);
    }
    return out;
}

inline void attach(std::vector<FixedComponent>& comps, const std::vector<ComponentData>& data)
{
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto cells = data[i].model.cells;
        std::sort(cells.begin(), cells.end());
        for (auto& c : comps) {
            if (c.cells == cells) {
                c.data = i;
            }
        }
    }
}

enum class Strategy { Theta, NonCharacteristic, StalkShortcut };

inline const char* to_string(Strategy s)
{
    switch (s) {
    case Strategy::Theta: return "theta";
    case Strategy::NonCharacteristic: return "non_characteristic";
    case Strategy::StalkShortcut: return "stalk_shortcut";
    }
    return "?";
}

struct StrategyResult {
    Strategy strategy = Strategy::Theta;
    bool applicable = false;
    std::string reason;  ///< violated hypothesis when not applicable
    Q value = 0;
    std::optional<ThetaTable> theta;
};

inline bool locally_constant(const FiberModel& m)
{
    const Complex& x = m.cones->cells;
    for (CellId t = 0; t < x.size(); ++t) {
        for (const auto& inc : x.cell(t).boundary) {
            QMatrix g = m.sheaf.gen(inc.face, t);
            if (g.rows() != g.cols() || rank(g) != g.rows()) {
                return false;
            }
        }
    }
    return true;
}

inline bool has_real_eigenvalue_above_one(const QMatrix& psi)
{
    if (psi.rows() == 0) {
        return false;
    }
    for (const auto& f : classify_spectrum(psi).factors) {
        if (f.has(RootClass::RealAboveOne)) {
            return true;
        }
    }
    return false;
}

inline int sign_det_id_minus(const QMatrix& psi)
{
    if (psi.rows() == 0) {
        return 1;
    }
    return sign(determinant(QMatrix::identity(psi.rows()) - psi));
}

inline StrategyResult local_contribution(const SheafHom& h, const FixedComponent& comp, const ComponentData* data,
                                         Strategy s)
{
    const Complex& x = h.sheaf->base();
    StrategyResult r;
    r.strategy = s;
    CellSet m{comp.cells, SetKind::Closed};
    auto trace_fn = local_trace_function(h, comp.cells);
    auto fail = [&](std::string why) {
        r.applicable = false;
        r.reason = std::move(why);
        return r;
    };
    if (!data) {
        if (!comp.open) {
            return fail("no normal model attached");
        }
        if (s == Strategy::Theta) {
            return fail("no normal model attached");
        }
        r.applicable = true;
        r.value = euler_integral_c(trace_fn, m);
        return r;
    }
    const NormalModel& nm = data->model;
    if (auto d = validate_normal_model(nm); !d) {
        return fail(d.message);
    }
    try {
        switch (s) {
        case Strategy::Theta: {
            auto t = theta_function(nm);
            r.value = euler_integral_c(t.theta, m);
            r.theta = std::move(t);
            break;
        }
        case Strategy::NonCharacteristic: {
            if (!data->non_characteristic) {
                return fail("component is not flagged non-characteristic");
            }
            auto weighted = ConstructibleFunction::zero(x);
            for (std::size_t i = 0; i < nm.cells.size(); ++i) {
                const FiberModel& fm = nm.fibers[nm.fiber_of[i]];
                if (!locally_constant(fm)) {
                    return fail("localized data is not constant along the fiber at '" + x.name(nm.cells[i]) + "'");
                }
                int sg = sign_det_id_minus(fm.psi);
                if (!data->declared_sign.empty() && data->declared_sign.at(i) != sg) {
                    return fail("declared sgn det(id - phi') at '" + x.name(nm.cells[i]) + "' disagrees with the model");
                }
                weighted.value[nm.cells[i]] = trace_fn(nm.cells[i]) * sg;
            }
            r.value = euler_integral_c(weighted, m);
            break;
        }
        case Strategy::StalkShortcut: {
            for (std::size_t i = 0; i < nm.fibers.size(); ++i) {
                if (has_real_eigenvalue_above_one(nm.fibers[i].psi)) {
                    return fail("fiber " + std::to_string(i) + " has a real eigenvalue > 1");
                }
            }
            r.value = euler_integral_c(trace_fn, m);
            break;
        }
        }
    } catch (const Error& e) {
        return fail(e.what());
    }
    r.applicable = true;
    return r;
}

struct ComponentReport {
    FixedComponent component;
    bool meets_support = false;
    std::vector<StrategyResult> strategies;
    std::optional<Strategy> used;
    Q contribution = 0;
    bool strategies_agree = true;
    Q restricted = 0;
    bool localizable = false;
    std::string error;
};

struct LefschetzReport {
    Q global = 0;
    Q cochain_global = 0;
    std::vector<ComponentReport> components;
    Q local_sum = 0;
    Q residual = 0;
    std::vector<std::string> errors;
    bool pass = false;
};

inline ComponentReport evaluate_component(const SheafHom& h, const FixedComponent& comp,
                                          const std::vector<ComponentData>& data)
{
    const CellSheaf& f = *h.sheaf;
    ComponentReport cr;
    cr.component = comp;
    // supp F is the closure of the nonzero stalks
    for (CellId c : star_of(f.base(), comp.cells)) {
        if (f.stalk(c) > 0) {
            cr.meets_support = true;
        }
    }
    const ComponentData* d = comp.data ? &data[*comp.data] : nullptr;
    if (!cr.meets_support) {
        cr.localizable = true;
        return cr;
    }
    for (Strategy s : {Strategy::Theta, Strategy::NonCharacteristic, Strategy::StalkShortcut}) {
        cr.strategies.push_back(local_contribution(h, comp, d, s));
    }
    for (const auto& r : cr.strategies) {
        if (!r.applicable) {
            continue;
        }
        if (!cr.used) {
            cr.used = r.strategy;
            cr.contribution = r.value;
        } else if (r.value != cr.contribution) {
            cr.strategies_agree = false;
        }
    }
    if (!cr.used) {
        std::string why;
        for (const auto& r : cr.strategies) {
            why += std::string(why.empty() ? "" : "; ") + to_string(r.strategy) + ": " + r.reason;
        }
        cr.error = "component " + std::to_string(comp.id) + " has no usable strategy (" + why + ")";
    } else if (!cr.strategies_agree) {
        cr.error = "component " + std::to_string(comp.id) + ": strategies disagree";
    }
    cr.restricted = trace_restricted(h, CellSet{comp.cells, SetKind::Closed}).integral;
    cr.localizable = cr.restricted == cr.contribution;
    return cr;
}

/// Global trace against the sum of local contributions over the fixed components.
inline LefschetzReport verify_kashiwara(const SheafHom& h, const std::vector<ComponentData>& data)
{
    const Complex& x = h.sheaf->base();
    x.finalize();
    for (const auto& d : data) {
        d.model.base->finalize();
        for (const auto& fm : d.model.fibers) {
            fm.cones->cells.finalize();
        }
    }
    LefschetzReport rep;
    if (auto d = validate_hom(h); !d) {
        rep.errors.push_back(d.message);
        return rep;
    }
    for (CellId c : invariant_unfixed_cells(h.map)) {
        for (CellId t : star_of(x, {c})) {
            if (h.sheaf->stalk(t) > 0) {
                rep.errors.push_back("cell '" + x.name(c) + "' is invariant but not pointwise fixed; subdivide it");
                break;
            }
        }
    }
    rep.global = global_trace(h);
    rep.cochain_global = cochain_fixed_sum(h);
    auto comps = fixed_components(h.map);
    attach(comps, data);
    rep.components = parallel_map(comps.size(), [&](std::size_t i) { return evaluate_component(h, comps[i], data); });
    for (const auto& cr : rep.components) {
        rep.local_sum += cr.contribution;
        if (!cr.error.empty()) {
            rep.errors.push_back(cr.error);
        }
    }
    rep.residual = rep.global - rep.local_sum;
    rep.pass = rep.errors.empty() && rep.residual == 0 && rep.global == rep.cochain_global;
    return rep;
}

// ---------------------------------------------------------------------------------------
// products and compactified fibers

inline CellularMap product_map(const ProductComplex& p, const CellularMap& f, const CellularMap& g)
{
    CellularMap m{&p.complex, &p.complex, {}, {}, {}};
    for (CellId c = 0; c < p.complex.size(); ++c) {
        auto [a, b] = p.factors[c];
        m.image.push_back(p.index.at({f.image[a], g.image[b]}));
        m.sign.push_back(f.preserves_dim(a) && g.preserves_dim(b) ? f.sign[a] * g.sign[b] : 0);
        m.moving.push_back(f.is_moving(a) || g.is_moving(b));
    }
    return m;
}

/// External tensor product of sheaves on the two factors.
inline CellSheaf product_sheaf(const ProductComplex& p, const CellSheaf& a, const CellSheaf& b)
{
    CellSheaf out(p.complex);
    for (CellId c = 0; c < p.complex.size(); ++c) {
        auto [s, t] = p.factors[c];
        out.set_stalk(c, a.stalk(s) * b.stalk(t));
    }
    for (CellId c = 0; c < p.complex.size(); ++c) {
        auto [s, t] = p.factors[c];
        for (const auto& inc : a.base().cell(s).boundary) {
            out.set_gen(p.index.at({inc.face, t}), c,
                        kronecker(a.gen(inc.face, s), QMatrix::identity(b.stalk(t))));
        }
        for (const auto& inc : b.base().cell(t).boundary) {
            out.set_gen(p.index.at({s, inc.face}), c,
                        kronecker(QMatrix::identity(a.stalk(s)), b.gen(inc.face, t)));
        }
    }
    out.finalize();
    return out;
}

inline SheafHom product_hom(const ProductComplex& p, const CellSheaf& f, const SheafHom& a, const SheafHom& b)
{
    SheafHom h{&f, product_map(p, a.map, b.map), {}};
    for (CellId c = 0; c < p.complex.size(); ++c) {
        auto [s, t] = p.factors[c];
        h.phi.push_back(kronecker(a.phi[s], b.phi[t]));
    }
    return h;
}

/// ψ acting on the compactified fan; nonzero invariant cones and their cells at infinity move.
inline CellularMap compactified_map(const CompactifiedFan& cf, const FanMapCheck& act)
{
    const Complex& x = cf.complex;
    CellularMap m{&x, &x, {}, {}, {}};
    for (CellId c = 0; c < x.size(); ++c) {
        std::size_t k = cf.cone_of_cell[c];
        std::size_t img = act.cone_perm[k];
        CellId ic = cf.is_infinity_cell[c] ? *cf.at_infinity[img] : cf.interior[img];
        m.image.push_back(ic);
        m.sign.push_back(act.orientation[k]);
        bool fixed_point = k == 0 || (cf.is_infinity_cell[c] && x.dim(c) == 0);
        m.moving.push_back(img == k && !fixed_point);
    }
    return m;
}

/// The conic sheaf extended by zero across the sphere at infinity, with its endomorphism.
struct CompactifiedFiber {
    CompactifiedFan cf;
    CellSheaf sheaf;
    SheafHom hom;
};

inline std::unique_ptr<CompactifiedFiber> compactify_fiber(const FiberModel& m)
{
    FanMapCheck act;
    if (auto d = validate_fiber(m, &act); !d) {
        throw Error("compactify_fiber: " + d.message);
    }
    auto out = std::make_unique<CompactifiedFiber>();
    out->cf = fan_compactify(m.fan());
    const Complex& x = out->cf.complex;
    out->sheaf = CellSheaf(x);
    for (CellId c = 0; c < x.size(); ++c) {
        if (!out->cf.is_infinity_cell[c]) {
            out->sheaf.set_stalk(c, m.sheaf.stalk(out->cf.cone_of_cell[c]));
        }
    }
    for (CellId t = 0; t < x.size(); ++t) {
        if (out->cf.is_infinity_cell[t]) {
            continue;
        }
        for (const auto& inc : x.cell(t).boundary) {
            if (!out->cf.is_infinity_cell[inc.face]) {
                out->sheaf.set_gen(inc.face, t,
                                   m.sheaf.gen(out->cf.cone_of_cell[inc.face], out->cf.cone_of_cell[t]));
            }
        }
    }
    out->sheaf.finalize();
    out->hom = SheafHom{&out->sheaf, compactified_map(out->cf, act), {}};
    for (CellId c = 0; c < x.size(); ++c) {
        if (out->cf.is_infinity_cell[c]) {
            out->hom.phi.push_back(QMatrix(0, 0));
        } else {
            out->hom.phi.push_back(m.Psi[out->cf.cone_of_cell[c]]);
        }
    }
    return out;
}

/// Fiber with an extra base factor: stalks B ⊗ G(σ), endomorphism A ⊗ Ψ_σ.
inline FiberModel tensor_fiber(const FiberModel& m, std::size_t r, const QMatrix& a)
{
    FiberModel out = empty_fiber(m.cones, m.psi);
    const Complex& x = m.cones->cells;
    for (CellId c = 0; c < x.size(); ++c) {
        out.sheaf.set_stalk(c, r * m.sheaf.stalk(c));
    }
    for (const auto& [key, g] : m.sheaf.generizations()) {
        out.sheaf.set_gen(key.first, key.second, kronecker(QMatrix::identity(r), g));
    }
    out.sheaf.finalize();
    for (CellId c = 0; c < x.size(); ++c) {
        out.Psi[c] = kronecker(a, m.Psi[c]);
    }
    return out;
}

/// Local model at the point at infinity of an invariant coordinate ray, for a diagonal ψ on the
/// orthant fan with the sheaf extended by zero. Coordinates u = 1/|x_i|, t_j = x_j/|x_i|.
inline FiberModel orthant_infinity_model(const FiberModel& m, std::size_t ray)
{
    const Fan& f = m.fan();
    const int n = f.dim();
    const auto& rv = f.rays().at(ray);
    int axis = -1;
    for (int a = 0; a < n; ++a) {
        if (!is_zero(rv[static_cast<std::size_t>(a)])) {
            axis = a;
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && !is_zero(m.psi(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))) {
                throw Error("infinity model: fiber map is not diagonal");
            }
        }
    }
    const Q lam = m.psi(static_cast<std::size_t>(axis), static_cast<std::size_t>(axis));
    if (sign(lam) <= 0) {
        throw Error("infinity model: ray is not invariant");
    }
    const int dir = sign(rv[static_cast<std::size_t>(axis)]);
    // local axis 0 is u, local axes 1.. are the remaining coordinates in order
    std::vector<int> orig_axis;
    for (int a = 0; a < n; ++a) {
        if (a != axis) {
            orig_axis.push_back(a);
        }
    }
    QMatrix lpsi(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    lpsi(0, 0) = 1 / lam;
    for (std::size_t k = 0; k < orig_axis.size(); ++k) {
        auto a = static_cast<std::size_t>(orig_axis[k]);
        lpsi(k + 1, k + 1) = m.psi(a, a) / lam;
    }
    auto cc = make_cone_complex(orthant_fan(n));
    FiberModel out = empty_fiber(cc, lpsi);
    const Fan& lf = cc->fan;
    auto ray_of = [&](int a, int s) -> std::size_t {
        std::vector<Q> v(static_cast<std::size_t>(n));
        v[static_cast<std::size_t>(a)] = s;
        for (std::size_t r = 0; r < f.rays().size(); ++r) {
            if (f.rays()[r] == v) {
                return r;
            }
        }
        throw Error("infinity model: fan is not the orthant fan");
    };
    // local cone -> original cone (if the sheaf can be nonzero there)
    std::vector<std::optional<std::size_t>> orig(lf.cone_count());
    for (std::size_t c = 0; c < lf.cone_count(); ++c) {
        bool u_plus = false;
        bool u_minus = false;
        RaySet oc{ray};
        for (auto lr : lf.cone(c)) {
            int la = static_cast<int>(lr / 2);
            int ls = lr % 2 == 0 ? 1 : -1;
            if (la == 0) {
                (ls > 0 ? u_plus : u_minus) = true;
            } else {
                oc.push_back(ray_of(orig_axis[static_cast<std::size_t>(la - 1)], ls * dir));
            }
        }
        if (u_plus && !u_minus) {
            orig[c] = f.cone_index(oc);
            out.sheaf.set_stalk(c, m.sheaf.stalk(*orig[c]));
        }
    }
    for (CellId t = 0; t < cc->cells.size(); ++t) {
        for (const auto& inc : cc->cells.cell(t).boundary) {
            if (orig[t] && orig[inc.face]) {
                out.sheaf.set_gen(inc.face, t, m.sheaf.gen(*orig[inc.face], *orig[t]));
            }
        }
    }
    out.sheaf.finalize();
    for (std::size_t c = 0; c < lf.cone_count(); ++c) {
        out.Psi[c] = orig[c] ? m.Psi[*orig[c]] : QMatrix(0, 0);
    }
    return out;
}

/// Fixed components of id_B × ψ̄ on B × (compactified fan) with their normal models: the origin
/// section and one section per invariant ray at infinity. The base endomorphism must cover id_B.
inline std::vector<ComponentData> product_component_data(const ProductComplex& p, const SheafHom& base,
                                                         const FiberModel& fm, const CompactifiedFiber& cfb)
{
    const Complex& b = base.sheaf->base();
    for (CellId c = 0; c < b.size(); ++c) {
        if (base.map.image[c] != c || base.map.sign[c] != 1) {
            throw Error("product_component_data: base map is not the identity");
        }
    }
    FanMapCheck act = map_image_check(fm.psi, fm.fan());
    std::vector<std::pair<CellId, FiberModel>> points{{cfb.cf.interior[0], fm}};
    for (std::size_t r = 0; r < fm.fan().rays().size(); ++r) {
        std::size_t rc = fm.fan().cone_index({r});
        if (act.cone_perm[rc] == rc) {
            points.emplace_back(*cfb.cf.at_infinity[rc], orthant_infinity_model(fm, r));
        }
    }
    std::vector<ComponentData> out;
    for (auto& [pt, local] : points) {
        ComponentData d;
        d.model.base = &p.complex;
        for (CellId c = 0; c < b.size(); ++c) {
            d.model.cells.push_back(p.index.at({c, pt}));
        }
        std::vector<std::size_t> order(d.model.cells.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto i, auto j) { return d.model.cells[i] < d.model.cells[j]; });
        std::vector<CellId> sorted;
        for (auto i : order) {
            sorted.push_back(d.model.cells[i]);
            d.model.fibers.push_back(tensor_fiber(local, base.sheaf->stalk(i), base.phi[i]));
            d.model.fiber_of.push_back(d.model.fibers.size() - 1);
        }
        d.model.cells = std::move(sorted);
        d.model.expanding.assign(d.model.fibers.size(), std::nullopt);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace lefkit

#endif
