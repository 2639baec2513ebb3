#ifndef LEFKIT_GENERATORS_HPP
#define LEFKIT_GENERATORS_HPP

#include "lefkit/engine.hpp"

#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace lefkit {

using Rng = std::mt19937_64;

inline long uniform_int(Rng& rng, long lo, long hi)
{
    return std::uniform_int_distribution<long>(lo, hi)(rng);
}

inline Q random_rational(Rng& rng, long num_range = 4, long den_max = 3)
{
    return Q(uniform_int(rng, -num_range, num_range), uniform_int(rng, 1, den_max));
}

/// Simplicial complex closed under faces, boundary signs (−1)^i in vertex-index order.
struct Simplicial {
    Complex complex;
    std::vector<std::vector<std::size_t>> vertices;  ///< per cell, sorted
    std::map<std::vector<std::size_t>, CellId> index;
};

inline Simplicial simplicial(const std::vector<std::string>& vnames, std::vector<std::vector<std::size_t>> maximal)
{
    std::vector<std::vector<std::vector<std::size_t>>> by_dim;
    std::map<std::vector<std::size_t>, bool> seen;
    for (auto& m : maximal) {
        std::sort(m.begin(), m.end());
        const std::size_t n = m.size();
        for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
            std::vector<std::size_t> s;
            for (std::size_t i = 0; i < n; ++i) {
                if ((mask >> i) & 1) {
                    s.push_back(m[i]);
                }
            }
            if (!seen[s]) {
                seen[s] = true;
                if (by_dim.size() < s.size()) {
                    by_dim.resize(s.size());
                }
                by_dim[s.size() - 1].push_back(s);
            }
        }
    }
    Simplicial out;
    for (auto& layer : by_dim) {
        std::sort(layer.begin(), layer.end());
        for (const auto& s : layer) {
            std::vector<Incidence> bd;
            std::string name;
            for (std::size_t i = 0; i < s.size(); ++i) {
                name += (i ? "." : "") + vnames.at(s[i]);
            }
            if (s.size() > 1) {
                for (std::size_t i = 0; i < s.size(); ++i) {
                    auto f = s;
                    f.erase(f.begin() + static_cast<std::ptrdiff_t>(i));
                    bd.push_back({out.index.at(f), i % 2 == 0 ? 1 : -1});
                }
            }
            CellId id = out.complex.add_cell(name, static_cast<int>(s.size()) - 1, std::move(bd));
            out.index[s] = id;
            out.vertices.push_back(s);
        }
    }
    out.complex.finalize();
    return out;
}

/// Simplicial map induced by a vertex map that is injective on every simplex.
inline CellularMap simplicial_map(const Simplicial& s, const std::vector<std::size_t>& vmap)
{
    CellularMap m{&s.complex, &s.complex, {}, {}, {}};
    for (CellId c = 0; c < s.complex.size(); ++c) {
        std::vector<std::size_t> img;
        for (auto v : s.vertices[c]) {
            img.push_back(vmap.at(v));
        }
        std::vector<std::size_t> sorted = img;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw Error("simplicial_map: vertex map collapses a simplex");
        }
        int inversions = 0;
        for (std::size_t i = 0; i < img.size(); ++i) {
            for (std::size_t j = i + 1; j < img.size(); ++j) {
                inversions += img[i] > img[j];
            }
        }
        m.image.push_back(s.index.at(sorted));
        m.sign.push_back(inversions % 2 == 0 ? 1 : -1);
    }
    return m;
}

/// Circle with n ≥ 3 vertices v0..v{n-1}, inscribed in the unit circle via rational points
/// ((1−t²)/(1+t²), 2t/(1+t²)).
inline Simplicial circle(std::size_t n)
{
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back("v" + std::to_string(i));
        edges.push_back({i, (i + 1) % n});
    }
    Simplicial s = simplicial(names, edges);
    for (std::size_t i = 0; i < n; ++i) {
        Q t(static_cast<long>(4 * i) - static_cast<long>(2 * n), static_cast<long>(n));
        s.complex.set_coordinates(s.index.at({i}), {(1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)});
    }
    return s;
}

/// Boundary of the octahedron with vertices ±e_i (names x+, x-, y+, ...) and coordinates.
inline Simplicial octahedron()
{
    std::vector<std::string> names{"x+", "x-", "y+", "y-", "z+", "z-"};
    std::vector<std::vector<std::size_t>> faces;
    for (std::size_t a : {0, 1}) {
        for (std::size_t b : {2, 3}) {
            for (std::size_t c : {4, 5}) {
                faces.push_back({a, b, c});
            }
        }
    }
    Simplicial s = simplicial(names, faces);
    for (std::size_t v = 0; v < 6; ++v) {
        std::vector<Q> p(3);
        p[v / 2] = v % 2 == 0 ? 1 : -1;
        s.complex.set_coordinates(s.index.at({v}), p);
    }
    return s;
}

inline std::vector<std::size_t> antipode_on_octahedron() { return {1, 0, 3, 2, 5, 4}; }

/// Path 0 - 1 - ... - m with coordinates.
inline Simplicial path(std::size_t m)
{
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> edges;
    for (std::size_t i = 0; i <= m; ++i) {
        names.push_back("p" + std::to_string(i));
        if (i < m) {
            edges.push_back({i, i + 1});
        }
    }
    Simplicial s = simplicial(names, edges);
    for (std::size_t i = 0; i <= m; ++i) {
        s.complex.set_coordinates(s.index.at({i}), {Q(static_cast<long>(i))});
    }
    return s;
}

/// Product of realized complexes; vertex coordinates are concatenated.
inline ProductComplex realized_product(const Complex& a, const Complex& b)
{
    ProductComplex p = product(a, b);
    for (CellId c = 0; c < p.complex.size(); ++c) {
        auto [s, t] = p.factors[c];
        if (p.complex.dim(c) == 0) {
            auto x = a.coordinate(s);
            auto y = b.coordinate(t);
            if (x && y) {
                std::vector<Q> v = *x;
                v.insert(v.end(), y->begin(), y->end());
                p.complex.set_coordinates(c, v);
            }
        }
    }
    p.complex.finalize();
    return p;
}

/// Random simplicial complex with at most max_cells cells and simplices of dimension ≤ max_dim.
inline Simplicial random_simplicial(Rng& rng, std::size_t max_cells = 200, int max_dim = 3)
{
    const std::size_t n = static_cast<std::size_t>(uniform_int(rng, 4, 10));
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back("v" + std::to_string(i));
    }
    std::vector<std::vector<std::size_t>> maximal;
    for (std::size_t i = 0; i < n; ++i) {
        maximal.push_back({i});
    }
    std::set<std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i) {
        cells.insert({i});
    }
    const long draws = uniform_int(rng, 3, 14);
    for (long t = 0; t < draws; ++t) {
        std::size_t d = static_cast<std::size_t>(uniform_int(rng, 1, max_dim));
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<std::size_t> s(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(n, d + 1)));
        std::sort(s.begin(), s.end());
        auto trial = cells;
        for (std::size_t mask = 1; mask < (std::size_t{1} << s.size()); ++mask) {
            std::vector<std::size_t> f;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if ((mask >> i) & 1) {
                    f.push_back(s[i]);
                }
            }
            trial.insert(f);
        }
        if (trial.size() <= max_cells) {
            cells = std::move(trial);
            maximal.push_back(s);
        }
    }
    return simplicial(names, maximal);
}

// ---------------------------------------------------------------------------------------
// flag sheaves: stalk F_{s(c)} / F_{k(c)} of a fixed flag in Q^r, k and s increasing upward

struct FlagProfile {
    std::size_t rank = 0;
    std::vector<std::size_t> k, s;
};

/// Random monotone profile, constant on `orbit` classes (pass identity_orbits for none).
inline FlagProfile random_profile(Rng& rng, const Complex& x, std::size_t rank, const std::vector<std::size_t>& orbit)
{
    FlagProfile p{rank, std::vector<std::size_t>(x.size()), std::vector<std::size_t>(x.size())};
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> draw;
    for (auto o : orbit) {
        if (!draw.count(o)) {
            auto a = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(rank)));
            auto b = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(rank)));
            draw[o] = {std::min(a, b), std::max(a, b)};
        }
    }
    std::vector<CellId> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](CellId a, CellId b) { return x.dim(a) < x.dim(b); });
    for (CellId c : order) {
        auto [k, s] = draw[orbit[c]];
        for (const auto& inc : x.cell(c).boundary) {
            k = std::max(k, p.k[inc.face]);
            s = std::max(s, p.s[inc.face]);
        }
        p.k[c] = k;
        p.s[c] = std::max(s, k);
    }
    return p;
}

inline std::vector<std::size_t> identity_orbits(const Complex& x)
{
    std::vector<std::size_t> o(x.size());
    std::iota(o.begin(), o.end(), 0);
    return o;
}

/// Basis e_{k+1}..e_s at σ maps to the same indices above k(τ) at τ.
inline QMatrix flag_gen(std::size_t ks, std::size_t ss, std::size_t kt, std::size_t st)
{
    QMatrix g(st - kt, ss - ks);
    for (std::size_t i = ks; i < ss; ++i) {
        if (i >= kt && i < st) {
            g(i - kt, i - ks) = 1;
        }
    }
    return g;
}

inline void fill_flag_sheaf(CellSheaf& f, const FlagProfile& p)
{
    const Complex& x = f.base();
    for (CellId c = 0; c < x.size(); ++c) {
        f.set_stalk(c, p.s[c] - p.k[c]);
    }
    for (CellId t = 0; t < x.size(); ++t) {
        for (const auto& inc : x.cell(t).boundary) {
            auto s = inc.face;
            f.set_gen(s, t, flag_gen(p.k[s], p.s[s], p.k[t], p.s[t]));
        }
    }
    f.finalize();
}

inline CellSheaf flag_sheaf(const Complex& x, const FlagProfile& p)
{
    CellSheaf f(x);
    fill_flag_sheaf(f, p);
    return f;
}

/// Invertible upper-triangular matrix; it preserves the standard flag.
inline QMatrix random_upper(Rng& rng, std::size_t r)
{
    QMatrix t(r, r);
    for (std::size_t i = 0; i < r; ++i) {
        Q d = 0;
        while (is_zero(d)) {
            d = random_rational(rng, 3, 2);
        }
        t(i, i) = d;
        for (std::size_t j = i + 1; j < r; ++j) {
            t(i, j) = uniform_int(rng, -2, 2);
        }
    }
    return t;
}

inline QMatrix flag_block(const QMatrix& t, std::size_t k, std::size_t s)
{
    QMatrix b(s - k, s - k);
    for (std::size_t i = k; i < s; ++i) {
        for (std::size_t j = k; j < s; ++j) {
            b(i - k, j - k) = t(i, j);
        }
    }
    return b;
}

/// Endomorphism of a flag sheaf over the identity map induced by T.
inline SheafHom flag_endo(const CellSheaf& f, const FlagProfile& p, const QMatrix& t)
{
    SheafHom h{&f, CellularMap::identity(f.base()), {}};
    for (CellId c = 0; c < f.base().size(); ++c) {
        h.phi.push_back(flag_block(t, p.k[c], p.s[c]));
    }
    return h;
}

/// Cut at level j: 0 -> F_c/F_k -> F_s/F_k -> F_s/F_c -> 0 with c = clamp(j, k, s).
inline std::pair<FlagProfile, FlagProfile> flag_split(const FlagProfile& p, std::size_t j)
{
    FlagProfile sub = p;
    FlagProfile quo = p;
    for (std::size_t c = 0; c < p.k.size(); ++c) {
        std::size_t cut = std::clamp(j, p.k[c], p.s[c]);
        sub.s[c] = cut;
        quo.k[c] = cut;
    }
    return {sub, quo};
}

// ---------------------------------------------------------------------------------------
// fiber models

inline std::vector<std::size_t> cone_orbits(const FanMapCheck& act)
{
    const std::size_t n = act.cone_perm.size();
    std::vector<std::size_t> orbit(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t d = c; orbit[d] == n; d = act.cone_perm[d]) {
            orbit[d] = c;
        }
    }
    return orbit;
}

inline FiberModel flag_fiber(ConeComplexPtr cc, const QMatrix& psi, const FlagProfile& p, const QMatrix& t)
{
    FiberModel m = empty_fiber(std::move(cc), psi);
    fill_flag_sheaf(m.sheaf, p);
    for (std::size_t c = 0; c < m.cone_count(); ++c) {
        m.Psi[c] = flag_block(t, p.k[c], p.s[c]);
    }
    return m;
}

/// Random conic flag sheaf for ψ; the profile is constant on ψ-orbits so that Ψ exists.
inline FiberModel random_flag_fiber(Rng& rng, ConeComplexPtr cc, const QMatrix& psi, std::size_t rank,
                                    FlagProfile* profile = nullptr, QMatrix* tout = nullptr)
{
    auto act = map_image_check(psi, cc->fan);
    if (!act.ok) {
        throw Error("random_flag_fiber: " + act.message);
    }
    FlagProfile p = random_profile(rng, cc->cells, rank, cone_orbits(act));
    QMatrix t = random_upper(rng, rank);
    if (profile) {
        *profile = p;
    }
    if (tout) {
        *tout = t;
    }
    return flag_fiber(std::move(cc), psi, p, t);
}

/// Rank-r sheaf on the selected cones with identity generizations and Ψ = a·id.
inline FiberModel indicator_fiber(ConeComplexPtr cc, const QMatrix& psi, const std::vector<bool>& in,
                                  std::size_t r = 1, const Q& a = Q(1))
{
    FiberModel m = empty_fiber(cc, psi);
    for (std::size_t c = 0; c < m.cone_count(); ++c) {
        if (in[c]) {
            m.sheaf.set_stalk(c, r);
        }
    }
    for (CellId t = 0; t < cc->cells.size(); ++t) {
        for (const auto& inc : cc->cells.cell(t).boundary) {
            if (in[t] && in[inc.face]) {
                m.sheaf.set_gen(inc.face, t, QMatrix::identity(r));
            }
        }
    }
    m.sheaf.finalize();
    for (std::size_t c = 0; c < m.cone_count(); ++c) {
        m.Psi[c] = QMatrix::identity(m.sheaf.stalk(c), a);
    }
    return m;
}

inline ConeComplexPtr line_cones() { return make_cone_complex(Fan::from_cones(1, {{1}, {-1}}, {{0}, {1}})); }

enum class LineSheaf { Whole, ClosedHalf, OpenHalf };

/// ℂ_ℝ, ℂ_{[0,∞)} or ℂ_{(0,∞)} on the line fan (cones: origin, [0] = ℝ₊, [1] = ℝ₋).
inline FiberModel line_fiber(const Q& lambda, LineSheaf kind)
{
    std::vector<bool> in{kind != LineSheaf::OpenHalf, true, kind == LineSheaf::Whole};
    return indicator_fiber(line_cones(), QMatrix{{lambda}}, in);
}

// ---------------------------------------------------------------------------------------
// sphere example: k strips on a sector fan rotated by 2πj/k

/// Rotation of order k with integer entries (hexagonal basis for k = 3, 6).
inline QMatrix lattice_rotation(int k)
{
    switch (k) {
    case 1: return QMatrix{{1, 0}, {0, 1}};
    case 2: return QMatrix{{-1, 0}, {0, -1}};
    case 3: return QMatrix{{0, -1}, {1, -1}};
    case 4: return QMatrix{{0, -1}, {1, 0}};
    case 6: return QMatrix{{1, -1}, {1, 0}};
    default: throw Error("sphere example: k = " + std::to_string(k) + " has no rational rotation (use 1, 2, 3, 4 or 6)");
    }
}

struct SectorFan {
    ConeComplexPtr cones;
    std::vector<bool> strip;  ///< per cone: lies in the closed strips K
    QMatrix rotation;
};

/// Rays v, w, Rv, Rw, ...; strips are cone(R^i v, R^i w), gaps the rest. k = 1 gets an extra gap ray.
inline SectorFan sector_fan(int k)
{
    QMatrix r = lattice_rotation(k);
    std::vector<Q> v{1, 0};
    std::vector<Q> w = k == 1 ? std::vector<Q>{0, 1} : k == 2 ? std::vector<Q>{1, 1} : std::vector<Q>{2, 1};
    std::vector<std::vector<Q>> rays;
    for (int i = 0; i < k; ++i) {
        rays.push_back(v);
        rays.push_back(w);
        v = r.apply(v);
        w = r.apply(w);
    }
    if (k == 1) {
        rays.push_back({-1, -1});
    }
    std::vector<RaySet> gens;
    const std::size_t n = rays.size();
    for (std::size_t i = 0; i < n; ++i) {
        gens.push_back({i, (i + 1) % n});
    }
    SectorFan out;
    out.cones = make_cone_complex(Fan::from_cones(2, rays, gens));
    out.rotation = r;
    const Fan& f = out.cones->fan;
    const auto strip_rays = static_cast<std::size_t>(2 * k);
    for (std::size_t c = 0; c < f.cone_count(); ++c) {
        const RaySet& s = f.cone(c);
        bool in = true;
        for (auto ray : s) {
            in = in && ray < strip_rays;
        }
        if (s.size() == 2) {
            in = in && s[0] % 2 == 0 && s[1] == s[0] + 1;
        }
        out.strip.push_back(in);
    }
    return out;
}


/// Φ = id on F(φc) -> F(c) for a constant sheaf extended by zero from a set the map preserves.
inline SheafHom indicator_hom(const CellSheaf& f, CellularMap map)
{
    SheafHom h{&f, std::move(map), {}};
    for (CellId c = 0; c < f.base().size(); ++c) {
        h.phi.push_back(QMatrix::identity(f.stalk(c)));
        if (f.stalk(c) != f.stalk(h.map.image[c])) {
            throw Error("indicator_hom: the map does not preserve the support");
        }
    }
    return h;
}

struct DisjointUnion {
    Complex complex;
    std::vector<std::vector<CellId>> cell;  ///< per part: local id -> union id
};

inline DisjointUnion disjoint_union(const std::vector<const Complex*>& parts, const std::vector<std::string>& prefix)
{
    DisjointUnion u;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const Complex& x = *parts[p];
        std::vector<CellId> ids;
        for (CellId c = 0; c < x.size(); ++c) {
            std::vector<Incidence> bd;
            for (const auto& inc : x.cell(c).boundary) {
                bd.push_back({ids.at(inc.face), inc.sign});
            }
            ids.push_back(u.complex.add_cell(prefix.at(p) + x.name(c), x.dim(c), std::move(bd)));
        }
        u.cell.push_back(std::move(ids));
    }
    u.complex.finalize();
    return u;
}

inline QMatrix matrix_power(const QMatrix& m, int e)
{
    QMatrix r = QMatrix::identity(m.rows());
    for (int i = 0; i < e; ++i) {
        r = r * m;
    }
    return r;
}

/// Fiber over one base cell for the fibered trace: a compact disk complex, a sheaf, and Φ.
struct DiskFiber {
    CellSheaf sheaf;
    SheafHom hom;
};

/// The sphere example over the marked circle M₁. The base circle has slice vertices v(2j),
/// j < k, where ψ = 2R^j; every other cell is a generic point (4 vertices when k = 1).
struct SphereExample {
    int k = 1;
    SectorFan sectors;
    Simplicial base;
    NormalModel model;
    CompactifiedFan disk;
    std::vector<CellId> disk_interior, disk_strips, disk_gaps;
    DisjointUnion z_complex;
    std::vector<CellId> z_cells;
    std::vector<CellularMap> rotation;  ///< per slice j, on the disk
    std::vector<std::unique_ptr<CellSheaf>> sheaves;  ///< disk sheaves: F = gaps, ℂ_Y, ℂ_Z
    /// per base cell: hom for F, for ℂ_Y, and for ℂ_Z (slices only)
    std::vector<std::unique_ptr<SheafHom>> f_fiber, y_fiber, z_fiber;

    long recorded_value() const { return static_cast<long>(k) * (k - 1); }
    bool is_slice(CellId c) const
    {
        return base.complex.dim(c) == 0 && base.vertices[c][0] % 2 == 0 && base.vertices[c][0] / 2 < static_cast<std::size_t>(k);
    }
    int slice_index(CellId c) const { return static_cast<int>(base.vertices[c][0] / 2); }
};

inline std::unique_ptr<SphereExample> sphere_example(int k)
{
    auto ex = std::make_unique<SphereExample>();
    ex->k = k;
    ex->sectors = sector_fan(k);
    ex->base = circle(k == 1 ? 4 : static_cast<std::size_t>(2 * k));
    const Fan& f = ex->sectors.cones->fan;
    if (auto d = check_complete(f); !d) {
        throw Error("sphere example: sector fan is not complete: " + d.message);
    }

    // normal model along M₁
    NormalModel& nm = ex->model;
    nm.base = &ex->base.complex;
    std::vector<bool> gap(f.cone_count());
    for (std::size_t c = 0; c < f.cone_count(); ++c) {
        gap[c] = !ex->sectors.strip[c];
    }
    for (int j = 0; j < k; ++j) {
        QMatrix psi = matrix_power(ex->sectors.rotation, j) * Q(2);
        nm.fibers.push_back(indicator_fiber(ex->sectors.cones, psi, gap));
    }
    auto quad = make_cone_complex(orthant_fan(2));
    nm.fibers.push_back(indicator_fiber(quad, QMatrix{{0, -2}, {2, 0}}, std::vector<bool>(quad->fan.cone_count(), true)));
    for (CellId c = 0; c < ex->base.complex.size(); ++c) {
        nm.cells.push_back(c);
        nm.fiber_of.push_back(ex->is_slice(c) ? static_cast<std::size_t>(ex->slice_index(c)) : static_cast<std::size_t>(k));
    }
    nm.expanding.assign(nm.fibers.size(), std::nullopt);

    // the disk D̄ and its cell sets
    ex->disk = fan_compactify(f);
    const Complex& d = ex->disk.complex;
    for (CellId c = 0; c < d.size(); ++c) {
        if (ex->disk.is_infinity_cell[c]) {
            continue;
        }
        ex->disk_interior.push_back(c);
        (ex->sectors.strip[ex->disk.cone_of_cell[c]] ? ex->disk_strips : ex->disk_gaps).push_back(c);
    }
    for (int j = 0; j < k; ++j) {
        auto act = map_image_check(matrix_power(ex->sectors.rotation, j), f);
        ex->rotation.push_back(compactified_map(ex->disk, act));
        ex->rotation.back().moving.clear();
    }

    // Z: one copy of the strips per slice
    std::vector<const Complex*> parts(static_cast<std::size_t>(k), &d);
    std::vector<std::string> prefix;
    for (int j = 0; j < k; ++j) {
        prefix.push_back("s" + std::to_string(j) + ":");
    }
    ex->z_complex = disjoint_union(parts, prefix);
    for (int j = 0; j < k; ++j) {
        for (CellId c : ex->disk_strips) {
            ex->z_cells.push_back(ex->z_complex.cell[static_cast<std::size_t>(j)][c]);
        }
    }
    std::sort(ex->z_cells.begin(), ex->z_cells.end());

    // fibers of F = ℂ_{Y∖Z}, ℂ_Y, ℂ_Z over each base cell
    for (const auto* cells : {&ex->disk_gaps, &ex->disk_interior, &ex->disk_strips}) {
        ex->sheaves.push_back(std::make_unique<CellSheaf>(constant_sheaf(d, 1, cells)));
    }
    for (CellId c = 0; c < ex->base.complex.size(); ++c) {
        const bool slice = ex->is_slice(c);
        CellularMap m = slice ? ex->rotation[static_cast<std::size_t>(ex->slice_index(c))] : CellularMap::identity(d);
        ex->f_fiber.push_back(std::make_unique<SheafHom>(indicator_hom(*ex->sheaves[slice ? 0 : 1], m)));
        ex->y_fiber.push_back(std::make_unique<SheafHom>(indicator_hom(*ex->sheaves[1], m)));
        ex->z_fiber.push_back(slice ? std::make_unique<SheafHom>(indicator_hom(*ex->sheaves[2], m)) : nullptr);
    }
    return ex;
}

/// Σ over base cells of (−1)^dim · (global trace of the fiber hom) · coefficient.
inline Q fibered_trace(const Complex& base, const std::vector<const SheafHom*>& fibers)
{
    auto t = ConstructibleFunction::zero(base);
    for (CellId c = 0; c < base.size(); ++c) {
        if (fibers[c]) {
            t.value[c] = global_trace(*fibers[c]);
        }
    }
    return fibered_global_trace(t);
}


// ---------------------------------------------------------------------------------------
// oracles

/// Sector sum for diagonal ψ on an orthant fan: Σ_{J ⊂ expanding axes} Σ_ε (−1)^{|J|} tr Ψ on
/// the stalk of the cone spanned by ε_i e_i, i ∈ J.
inline Q toric_sector_sum(const FiberModel& m)
{
    const Fan& f = m.fan();
    const auto n = static_cast<std::size_t>(f.dim());
    std::vector<std::size_t> expanding;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && !is_zero(m.psi(i, j))) {
                throw Error("toric_sector_sum: ψ is not diagonal");
            }
        }
        if (m.psi(i, i) > 1) {
            expanding.push_back(i);
        }
    }
    auto ray_of = [&](std::size_t axis, int s) {
        std::vector<Q> v(n);
        v[axis] = s;
        for (std::size_t r = 0; r < f.rays().size(); ++r) {
            if (f.rays()[r] == v) {
                return r;
            }
        }
        throw Error("toric_sector_sum: not an orthant fan");
    };
    Q total = 0;
    const std::size_t e = expanding.size();
    for (std::size_t jmask = 0; jmask < (std::size_t{1} << e); ++jmask) {
        std::vector<std::size_t> axes;
        for (std::size_t i = 0; i < e; ++i) {
            if ((jmask >> i) & 1) {
                axes.push_back(expanding[i]);
            }
        }
        for (std::size_t emask = 0; emask < (std::size_t{1} << axes.size()); ++emask) {
            RaySet cone;
            for (std::size_t i = 0; i < axes.size(); ++i) {
                cone.push_back(ray_of(axes[i], (emask >> i) & 1 ? -1 : 1));
            }
            Q t = m.Psi[f.cone_index(cone)].trace();
            total += axes.size() % 2 == 0 ? t : Q(-t);
        }
    }
    return total;
}

/// One-point compactification of a line fiber: the circle o, ∞ with edges ℝ₊, ℝ₋ carrying j_!G.
struct LineOracle {
    Q global = 0;
    Q theta_infinity = 0;
    Q theta_origin = 0;  ///< global − θ(∞)
};

inline LineOracle line_oracle(const FiberModel& m)
{
    if (m.fan().dim() != 1) {
        throw Error("line_oracle: fiber is not a line");
    }
    if (auto d = validate_fiber(m); !d) {
        throw Error("line_oracle: " + d.message);
    }
    const Q lam = m.psi(0, 0);
    Complex c;
    c.add_cell("o", 0);
    c.add_cell("inf", 0);
    c.add_cell("R+", 1, std::vector<std::pair<std::string, int>>{{"o", -1}, {"inf", 1}});
    c.add_cell("R-", 1, std::vector<std::pair<std::string, int>>{{"o", -1}, {"inf", 1}});
    c.finalize();
    CellSheaf f(c);
    // cell ids: o 0, inf 1, R+ 2, R- 3; cone ids: origin 0, [0] ℝ₊ 1, [1] ℝ₋ 2
    const std::size_t cone_of[] = {0, 0, 1, 2};
    for (CellId x : {0, 2, 3}) {
        f.set_stalk(x, m.sheaf.stalk(cone_of[x]));
    }
    f.set_gen(0, 2, m.sheaf.gen(0, 1));
    f.set_gen(0, 3, m.sheaf.gen(0, 2));
    f.finalize();
    const bool swap = lam < 0;
    SheafHom h{&f, CellularMap::identity(c), {}};
    if (swap) {
        h.map.image = {0, 1, 3, 2};
    }
    for (CellId x = 0; x < c.size(); ++x) {
        h.phi.push_back(x == 1 ? QMatrix(0, 0) : m.Psi[cone_of[x]]);
    }
    if (auto d = validate_hom(h); !d) {
        throw Error("line_oracle: " + d.message);
    }
    LineOracle out;
    out.global = global_trace(h);
    // germ at ∞ in u = 1/x: u > 0 is the far end of ℝ₊
    FiberModel inf = empty_fiber(line_cones(), QMatrix{{1 / lam}});
    inf.sheaf.set_stalk(1, m.sheaf.stalk(1));
    inf.sheaf.set_stalk(2, m.sheaf.stalk(2));
    inf.sheaf.finalize();
    inf.Psi = {QMatrix(0, 0), m.Psi[1], m.Psi[2]};
    out.theta_infinity = theta_value(inf).value;
    out.theta_origin = out.global - out.theta_infinity;
    return out;
}

// ---------------------------------------------------------------------------------------
// random fan models

enum class FanKind { Line, Diagonal2, Diagonal3, RotationScale, SwapScale, Sector, SignedPermutation3 };

struct FanCase {
    FanKind kind = FanKind::Line;
    std::vector<Q> scalars;
    int sector_k = 4;
    int sector_j = 1;
    std::size_t rank = 2;
    std::uint64_t sheaf_seed = 0;
};

inline const char* to_string(FanKind k)
{
    switch (k) {
    case FanKind::Line: return "line";
    case FanKind::Diagonal2: return "diagonal2";
    case FanKind::Diagonal3: return "diagonal3";
    case FanKind::RotationScale: return "rotation-scale";
    case FanKind::SwapScale: return "swap-scale";
    case FanKind::Sector: return "sector";
    case FanKind::SignedPermutation3: return "signed-permutation3";
    }
    return "?";
}

/// Real scalar of the given class: 0 = (1,∞), 1 = (0,1), 2 = negative.
inline Q scalar_of_class(Rng& rng, int cls)
{
    long a = uniform_int(rng, 2, 9);
    long b = uniform_int(rng, 1, a - 1);
    Q q(a, b);
    switch (cls) {
    case 0: return q;
    case 1: return 1 / q;
    default: return uniform_int(rng, 0, 1) ? Q(-q) : Q(-1 / q);
    }
}

inline int class_of(const Q& q) { return q > 1 ? 0 : q > 0 ? 1 : 2; }

/// Distinct scalars with the given classes.
inline std::vector<Q> distinct_scalars(Rng& rng, const std::vector<int>& classes)
{
    for (;;) {
        std::vector<Q> s;
        for (int c : classes) {
            s.push_back(scalar_of_class(rng, c));
        }
        auto t = s;
        std::sort(t.begin(), t.end());
        if (std::adjacent_find(t.begin(), t.end()) == t.end()) {
            return s;
        }
    }
}

inline QMatrix fan_case_psi(const FanCase& c)
{
    const auto& s = c.scalars;
    switch (c.kind) {
    case FanKind::Line: return QMatrix{{s[0]}};
    case FanKind::Diagonal2: return QMatrix{{s[0], 0}, {0, s[1]}};
    case FanKind::Diagonal3: return QMatrix{{s[0], 0, 0}, {0, s[1], 0}, {0, 0, s[2]}};
    case FanKind::RotationScale: return QMatrix{{0, -s[0]}, {s[0], 0}};
    case FanKind::SwapScale: return QMatrix{{0, s[0]}, {s[1], 0}};
    case FanKind::Sector: return matrix_power(lattice_rotation(c.sector_k), c.sector_j) * s[0];
    case FanKind::SignedPermutation3: return QMatrix{{0, s[0], 0}, {s[1], 0, 0}, {0, 0, s[2]}};
    }
    return {};
}

inline ConeComplexPtr fan_case_cones(const FanCase& c)
{
    switch (c.kind) {
    case FanKind::Line: return line_cones();
    case FanKind::Diagonal2:
    case FanKind::RotationScale:
    case FanKind::SwapScale: return make_cone_complex(orthant_fan(2));
    case FanKind::Sector: return sector_fan(c.sector_k).cones;
    default: return make_cone_complex(orthant_fan(3));
    }
}

inline FiberModel build_fan_case(const FanCase& c)
{
    Rng rng(c.sheaf_seed);
    return random_flag_fiber(rng, fan_case_cones(c), fan_case_psi(c), c.rank);
}

inline FanCase random_fan_case(Rng& rng)
{
    FanCase c;
    c.kind = static_cast<FanKind>(uniform_int(rng, 0, 6));
    c.rank = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    c.sheaf_seed = rng();
    auto cls = [&] { return static_cast<int>(uniform_int(rng, 0, 2)); };
    switch (c.kind) {
    case FanKind::Line: c.scalars = distinct_scalars(rng, {cls()}); break;
    case FanKind::Diagonal2: c.scalars = distinct_scalars(rng, {cls(), cls()}); break;
    case FanKind::Diagonal3: c.scalars = distinct_scalars(rng, {cls(), cls(), cls()}); break;
    case FanKind::RotationScale: c.scalars = distinct_scalars(rng, {static_cast<int>(uniform_int(rng, 0, 1))}); break;
    case FanKind::SwapScale: {
        // ab = −q² gives a complex pair, ab = q² the real pair ±q
        Q q = scalar_of_class(rng, static_cast<int>(uniform_int(rng, 0, 1)));
        Q a = uniform_int(rng, 1, 3);
        c.scalars = {a, (uniform_int(rng, 0, 1) ? q * q : Q(-q * q)) / a};
        break;
    }
    case FanKind::Sector: {
        const int ks[] = {2, 3, 4, 6};
        c.sector_k = ks[uniform_int(rng, 0, 3)];
        c.sector_j = static_cast<int>(uniform_int(rng, 0, c.sector_k - 1));
        c.scalars = {scalar_of_class(rng, static_cast<int>(uniform_int(rng, 0, 1)))};
        break;
    }
    case FanKind::SignedPermutation3: {
        Q q = scalar_of_class(rng, static_cast<int>(uniform_int(rng, 0, 1)));
        c.scalars = {Q(1), q * q * (uniform_int(rng, 0, 1) ? 1 : -1), scalar_of_class(rng, cls())};
        break;
    }
    }
    return c;
}

/// Same case with ψ replaced by one with the same spectral classification and cone action.
inline FanCase classification_equivalent(Rng& rng, const FanCase& c)
{
    FanCase d = c;
    switch (c.kind) {
    case FanKind::Line:
    case FanKind::Diagonal2:
    case FanKind::Diagonal3: {
        std::vector<int> cls;
        for (const auto& s : c.scalars) {
            cls.push_back(class_of(s));
        }
        d.scalars = distinct_scalars(rng, cls);  // classes fix the signs, hence the cone action
        break;
    }
    case FanKind::RotationScale:
    case FanKind::Sector: d.scalars = {scalar_of_class(rng, class_of(c.scalars[0]))}; break;
    case FanKind::SwapScale: {
        Q prod = c.scalars[0] * c.scalars[1];
        Q q = scalar_of_class(rng, prod > 1 || prod < -1 ? 0 : 1);
        d.scalars = {c.scalars[0], (prod > 0 ? q * q : Q(-q * q)) / c.scalars[0]};
        break;
    }
    case FanKind::SignedPermutation3: {
        Q q = scalar_of_class(rng, abs(c.scalars[1]) > 1 ? 0 : 1);
        d.scalars = {Q(1), q * q * sign(c.scalars[1]), scalar_of_class(rng, class_of(c.scalars[2]))};
        break;
    }
    }
    return d;
}

}  // namespace lefkit

#endif
