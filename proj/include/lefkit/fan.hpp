#ifndef LEFKIT_FAN_HPP
#define LEFKIT_FAN_HPP

#include "lefkit/complex.hpp"
#include "lefkit/matrix.hpp"
#include "lefkit/spectrum.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace lefkit {

using RaySet = std::vector<std::size_t>;

/// Simplicial rational fan. Cones are sorted ray-index sets; index 0 is the origin cone.
class Fan {
public:
    Fan() : Fan(0) {}
    explicit Fan(int dim) : dim_(dim) { add_cone_closed({}); }

    /// Builds a fan from rays and generating cones; all faces are added.
    static Fan from_cones(int dim, std::vector<std::vector<Q>> rays, const std::vector<RaySet>& generators)
    {
        Fan f(dim);
        for (auto& r : rays) {
            if (static_cast<int>(r.size()) != dim) {
                throw Error("fan: ray of length " + std::to_string(r.size()) + " in dimension " + std::to_string(dim));
            }
            bool nonzero = std::any_of(r.begin(), r.end(), [](const Q& q) { return !is_zero(q); });
            if (!nonzero) {
                throw Error("fan: zero ray");
            }
        }
        f.rays_ = std::move(rays);
        for (std::size_t i = 0; i < f.rays_.size(); ++i) {
            f.add_cone_closed({i});
        }
        for (auto g : generators) {
            std::sort(g.begin(), g.end());
            g.erase(std::unique(g.begin(), g.end()), g.end());
            for (auto r : g) {
                if (r >= f.rays_.size()) {
                    throw Error("fan: cone uses unknown ray " + std::to_string(r));
                }
            }
            if (rank(f.ray_matrix(g)) != g.size()) {
                throw Error("fan: cone " + f.cone_label(g) + " is not simplicial");
            }
            f.add_cone_closed(g);
        }
        f.sort_cones();
        return f;
    }

    int dim() const { return dim_; }
    const std::vector<std::vector<Q>>& rays() const { return rays_; }
    std::size_t cone_count() const { return cones_.size(); }
    const RaySet& cone(std::size_t i) const { return cones_.at(i); }
    const std::vector<RaySet>& cones() const { return cones_; }
    int cone_dim(std::size_t i) const { return static_cast<int>(cones_.at(i).size()); }

    std::optional<std::size_t> find(RaySet s) const
    {
        std::sort(s.begin(), s.end());
        auto it = index_.find(s);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    std::size_t cone_index(const RaySet& s) const
    {
        auto i = find(s);
        if (!i) {
            throw Error("fan: no cone " + cone_label(s));
        }
        return *i;
    }

    /// Columns are the rays of s, in the given order.
    QMatrix ray_matrix(const RaySet& s) const
    {
        QMatrix m(static_cast<std::size_t>(dim_), s.size());
        for (std::size_t j = 0; j < s.size(); ++j) {
            for (std::size_t i = 0; i < static_cast<std::size_t>(dim_); ++i) {
                m(i, j) = rays_[s[j]][i];
            }
        }
        return m;
    }

    std::string cone_label(const RaySet& s) const
    {
        std::string out = "[";
        for (std::size_t i = 0; i < s.size(); ++i) {
            out += (i ? "," : "") + std::to_string(s[i]);
        }
        return out + "]";
    }

    std::string cone_label(std::size_t i) const { return cone_label(cone(i)); }

    /// σ is a face of τ.
    bool face_of(std::size_t s, std::size_t t) const
    {
        const auto& a = cones_[s];
        const auto& b = cones_[t];
        return std::includes(b.begin(), b.end(), a.begin(), a.end());
    }

    std::vector<std::size_t> cones_of_dim(int d) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < cones_.size(); ++i) {
            if (cone_dim(i) == d) {
                out.push_back(i);
            }
        }
        return out;
    }

    /// Whether the point lies in the relative interior of cone i (strictly positive coordinates).
    bool interior_contains(std::size_t i, const std::vector<Q>& p) const
    {
        const auto& s = cones_[i];
        auto x = solve(ray_matrix(s), p);
        if (!x) {
            return false;
        }
        return std::all_of(x->begin(), x->end(), [](const Q& q) { return q > 0; });
    }

private:
    void add_cone_closed(const RaySet& g)
    {
        // all subsets of g
        const std::size_t n = g.size();
        for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
            RaySet s;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (std::size_t(1) << i)) {
                    s.push_back(g[i]);
                }
            }
            if (!index_.count(s)) {
                index_[s] = cones_.size();
                cones_.push_back(s);
            }
        }
    }

    void sort_cones()
    {
        std::stable_sort(cones_.begin(), cones_.end(), [](const RaySet& a, const RaySet& b) {
            if (a.size() != b.size()) {
                return a.size() < b.size();
            }
            return a < b;
        });
        index_.clear();
        for (std::size_t i = 0; i < cones_.size(); ++i) {
            index_[cones_[i]] = i;
        }
    }

    int dim_ = 0;
    std::vector<std::vector<Q>> rays_;
    std::vector<RaySet> cones_;
    std::map<RaySet, std::size_t> index_;
};

/// Completeness via the two-coface criterion plus a single covered generic point.
/// Coordinate orthant fan: rays +e_a (index 2a) and −e_a (index 2a+1).
inline Fan orthant_fan(int n)
{
    std::vector<std::vector<Q>> rays;
    for (int a = 0; a < n; ++a) {
        for (int s : {1, -1}) {
            std::vector<Q> r(static_cast<std::size_t>(n));
            r[static_cast<std::size_t>(a)] = s;
            rays.push_back(r);
        }
    }
    std::vector<RaySet> gens;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        RaySet g;
        for (int a = 0; a < n; ++a) {
            g.push_back(static_cast<std::size_t>(2 * a) + ((mask >> a) & 1));
        }
        gens.push_back(g);
    }
    return Fan::from_cones(n, rays, gens);
}

inline Diagnostic check_complete(const Fan& f)
{
    const int m = f.dim();
    if (m == 0) {
        return {};
    }
    for (std::size_t i = 0; i < f.cone_count(); ++i) {
        if (f.cone_dim(i) > m) {
            return diagnostic_fail("cone " + f.cone_label(i) + " has too many rays");
        }
    }
    auto tops = f.cones_of_dim(m);
    if (tops.empty()) {
        return diagnostic_fail("fan has no full-dimensional cone");
    }
    for (auto w : f.cones_of_dim(m - 1)) {
        const RaySet& wall = f.cone(w);
        std::vector<int> sides;
        // normal of the wall: kernel of the transposed ray matrix
        QMatrix normal = kernel_basis(f.ray_matrix(wall).transpose());
        if (normal.cols() != 1) {
            return diagnostic_fail("wall " + f.cone_label(w) + " does not span a hyperplane");
        }
        for (auto t : tops) {
            if (!f.face_of(w, t)) {
                continue;
            }
            std::size_t extra = 0;
            for (auto r : f.cone(t)) {
                if (!std::binary_search(wall.begin(), wall.end(), r)) {
                    extra = r;
                }
            }
            Q side = 0;
            for (std::size_t k = 0; k < static_cast<std::size_t>(m); ++k) {
                side += normal(k, 0) * f.rays()[extra][k];
            }
            sides.push_back(sign(side));
        }
        if (sides.size() != 2 || sides[0] + sides[1] != 0) {
            return diagnostic_fail("wall " + f.cone_label(w) + " is a face of " + std::to_string(sides.size()) +
                                   " maximal cones (need two on opposite sides)");
        }
    }
    // a generic point must lie in exactly one top cone
    for (int attempt = 1; attempt < 50; ++attempt) {
        std::vector<Q> p(static_cast<std::size_t>(m));
        for (std::size_t k = 0; k < p.size(); ++k) {
            p[k] = Q(static_cast<long>((k + 1) * 7 + attempt * 3), static_cast<long>(attempt * 11 + k * 13 + 5));
            if ((k + static_cast<std::size_t>(attempt)) % 2 == 1) {
                p[k] = -p[k];
            }
        }
        std::size_t hits = 0;
        bool degenerate = false;
        for (auto t : tops) {
            auto x = solve(f.ray_matrix(f.cone(t)), p);
            if (!x) {
                continue;
            }
            bool nonneg = std::all_of(x->begin(), x->end(), [](const Q& q) { return q >= 0; });
            bool pos = std::all_of(x->begin(), x->end(), [](const Q& q) { return q > 0; });
            if (nonneg && !pos) {
                degenerate = true;
            }
            if (pos) {
                ++hits;
            }
        }
        if (degenerate) {
            continue;
        }
        if (hits != 1) {
            return diagnostic_fail("generic point covered by " + std::to_string(hits) + " maximal cones");
        }
        return {};
    }
    return diagnostic_fail("could not find a generic test point");
}

/// Compactification of a fan: the cone over the triangulated ray sphere.
struct CompactifiedFan {
    Complex complex;
    std::vector<CellId> interior;             ///< per cone: its open cell (origin vertex for cone 0)
    std::vector<std::optional<CellId>> at_infinity;  ///< per nonzero cone: boundary cell
    std::vector<std::size_t> cone_of_cell;    ///< per cell: the cone it belongs to
    std::vector<bool> is_infinity_cell;
};

inline CompactifiedFan fan_compactify_unchecked(const Fan& f)
{
    CompactifiedFan out;
    const std::size_t n = f.cone_count();
    out.interior.assign(n, 0);
    out.at_infinity.assign(n, std::nullopt);
    auto add = [&](std::string name, int dim, std::vector<Incidence> bd, std::size_t cone, bool inf) {
        CellId id = out.complex.add_cell(std::move(name), dim, std::move(bd));
        out.cone_of_cell.push_back(cone);
        out.is_infinity_cell.push_back(inf);
        return id;
    };
    // cones are sorted by dimension, so faces come first
    for (std::size_t c = 0; c < n; ++c) {
        const RaySet& s = f.cone(c);
        const int d = static_cast<int>(s.size());
        if (d == 0) {
            out.interior[c] = add("o", 0, {}, c, false);
            continue;
        }
        std::vector<Incidence> inf_bd;
        std::vector<Incidence> int_bd;
        for (std::size_t i = 0; i < s.size(); ++i) {
            RaySet face = s;
            face.erase(face.begin() + static_cast<std::ptrdiff_t>(i));
            std::size_t fc = f.cone_index(face);
            const int sg = ((i + 1) % 2 == 0) ? 1 : -1;  // (−1)^{i+1}, i zero-based
            int_bd.push_back({out.interior[fc], sg});
            if (!face.empty()) {
                inf_bd.push_back({*out.at_infinity[fc], -sg});
            }
        }
        CellId inf = add("inf" + f.cone_label(s), d - 1, std::move(inf_bd), c, true);
        out.at_infinity[c] = inf;
        int_bd.insert(int_bd.begin(), Incidence{inf, 1});
        out.interior[c] = add("cone" + f.cone_label(s), d, std::move(int_bd), c, false);
    }
    return out;
}

inline CompactifiedFan fan_compactify(const Fan& f)
{
    auto d = check_complete(f);
    if (!d) {
        throw Error("fan_compactify: incomplete fan: " + d.message);
    }
    return fan_compactify_unchecked(f);
}

/// Induced action of a linear map on the cones of a fan.
struct FanMapCheck {
    bool ok = false;
    std::string message;
    std::vector<std::size_t> ray_perm;
    std::vector<std::size_t> cone_perm;
    /// per cone: orientation sign of [0, rays of σ] -> [0, rays of ψσ] in index order
    std::vector<int> orientation;

    bool invariant(std::size_t c) const { return cone_perm[c] == c; }
};

inline int permutation_sign(std::vector<std::size_t> v)
{
    int s = 1;
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            if (v[i] > v[j]) {
                s = -s;
            }
        }
    }
    return s;
}

inline FanMapCheck map_image_check(const QMatrix& psi, const Fan& f)
{
    FanMapCheck out;
    const std::size_t m = static_cast<std::size_t>(f.dim());
    if (psi.rows() != m || psi.cols() != m) {
        out.message = "map has shape " + psi.shape() + " on a fan of dimension " + std::to_string(m);
        return out;
    }
    if (m > 0 && is_zero(determinant(psi))) {
        out.message = "map is not invertible";
        return out;
    }
    const auto& rays = f.rays();
    for (std::size_t i = 0; i < rays.size(); ++i) {
        auto img = psi.apply(rays[i]);
        std::optional<std::size_t> hit;
        for (std::size_t j = 0; j < rays.size() && !hit; ++j) {
            // positive multiple test
            Q ratio = 0;
            bool ok = true;
            for (std::size_t k = 0; k < m && ok; ++k) {
                const Q& a = img[k];
                const Q& b = rays[j][k];
                if (is_zero(b)) {
                    ok = is_zero(a);
                } else if (is_zero(ratio)) {
                    ratio = a / b;
                    ok = ratio > 0;
                } else {
                    ok = a == ratio * b;
                }
            }
            if (ok && ratio > 0) {
                hit = j;
            }
        }
        if (!hit) {
            out.message = "image of ray " + std::to_string(i) + " is not a ray of the fan";
            return out;
        }
        out.ray_perm.push_back(*hit);
    }
    {
        auto sorted = out.ray_perm;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            out.message = "map identifies two rays";
            return out;
        }
    }
    for (std::size_t c = 0; c < f.cone_count(); ++c) {
        RaySet img;
        for (auto r : f.cone(c)) {
            img.push_back(out.ray_perm[r]);
        }
        auto target = f.find(img);
        if (!target) {
            out.message = "image of cone " + f.cone_label(c) + " is not a cone of the fan";
            out.cone_perm.clear();
            out.orientation.clear();
            return out;
        }
        out.cone_perm.push_back(*target);
        out.orientation.push_back(permutation_sign(img));
    }
    // cross-check the orientation of invariant cones against the span determinant
    for (std::size_t c = 0; c < f.cone_count(); ++c) {
        if (out.cone_perm[c] != c || f.cone(c).empty()) {
            continue;
        }
        QMatrix b = f.ray_matrix(f.cone(c));
        int s = sign(determinant(restrict_to(psi, b)));
        if (s != out.orientation[c]) {
            throw Error("map_image_check: orientation sign mismatch on cone " + f.cone_label(c));
        }
    }
    out.ok = true;
    return out;
}

}  // namespace lefkit

#endif
