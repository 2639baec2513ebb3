#ifndef LEFKIT_COMPLEX_HPP
#define LEFKIT_COMPLEX_HPP

#include "lefkit/matrix.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lefkit {

using CellId = std::size_t;

struct Incidence {
    CellId face;
    int sign;
};

struct Cell {
    std::string name;
    int dim = 0;
    std::vector<Incidence> boundary;
};

/// Finite regular cell complex given by its signed face poset.
class Complex {
public:
    Complex() = default;

    CellId add_cell(std::string name, int dim, std::vector<Incidence> boundary = {})
    {
        if (index_.count(name)) {
            throw Error("duplicate cell id '" + name + "'");
        }
        for (const auto& inc : boundary) {
            if (inc.face >= cells_.size()) {
                throw Error("cell '" + name + "' has an unknown face");
            }
        }
        CellId id = cells_.size();
        index_.emplace(name, id);
        cells_.push_back({std::move(name), dim, std::move(boundary)});
        finalized_ = false;
        return id;
    }

    CellId add_cell(std::string name, int dim, const std::vector<std::pair<std::string, int>>& boundary)
    {
        std::vector<Incidence> b;
        for (const auto& [f, s] : boundary) {
            b.push_back({id(f), s});
        }
        return add_cell(std::move(name), dim, std::move(b));
    }

    void set_coordinates(CellId v, std::vector<Q> x) { coords_[v] = std::move(x); }
    const std::map<CellId, std::vector<Q>>& coordinates() const { return coords_; }
    std::optional<std::vector<Q>> coordinate(CellId v) const
    {
        auto it = coords_.find(v);
        if (it == coords_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    std::size_t size() const { return cells_.size(); }
    const Cell& cell(CellId c) const { return cells_.at(c); }
    const std::vector<Cell>& cells() const { return cells_; }
    int dim(CellId c) const { return cells_.at(c).dim; }
    const std::string& name(CellId c) const { return cells_.at(c).name; }

    CellId id(const std::string& name) const
    {
        auto it = index_.find(name);
        if (it == index_.end()) {
            throw Error("unknown cell id '" + name + "'");
        }
        return it->second;
    }
    bool has(const std::string& name) const { return index_.count(name) > 0; }

    int max_dim() const
    {
        int d = -1;
        for (const auto& c : cells_) {
            d = std::max(d, c.dim);
        }
        return d;
    }

    /// Builds coface lists and face closures; called lazily.
    void finalize() const
    {
        if (finalized_) {
            return;
        }
        const std::size_t n = cells_.size();
        cofaces_.assign(n, {});
        closure_.assign(n, {});
        for (CellId c = 0; c < n; ++c) {
            for (const auto& inc : cells_[c].boundary) {
                cofaces_[inc.face].push_back({c, inc.sign});
            }
        }
        // cells are added after their faces, so index order is a linear extension
        for (CellId c = 0; c < n; ++c) {
            std::vector<CellId> cl{c};
            for (const auto& inc : cells_[c].boundary) {
                cl.insert(cl.end(), closure_[inc.face].begin(), closure_[inc.face].end());
            }
            std::sort(cl.begin(), cl.end());
            cl.erase(std::unique(cl.begin(), cl.end()), cl.end());
            closure_[c] = std::move(cl);
        }
        by_dim_.clear();
        for (CellId c = 0; c < n; ++c) {
            int d = cells_[c].dim;
            if (d < 0) {
                continue;
            }
            if (by_dim_.size() <= static_cast<std::size_t>(d)) {
                by_dim_.resize(static_cast<std::size_t>(d) + 1);
            }
            by_dim_[static_cast<std::size_t>(d)].push_back(c);
        }
        finalized_ = true;
    }

    const std::vector<Incidence>& cofaces(CellId c) const
    {
        finalize();
        return cofaces_.at(c);
    }

    /// All faces of c including c itself, sorted.
    const std::vector<CellId>& closure(CellId c) const
    {
        finalize();
        return closure_.at(c);
    }

    /// a is a face of b (or equal).
    bool leq(CellId a, CellId b) const
    {
        const auto& cl = closure(b);
        return std::binary_search(cl.begin(), cl.end(), a);
    }

    const std::vector<CellId>& cells_of_dim(int d) const
    {
        finalize();
        static const std::vector<CellId> none;
        if (d < 0 || static_cast<std::size_t>(d) >= by_dim_.size()) {
            return none;
        }
        return by_dim_[static_cast<std::size_t>(d)];
    }

    /// Incidence number [face : c], zero if not a covering pair.
    int incidence(CellId face, CellId c) const
    {
        for (const auto& inc : cells_.at(c).boundary) {
            if (inc.face == face) {
                return inc.sign;
            }
        }
        return 0;
    }

    long euler_characteristic() const
    {
        long chi = 0;
        for (const auto& c : cells_) {
            chi += c.dim % 2 == 0 ? 1 : -1;
        }
        return chi;
    }

private:
    std::vector<Cell> cells_;
    std::unordered_map<std::string, CellId> index_;
    std::map<CellId, std::vector<Q>> coords_;
    mutable bool finalized_ = false;
    mutable std::vector<std::vector<Incidence>> cofaces_;
    mutable std::vector<std::vector<CellId>> closure_;
    mutable std::vector<std::vector<CellId>> by_dim_;
};

struct Diagnostic {
    bool ok = true;
    std::string message;
    std::optional<CellId> upper;  ///< τ
    std::optional<CellId> lower;  ///< σ

    explicit operator bool() const { return ok; }
};

inline Diagnostic diagnostic_fail(std::string msg, std::optional<CellId> upper = {}, std::optional<CellId> lower = {})
{
    return {false, std::move(msg), upper, lower};
}

/// Checks the graded-poset structure, regularity of edges, and d∘d = 0 on every codimension-2 pair.
inline Diagnostic validate_complex(const Complex& x)
{
    for (CellId t = 0; t < x.size(); ++t) {
        const Cell& c = x.cell(t);
        if (c.dim < 0) {
            return diagnostic_fail("cell '" + c.name + "' has negative dimension", t);
        }
        if (c.dim == 0 && !c.boundary.empty()) {
            return diagnostic_fail("vertex '" + c.name + "' has faces", t);
        }
        std::vector<CellId> seen;
        for (const auto& inc : c.boundary) {
            if (x.dim(inc.face) != c.dim - 1) {
                return diagnostic_fail("face '" + x.name(inc.face) + "' of '" + c.name + "' is not of codimension 1", t,
                                       inc.face);
            }
            if (inc.sign != 1 && inc.sign != -1) {
                return diagnostic_fail("incidence ('" + c.name + "', '" + x.name(inc.face) + "') has sign other than ±1",
                                       t, inc.face);
            }
            if (std::find(seen.begin(), seen.end(), inc.face) != seen.end()) {
                return diagnostic_fail("face '" + x.name(inc.face) + "' repeated in '" + c.name + "'", t, inc.face);
            }
            seen.push_back(inc.face);
        }
        if (c.dim >= 1 && c.boundary.empty()) {
            return diagnostic_fail("cell '" + c.name + "' of positive dimension has empty boundary", t);
        }
        if (c.dim == 1) {
            if (c.boundary.size() != 2 || c.boundary[0].sign + c.boundary[1].sign != 0) {
                return diagnostic_fail("edge '" + c.name + "' must have two endpoints of opposite sign", t);
            }
        }
        // codimension-2 diamonds: exactly two paths, cancelling
        std::map<CellId, std::vector<int>> paths;
        for (const auto& a : c.boundary) {
            for (const auto& b : x.cell(a.face).boundary) {
                paths[b.face].push_back(a.sign * b.sign);
            }
        }
        for (const auto& [s, signs] : paths) {
            if (signs.size() != 2) {
                return diagnostic_fail("pair ('" + c.name + "', '" + x.name(s) + "') has " + std::to_string(signs.size()) +
                                           " intermediate cells; a regular complex needs 2",
                                       t, s);
            }
            if (signs[0] + signs[1] != 0) {
                return diagnostic_fail("boundary of boundary fails on pair ('" + c.name + "', '" + x.name(s) + "')", t, s);
            }
        }
    }
    return {};
}

/// Boundary matrix ∂_k : C_k -> C_{k-1} in the cells_of_dim bases.
inline QMatrix boundary_matrix(const Complex& x, int k)
{
    const auto& hi = x.cells_of_dim(k);
    const auto& lo = x.cells_of_dim(k - 1);
    QMatrix m(lo.size(), hi.size());
    std::unordered_map<CellId, std::size_t> pos;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        pos[lo[i]] = i;
    }
    for (std::size_t j = 0; j < hi.size(); ++j) {
        for (const auto& inc : x.cell(hi[j]).boundary) {
            m(pos.at(inc.face), j) = inc.sign;
        }
    }
    return m;
}

enum class SetKind { Closed, Open, LocallyClosed };

inline const char* to_string(SetKind k)
{
    switch (k) {
    case SetKind::Closed: return "closed";
    case SetKind::Open: return "open";
    case SetKind::LocallyClosed: return "locally-closed";
    }
    return "?";
}

/// A set of cells, sorted, with its declared kind.
struct CellSet {
    std::vector<CellId> cells;
    SetKind kind = SetKind::LocallyClosed;

    bool contains(CellId c) const { return std::binary_search(cells.begin(), cells.end(), c); }
    std::size_t size() const { return cells.size(); }
    bool empty() const { return cells.empty(); }

    static CellSet of(std::vector<CellId> c, SetKind k = SetKind::LocallyClosed)
    {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        return {std::move(c), k};
    }
};

inline CellSet all_cells(const Complex& x)
{
    std::vector<CellId> c(x.size());
    for (CellId i = 0; i < x.size(); ++i) {
        c[i] = i;
    }
    return {std::move(c), SetKind::Closed};
}

inline bool is_closed(const Complex& x, const std::vector<CellId>& s)
{
    std::vector<bool> in(x.size(), false);
    for (auto c : s) {
        in[c] = true;
    }
    for (auto c : s) {
        for (const auto& inc : x.cell(c).boundary) {
            if (!in[inc.face]) {
                return false;
            }
        }
    }
    return true;
}

inline bool is_open(const Complex& x, const std::vector<CellId>& s)
{
    std::vector<bool> in(x.size(), false);
    for (auto c : s) {
        in[c] = true;
    }
    for (auto c : s) {
        for (const auto& inc : x.cofaces(c)) {
            if (!in[inc.face]) {
                return false;
            }
        }
    }
    return true;
}

inline std::vector<CellId> closure_of(const Complex& x, const std::vector<CellId>& s)
{
    std::vector<bool> in(x.size(), false);
    for (auto c : s) {
        for (auto f : x.closure(c)) {
            in[f] = true;
        }
    }
    std::vector<CellId> out;
    for (CellId c = 0; c < x.size(); ++c) {
        if (in[c]) {
            out.push_back(c);
        }
    }
    return out;
}

/// All cells having some cell of s as a face.
inline std::vector<CellId> star_of(const Complex& x, const std::vector<CellId>& s)
{
    std::vector<bool> in(x.size(), false);
    for (auto c : s) {
        in[c] = true;
    }
    for (CellId c = 0; c < x.size(); ++c) {
        for (const auto& inc : x.cell(c).boundary) {
            if (in[inc.face]) {
                in[c] = true;
            }
        }
    }
    std::vector<CellId> out;
    for (CellId c = 0; c < x.size(); ++c) {
        if (in[c]) {
            out.push_back(c);
        }
    }
    return out;
}

inline std::vector<CellId> set_difference(const std::vector<CellId>& a, const std::vector<CellId>& b)
{
    std::vector<CellId> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<CellId> set_intersection(const std::vector<CellId>& a, const std::vector<CellId>& b)
{
    std::vector<CellId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<CellId> set_union(const std::vector<CellId>& a, const std::vector<CellId>& b)
{
    std::vector<CellId> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Order-convex: the closure minus the set is closed.
inline bool is_locally_closed(const Complex& x, const std::vector<CellId>& s)
{
    return is_closed(x, set_difference(closure_of(x, s), s));
}

/// Checks a set against its declared kind; throws with the kind on failure.
inline void require_kind(const Complex& x, const CellSet& s)
{
    bool ok = false;
    switch (s.kind) {
    case SetKind::Closed: ok = is_closed(x, s.cells); break;
    case SetKind::Open: ok = is_open(x, s.cells); break;
    case SetKind::LocallyClosed: ok = is_locally_closed(x, s.cells); break;
    }
    if (!ok) {
        throw Error(std::string("cell set is not ") + to_string(s.kind));
    }
}

inline CellSet make_set(const Complex& x, std::vector<CellId> cells, SetKind kind)
{
    CellSet s = CellSet::of(std::move(cells), kind);
    require_kind(x, s);
    return s;
}

inline CellSet star(const Complex& x, CellId c) { return {star_of(x, {c}), SetKind::Open}; }
inline CellSet closure(const Complex& x, CellId c) { return {x.closure(c), SetKind::Closed}; }

/// closure(star(c)) minus star(c).
inline CellSet link(const Complex& x, CellId c)
{
    auto st = star_of(x, {c});
    return {set_difference(closure_of(x, st), st), SetKind::Closed};
}

/// Cells of the product complex are pairs (a, b), named "a*b";
/// ∂(a×b) = ∂a×b + (−1)^{dim a} a×∂b.
struct ProductComplex {
    Complex complex;
    std::vector<std::pair<CellId, CellId>> factors;  ///< per product cell
    std::map<std::pair<CellId, CellId>, CellId> index;
};

inline ProductComplex product(const Complex& a, const Complex& b)
{
    ProductComplex p;
    // add in order of total dimension so faces always precede cells
    int top = a.max_dim() + b.max_dim();
    for (int d = 0; d <= top; ++d) {
        for (CellId i = 0; i < a.size(); ++i) {
            for (CellId j = 0; j < b.size(); ++j) {
                if (a.dim(i) + b.dim(j) != d) {
                    continue;
                }
                std::vector<Incidence> bd;
                for (const auto& inc : a.cell(i).boundary) {
                    bd.push_back({p.index.at({inc.face, j}), inc.sign});
                }
                const int s = a.dim(i) % 2 == 0 ? 1 : -1;
                for (const auto& inc : b.cell(j).boundary) {
                    bd.push_back({p.index.at({i, inc.face}), s * inc.sign});
                }
                CellId id = p.complex.add_cell(a.name(i) + "*" + b.name(j), d, std::move(bd));
                p.index[{i, j}] = id;
                p.factors.push_back({i, j});
            }
        }
    }
    return p;
}

/// Cellular self-map (or map between complexes) with orientation signs on dimension-preserving cells.
struct CellularMap {
    const Complex* domain = nullptr;
    const Complex* codomain = nullptr;
    std::vector<CellId> image;
    std::vector<int> sign;  ///< ±1 where dim is preserved, 0 otherwise
    std::vector<bool> moving;  ///< invariant cells the underlying map moves pointwise (empty: none)

    static CellularMap identity(const Complex& x)
    {
        CellularMap m{&x, &x, {}, {}};
        for (CellId c = 0; c < x.size(); ++c) {
            m.image.push_back(c);
            m.sign.push_back(1);
        }
        return m;
    }

    bool preserves_dim(CellId c) const { return codomain->dim(image[c]) == domain->dim(c); }
    bool is_moving(CellId c) const { return c < moving.size() && moving[c]; }
};

/// Chain map on cellular chains: c ↦ sign(c)·φ(c) when dimension is preserved, else 0.
inline QMatrix chain_map_matrix(const CellularMap& f, int k)
{
    const auto& src = f.domain->cells_of_dim(k);
    const auto& dst = f.codomain->cells_of_dim(k);
    std::unordered_map<CellId, std::size_t> pos;
    for (std::size_t i = 0; i < dst.size(); ++i) {
        pos[dst[i]] = i;
    }
    QMatrix m(dst.size(), src.size());
    for (std::size_t j = 0; j < src.size(); ++j) {
        CellId c = src[j];
        if (f.preserves_dim(c)) {
            m(pos.at(f.image[c]), j) = f.sign[c];
        }
    }
    return m;
}

inline Diagnostic validate_map(const CellularMap& f)
{
    const Complex& x = *f.domain;
    const Complex& y = *f.codomain;
    if (f.image.size() != x.size() || f.sign.size() != x.size()) {
        return diagnostic_fail("cellular map does not assign every cell");
    }
    for (CellId c = 0; c < x.size(); ++c) {
        if (f.image[c] >= y.size()) {
            return diagnostic_fail("cell '" + x.name(c) + "' maps outside the codomain", c);
        }
        if (y.dim(f.image[c]) > x.dim(c)) {
            return diagnostic_fail("cell '" + x.name(c) + "' maps to a higher-dimensional cell", c);
        }
        if (f.preserves_dim(c) && f.sign[c] != 1 && f.sign[c] != -1) {
            return diagnostic_fail("cell '" + x.name(c) + "' needs an orientation sign ±1", c);
        }
        for (const auto& inc : x.cell(c).boundary) {
            if (!y.leq(f.image[inc.face], f.image[c])) {
                return diagnostic_fail("image of face '" + x.name(inc.face) + "' is not a face of the image of '" +
                                           x.name(c) + "'",
                                       c, inc.face);
            }
        }
    }
    for (int k = 1; k <= x.max_dim(); ++k) {
        QMatrix lhs = boundary_matrix(y, k) * chain_map_matrix(f, k);
        QMatrix rhs = chain_map_matrix(f, k - 1) * boundary_matrix(x, k);
        if (!(lhs == rhs)) {
            return diagnostic_fail("cellular map signs do not commute with the boundary in degree " + std::to_string(k));
        }
    }
    return {};
}

/// Cells fixed pointwise: the cell and all its faces map to themselves with sign +1 and none is
/// marked moving.
inline std::vector<CellId> pointwise_fixed_cells(const CellularMap& f)
{
    const Complex& x = *f.domain;
    std::vector<CellId> out;
    for (CellId c = 0; c < x.size(); ++c) {
        bool ok = true;
        for (CellId s : x.closure(c)) {
            if (f.image[s] != s || f.sign[s] != 1 || f.is_moving(s)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.push_back(c);
        }
    }
    return out;
}

/// Cells mapped to themselves, neither pointwise fixed nor declared moving: they hide a fixed
/// point the cell structure cannot see.
inline std::vector<CellId> invariant_unfixed_cells(const CellularMap& f)
{
    auto fixed = pointwise_fixed_cells(f);
    std::vector<CellId> out;
    for (CellId c = 0; c < f.domain->size(); ++c) {
        if (f.image[c] == c && !f.is_moving(c) && !std::binary_search(fixed.begin(), fixed.end(), c)) {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace lefkit

#endif
