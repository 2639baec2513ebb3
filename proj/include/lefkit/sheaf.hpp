#ifndef LEFKIT_SHEAF_HPP
#define LEFKIT_SHEAF_HPP

#include "lefkit/complex.hpp"
#include "lefkit/graded_complex.hpp"

#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lefkit {

/// Cellular sheaf: a stalk per cell and generization maps F(σ) -> F(τ) for faces σ < τ.
class CellSheaf {
public:
    CellSheaf() = default;
    explicit CellSheaf(const Complex& base) : base_(&base), stalk_(base.size(), 0) {}

    const Complex& base() const { return *base_; }
    std::size_t stalk(CellId c) const { return stalk_.at(c); }
    const std::vector<std::size_t>& stalks() const { return stalk_; }
    void set_stalk(CellId c, std::size_t dim)
    {
        stalk_.at(c) = dim;
        ready_ = false;
    }

    /// Generization along a covering pair σ < τ.
    void set_gen(CellId sigma, CellId tau, QMatrix m)
    {
        if (base_->incidence(sigma, tau) == 0) {
            throw Error("generization given for non-covering pair ('" + base_->name(sigma) + "', '" + base_->name(tau) +
                        "')");
        }
        gen_[{sigma, tau}] = std::move(m);
        ready_ = false;
    }

    /// The covering-pair matrix, zero if never set.
    QMatrix gen(CellId sigma, CellId tau) const
    {
        auto it = gen_.find({sigma, tau});
        if (it != gen_.end()) {
            return it->second;
        }
        return QMatrix(stalk(tau), stalk(sigma));
    }

    bool has_gen(CellId sigma, CellId tau) const { return gen_.count({sigma, tau}) > 0; }
    const std::map<std::pair<CellId, CellId>, QMatrix>& generizations() const { return gen_; }

    /// Precomputes composite maps along face chains. Must be called before `map` and before
    /// sharing the sheaf across threads.
    void finalize()
    {
        const Complex& x = *base_;
        composite_.assign(x.size(), {});
        for (CellId t = 0; t < x.size(); ++t) {
            auto& row = composite_[t];
            row.emplace(t, QMatrix::identity(stalk(t)));
            for (const auto& inc : x.cell(t).boundary) {
                QMatrix g = gen(inc.face, t);
                for (const auto& [s, m] : composite_[inc.face]) {
                    if (!row.count(s)) {
                        row.emplace(s, g * m);
                    }
                }
            }
        }
        ready_ = true;
    }

    bool ready() const { return ready_; }

    /// Composite generization F(σ) -> F(τ) for σ ≤ τ.
    const QMatrix& map(CellId sigma, CellId tau) const
    {
        if (!ready_) {
            throw Error("sheaf used before finalize()");
        }
        auto it = composite_.at(tau).find(sigma);
        if (it == composite_.at(tau).end()) {
            throw Error("no face relation ('" + base_->name(sigma) + "' <= '" + base_->name(tau) + "')");
        }
        return it->second;
    }

    std::size_t total_rank() const
    {
        std::size_t n = 0;
        for (auto s : stalk_) {
            n += s;
        }
        return n;
    }

private:
    const Complex* base_ = nullptr;
    std::vector<std::size_t> stalk_;
    std::map<std::pair<CellId, CellId>, QMatrix> gen_;
    std::vector<std::map<CellId, QMatrix>> composite_;
    bool ready_ = false;
};

/// Rank-r constant sheaf extended by zero from `support` (all cells when empty optional).
inline CellSheaf constant_sheaf(const Complex& x, std::size_t r, const std::vector<CellId>* support = nullptr)
{
    CellSheaf f(x);
    std::vector<bool> in(x.size(), support == nullptr);
    if (support) {
        for (auto c : *support) {
            in[c] = true;
        }
    }
    for (CellId c = 0; c < x.size(); ++c) {
        if (in[c]) {
            f.set_stalk(c, r);
        }
    }
    for (CellId t = 0; t < x.size(); ++t) {
        for (const auto& inc : x.cell(t).boundary) {
            if (in[t] && in[inc.face]) {
                f.set_gen(inc.face, t, QMatrix::identity(r));
            }
        }
    }
    f.finalize();
    return f;
}

inline Diagnostic validate_sheaf(const CellSheaf& f)
{
    const Complex& x = f.base();
    for (const auto& [pair, m] : f.generizations()) {
        const auto [s, t] = pair;
        if (m.rows() != f.stalk(t) || m.cols() != f.stalk(s)) {
            return diagnostic_fail("generization ('" + x.name(s) + "', '" + x.name(t) + "') has shape " + m.shape(), t, s);
        }
    }
    for (CellId t = 0; t < x.size(); ++t) {
        std::map<CellId, std::vector<QMatrix>> paths;
        for (const auto& a : x.cell(t).boundary) {
            QMatrix ga = f.gen(a.face, t);
            for (const auto& b : x.cell(a.face).boundary) {
                paths[b.face].push_back(ga * f.gen(b.face, a.face));
            }
        }
        for (const auto& [s, ms] : paths) {
            for (std::size_t i = 1; i < ms.size(); ++i) {
                if (!(ms[i] == ms[0])) {
                    return diagnostic_fail("diamond ('" + x.name(s) + "', '" + x.name(t) + "') does not commute", t, s);
                }
            }
        }
    }
    return {};
}

/// Basis bookkeeping for complexes whose degree-k space is a sum of stalks over some index set.
struct BlockLayout {
    int lo = 0;
    std::vector<std::vector<CellId>> cells;                 ///< per degree, top cell of each block
    std::vector<std::vector<std::size_t>> offsets;          ///< per degree, block offsets
    std::vector<std::size_t> dims;

    std::size_t degree_count() const { return cells.size(); }
};

/// Cochains of F over the cells of a locally closed set: RΓ_c(S; F|S).
struct SectionsComplex {
    GradedComplex complex;
    BlockLayout layout;
    std::unordered_map<CellId, std::size_t> offset;  ///< offset of a cell's block in its degree
    std::vector<bool> in_support;
};

inline SectionsComplex sections_complex(const CellSheaf& f, const CellSet& support)
{
    const Complex& x = f.base();
    require_kind(x, support);
    if (!is_locally_closed(x, support.cells)) {
        throw Error("sections_complex: support is not locally closed");
    }
    SectionsComplex out;
    out.in_support.assign(x.size(), false);
    for (auto c : support.cells) {
        out.in_support[c] = true;
    }
    const int top = std::max(0, x.max_dim());
    out.layout.lo = 0;
    out.layout.cells.assign(static_cast<std::size_t>(top) + 1, {});
    out.layout.offsets.assign(static_cast<std::size_t>(top) + 1, {});
    out.layout.dims.assign(static_cast<std::size_t>(top) + 1, 0);
    for (int k = 0; k <= top; ++k) {
        auto& dk = out.layout.dims[static_cast<std::size_t>(k)];
        for (CellId c : x.cells_of_dim(k)) {
            if (!out.in_support[c]) {
                continue;
            }
            out.layout.cells[static_cast<std::size_t>(k)].push_back(c);
            out.layout.offsets[static_cast<std::size_t>(k)].push_back(dk);
            out.offset[c] = dk;
            dk += f.stalk(c);
        }
    }
    std::vector<QMatrix> diffs;
    for (int k = 0; k <= top; ++k) {
        const std::size_t rows = k < top ? out.layout.dims[static_cast<std::size_t>(k) + 1] : 0;
        QMatrix d(rows, out.layout.dims[static_cast<std::size_t>(k)]);
        if (k < top) {
            for (CellId t : out.layout.cells[static_cast<std::size_t>(k) + 1]) {
                for (const auto& inc : x.cell(t).boundary) {
                    if (!out.in_support[inc.face] || f.stalk(inc.face) == 0 || f.stalk(t) == 0) {
                        continue;
                    }
                    d.add_block(out.offset.at(t), out.offset.at(inc.face), f.gen(inc.face, t), Q(inc.sign));
                }
            }
        }
        diffs.push_back(std::move(d));
    }
    out.complex = GradedComplex::make(0, out.layout.dims, std::move(diffs));
    return out;
}

/// An endomorphism Φ : φ⁻¹F -> F over a cellular self-map φ.
struct SheafHom {
    const CellSheaf* sheaf = nullptr;
    CellularMap map;
    std::vector<QMatrix> phi;  ///< per cell c: F(φc) -> F(c)

    static SheafHom identity(const CellSheaf& f, const Q& scalar = Q(1))
    {
        SheafHom h{&f, CellularMap::identity(f.base()), {}};
        for (CellId c = 0; c < f.base().size(); ++c) {
            h.phi.push_back(QMatrix::identity(f.stalk(c), scalar));
        }
        return h;
    }
};

inline Diagnostic validate_hom(const SheafHom& h)
{
    const CellSheaf& f = *h.sheaf;
    const Complex& x = f.base();
    if (auto d = validate_map(h.map); !d) {
        return d;
    }
    if (h.phi.size() != x.size()) {
        return diagnostic_fail("endomorphism does not assign every cell");
    }
    for (CellId c = 0; c < x.size(); ++c) {
        const QMatrix& p = h.phi[c];
        if (p.rows() != f.stalk(c) || p.cols() != f.stalk(h.map.image[c])) {
            return diagnostic_fail("endomorphism at '" + x.name(c) + "' has shape " + p.shape(), c);
        }
    }
    for (CellId t = 0; t < x.size(); ++t) {
        for (const auto& inc : x.cell(t).boundary) {
            const CellId s = inc.face;
            QMatrix lhs = h.phi[t] * f.map(h.map.image[s], h.map.image[t]);
            QMatrix rhs = f.map(s, t) * h.phi[s];
            if (!(lhs == rhs)) {
                return diagnostic_fail("endomorphism is not natural on ('" + x.name(s) + "', '" + x.name(t) + "')", t, s);
            }
        }
    }
    return {};
}

/// Support compatibility for the pullback of F_S: with A = φ⁻¹S, A∩S must be closed in A and open in S.
inline Diagnostic check_support_compatible(const CellularMap& phi, const std::vector<bool>& in_s)
{
    const Complex& x = *phi.domain;
    auto in_a = [&](CellId c) { return in_s[phi.image[c]]; };
    for (CellId c = 0; c < x.size(); ++c) {
        if (!(in_a(c) && in_s[c])) {
            continue;
        }
        for (CellId s : x.closure(c)) {
            if (in_a(s) && !in_s[s]) {
                return diagnostic_fail("support not preserved: face '" + x.name(s) + "' of '" + x.name(c) + "'", c, s);
            }
        }
        for (const auto& inc : x.cofaces(c)) {
            if (in_s[inc.face] && !in_a(inc.face)) {
                return diagnostic_fail("support not preserved: coface '" + x.name(inc.face) + "' of '" + x.name(c) + "'",
                                       inc.face, c);
            }
        }
    }
    // cofaces() only lists covering cofaces; openness in S follows from covering steps
    return {};
}

/// Cochain endomorphism (Φs)(c) = sign(c)·Φ_c(s(φc)) on the sections complex.
inline ChainEndo induced_endo(const SheafHom& h, const SectionsComplex& sc)
{
    const CellSheaf& f = *h.sheaf;
    const Complex& x = f.base();
    if (auto d = check_support_compatible(h.map, sc.in_support); !d) {
        throw Error("induced_endo: " + d.message);
    }
    ChainEndo out;
    for (std::size_t k = 0; k < sc.layout.cells.size(); ++k) {
        QMatrix m(sc.layout.dims[k], sc.layout.dims[k]);
        for (CellId c : sc.layout.cells[k]) {
            const CellId img = h.map.image[c];
            if (!sc.in_support[img] || x.dim(img) != x.dim(c) || f.stalk(c) == 0) {
                continue;
            }
            m.add_block(sc.offset.at(c), sc.offset.at(img), h.phi[c], Q(h.map.sign[c]));
        }
        out.push_back(std::move(m));
    }
    check_chain_map(sc.complex, out);
    return out;
}

/// Order-complex model of ordinary cohomology RΓ(U; F) over an open (upward closed) set U:
/// degree n is the sum of F(σ_n) over chains σ_0 < ... < σ_n in U.
struct NerveComplex {
    GradedComplex complex;
    std::vector<std::vector<std::vector<CellId>>> chains;  ///< per degree
    std::vector<std::vector<std::size_t>> offsets;
    std::vector<std::map<std::vector<CellId>, std::size_t>> position;
};

inline NerveComplex open_sections_complex(const CellSheaf& f, const std::vector<CellId>& u)
{
    const Complex& x = f.base();
    if (!is_open(x, u)) {
        throw Error("open_sections_complex: set is not open");
    }
    std::vector<bool> in(x.size(), false);
    for (auto c : u) {
        in[c] = true;
    }
    // strictly larger cells of U, per cell
    std::vector<std::vector<CellId>> ups(x.size());
    for (CellId t : u) {
        for (CellId s : x.closure(t)) {
            if (s != t && in[s]) {
                ups[s].push_back(t);
            }
        }
    }
    NerveComplex out;
    std::vector<CellId> chain;
    std::function<void(CellId)> walk = [&](CellId c) {
        chain.push_back(c);
        const std::size_t n = chain.size() - 1;
        if (out.chains.size() <= n) {
            out.chains.resize(n + 1);
        }
        out.chains[n].push_back(chain);
        for (CellId t : ups[c]) {
            walk(t);
        }
        chain.pop_back();
    };
    std::vector<CellId> sorted_u = u;
    std::sort(sorted_u.begin(), sorted_u.end());
    for (CellId c : sorted_u) {
        walk(c);
    }
    const std::size_t deg = out.chains.size();
    out.offsets.assign(deg, {});
    out.position.assign(deg, {});
    std::vector<std::size_t> dims(deg, 0);
    for (std::size_t n = 0; n < deg; ++n) {
        std::sort(out.chains[n].begin(), out.chains[n].end());
        for (std::size_t i = 0; i < out.chains[n].size(); ++i) {
            out.position[n][out.chains[n][i]] = i;
            out.offsets[n].push_back(dims[n]);
            dims[n] += f.stalk(out.chains[n][i].back());
        }
    }
    std::vector<QMatrix> diffs;
    for (std::size_t n = 0; n < deg; ++n) {
        const std::size_t rows = n + 1 < deg ? dims[n + 1] : 0;
        QMatrix d(rows, dims[n]);
        if (n + 1 < deg) {
            for (std::size_t j = 0; j < out.chains[n + 1].size(); ++j) {
                const auto& c = out.chains[n + 1][j];
                const CellId top = c.back();
                if (f.stalk(top) == 0) {
                    continue;
                }
                for (std::size_t i = 0; i < c.size(); ++i) {
                    std::vector<CellId> face = c;
                    face.erase(face.begin() + static_cast<std::ptrdiff_t>(i));
                    std::size_t p = out.position[n].at(face);
                    const CellId ftop = face.back();
                    if (f.stalk(ftop) == 0) {
                        continue;
                    }
                    const Q s = i % 2 == 0 ? Q(1) : Q(-1);
                    if (i + 1 == c.size()) {
                        d.add_block(out.offsets[n + 1][j], out.offsets[n][p], f.map(ftop, top), s);
                    } else {
                        d.add_block(out.offsets[n + 1][j], out.offsets[n][p], QMatrix::identity(f.stalk(top)), s);
                    }
                }
            }
        }
        diffs.push_back(std::move(d));
    }
    out.complex = GradedComplex::make(0, dims, std::move(diffs));
    return out;
}

/// Restriction RΓ(U) -> RΓ(V) for open V ⊆ U: projection onto chains inside V.
inline ChainMap nerve_restriction(const CellSheaf& f, const NerveComplex& u, const NerveComplex& v)
{
    ChainMap m;
    m.source = &u.complex;
    m.target = &v.complex;
    m.lo = 0;
    for (std::size_t n = 0; n < u.chains.size(); ++n) {
        QMatrix r(v.complex.dim(static_cast<int>(n)), u.complex.dim(static_cast<int>(n)));
        if (n < v.chains.size()) {
            for (std::size_t j = 0; j < v.chains[n].size(); ++j) {
                std::size_t p = u.position[n].at(v.chains[n][j]);
                std::size_t dim = f.stalk(v.chains[n][j].back());
                for (std::size_t a = 0; a < dim; ++a) {
                    r(v.offsets[n][j] + a, u.offsets[n][p] + a) = 1;
                }
            }
        }
        m.components.push_back(std::move(r));
    }
    return m;
}

/// Endomorphism of the nerve complex: (e s)(σ_0 < ... < σ_n) = Φ_{σ_n}(s(φσ_0 < ... < φσ_n)),
/// zero when the image chain degenerates.
inline ChainEndo nerve_endo(const SheafHom& h, const NerveComplex& nc)
{
    const CellSheaf& f = *h.sheaf;
    ChainEndo out;
    for (std::size_t n = 0; n < nc.chains.size(); ++n) {
        QMatrix m(nc.complex.dim(static_cast<int>(n)), nc.complex.dim(static_cast<int>(n)));
        for (std::size_t j = 0; j < nc.chains[n].size(); ++j) {
            const auto& c = nc.chains[n][j];
            if (f.stalk(c.back()) == 0) {
                continue;
            }
            std::vector<CellId> img;
            for (CellId s : c) {
                img.push_back(h.map.image[s]);
            }
            bool strict = true;
            for (std::size_t i = 1; i < img.size(); ++i) {
                if (img[i] == img[i - 1]) {
                    strict = false;
                }
            }
            if (!strict) {
                continue;
            }
            auto it = nc.position[n].find(img);
            if (it == nc.position[n].end()) {
                throw Error("nerve_endo: map does not preserve the open set");
            }
            if (f.stalk(img.back()) == 0) {
                continue;
            }
            m.set_block(nc.offsets[n][j], nc.offsets[n][it->second], h.phi[c.back()]);
        }
        out.push_back(std::move(m));
    }
    check_chain_map(nc.complex, out);
    return out;
}

/// RΓ_Z(U; F) as the shifted cone of RΓ(U) -> RΓ(U∖Z), with optional endomorphism.
struct LocalCohomology {
    NerveComplex whole;
    NerveComplex punctured;
    GradedComplex complex;
    ChainEndo endo;  ///< empty unless requested
};

inline LocalCohomology local_cohomology(const CellSheaf& f, const std::vector<CellId>& z, const std::vector<CellId>& u,
                                        const SheafHom* h = nullptr)
{
    const Complex& x = f.base();
    auto us = CellSet::of(u).cells;
    auto zs = CellSet::of(z).cells;
    if (!std::includes(us.begin(), us.end(), zs.begin(), zs.end())) {
        throw Error("local_cohomology: Z is not contained in U");
    }
    auto rest = set_difference(us, zs);
    if (!is_open(x, us)) {
        throw Error("local_cohomology: U is not open");
    }
    if (!is_open(x, rest)) {
        throw Error("local_cohomology: Z is not closed in U");
    }
    LocalCohomology out;
    out.whole = open_sections_complex(f, us);
    out.punctured = open_sections_complex(f, rest);
    ChainMap r = nerve_restriction(f, out.whole, out.punctured);
    out.complex = shifted_cone(out.whole.complex, out.punctured.complex, r);
    if (h) {
        ChainEndo a = nerve_endo(*h, out.whole);
        ChainEndo b = nerve_endo(*h, out.punctured);
        out.endo = shifted_cone_endo(out.complex, out.whole.complex, out.punctured.complex, a, b);
        check_chain_map(out.complex, out.endo);
    }
    return out;
}

}  // namespace lefkit

#endif
