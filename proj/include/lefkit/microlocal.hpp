#ifndef LEFKIT_MICROLOCAL_HPP
#define LEFKIT_MICROLOCAL_HPP

#include "lefkit/euler.hpp"
#include "lefkit/sheaf.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lefkit {

/// Values of a test function on the vertices of a complex (other cells ignored).
struct TestFunction {
    const Complex* base = nullptr;
    std::vector<Q> value;  ///< per cell; meaningful on vertices
    std::vector<Q> covector;  ///< empty unless built from a linear functional

    const Q& operator()(CellId v) const { return value.at(v); }
};

inline std::vector<CellId> vertices_of(const Complex& x, CellId c)
{
    std::vector<CellId> out;
    for (CellId s : x.closure(c)) {
        if (x.dim(s) == 0) {
            out.push_back(s);
        }
    }
    return out;
}

/// ξ·coords on vertices; throws if a vertex has no coordinates.
inline TestFunction linear_test_function(const Complex& x, const std::vector<Q>& xi)
{
    TestFunction f{&x, std::vector<Q>(x.size()), xi};
    for (CellId v : x.cells_of_dim(0)) {
        auto p = x.coordinate(v);
        if (!p) {
            throw Error("test function: vertex '" + x.name(v) + "' has no coordinates");
        }
        if (p->size() != xi.size()) {
            throw Error("test function: covector length does not match the realization");
        }
        Q s = 0;
        for (std::size_t i = 0; i < xi.size(); ++i) {
            s += xi[i] * (*p)[i];
        }
        f.value[v] = s;
    }
    return f;
}

/// Genericity: the vertices of every cell take pairwise distinct values, and the covector is
/// not parallel to any declared degenerate covector.
inline Diagnostic certify_generic(const TestFunction& f, const std::vector<std::vector<Q>>& degenerate = {})
{
    const Complex& x = *f.base;
    for (CellId c = 0; c < x.size(); ++c) {
        auto vs = vertices_of(x, c);
        for (std::size_t i = 0; i < vs.size(); ++i) {
            for (std::size_t j = i + 1; j < vs.size(); ++j) {
                if (f(vs[i]) == f(vs[j])) {
                    return diagnostic_fail("test function takes equal values on vertices '" + x.name(vs[i]) + "' and '" +
                                               x.name(vs[j]) + "' of cell '" + x.name(c) + "'",
                                           c);
                }
            }
        }
    }
    for (const auto& d : degenerate) {
        if (d.size() != f.covector.size()) {
            continue;
        }
        QMatrix m = QMatrix::from_columns({d, f.covector});
        if (rank(m) < 2) {
            return diagnostic_fail("test function is parallel to a degenerate covector");
        }
    }
    return {};
}

/// Cells of star(x) other than x having a vertex strictly below x: an open set.
inline std::vector<CellId> lower_star(const Complex& x, CellId v, const TestFunction& f)
{
    std::vector<CellId> out;
    for (CellId c : star_of(x, {v})) {
        if (c == v) {
            continue;
        }
        for (CellId w : vertices_of(x, c)) {
            if (f(w) < f(v)) {
                out.push_back(c);
                break;
            }
        }
    }
    return out;
}

inline Q morse_local_index(const ConstructibleFunction& theta, CellId v, const TestFunction& f)
{
    const Complex& x = *theta.base;
    if (x.dim(v) != 0) {
        throw Error("morse_local_index: '" + x.name(v) + "' is not a vertex");
    }
    auto st = star_of(x, {v});
    for (CellId c : st) {
        auto vs = vertices_of(x, c);
        for (std::size_t i = 0; i < vs.size(); ++i) {
            for (std::size_t j = i + 1; j < vs.size(); ++j) {
                if (f(vs[i]) == f(vs[j])) {
                    throw Error("morse_local_index: test function is not generic at '" + x.name(v) + "'");
                }
            }
        }
    }
    return euler_integral_open(theta, st) - euler_integral_open(theta, lower_star(x, v, f));
}

/// Sheaf-level index: alternating trace on RΓ_Z(star; F) with Z = star minus the lower star.
inline Q morse_local_index_sheaf(const SheafHom& h, CellId v, const TestFunction& f)
{
    const Complex& x = h.sheaf->base();
    auto st = star_of(x, {v});
    auto low = lower_star(x, v, f);
    auto z = set_difference(st, low);
    auto lc = local_cohomology(*h.sheaf, z, st, &h);
    return endo_trace(lc.complex, lc.endo).cohomology_alternating;
}

/// Σ over all vertices of the local index.
inline Q index_pairing(const ConstructibleFunction& theta, const TestFunction& f)
{
    const Complex& x = *theta.base;
    Q total = 0;
    for (CellId v : x.cells_of_dim(0)) {
        total += morse_local_index(theta, v, f);
    }
    return total;
}

/// Pairing over a closed region: θ is cut off outside it.
inline Q index_pairing(const ConstructibleFunction& theta, const TestFunction& f, const CellSet& region)
{
    const Complex& x = *theta.base;
    if (!is_closed(x, region.cells)) {
        throw Error("index_pairing: region is not closed, so the sublevel sets are not compact");
    }
    auto cut = ConstructibleFunction::zero(x);
    for (auto c : region.cells) {
        cut.value[c] = theta(c);
    }
    return index_pairing(cut, f);
}

/// Barycentric subdivision: cells are chains σ_0 < ... < σ_k of the original complex.
struct Subdivision {
    Complex complex;
    std::vector<std::vector<CellId>> chain;     ///< per new cell
    std::vector<CellId> barycenter;             ///< per original cell: its vertex
};

inline Subdivision barycentric(const Complex& x)
{
    Subdivision out;
    std::vector<std::vector<std::vector<CellId>>> by_len;
    std::function<void(std::vector<CellId>&)> walk = [&](std::vector<CellId>& ch) {
        if (by_len.size() < ch.size()) {
            by_len.resize(ch.size());
        }
        by_len[ch.size() - 1].push_back(ch);
        for (CellId t = ch.back() + 1; t < x.size(); ++t) {
            if (x.dim(t) > x.dim(ch.back()) && x.leq(ch.back(), t)) {
                ch.push_back(t);
                walk(ch);
                ch.pop_back();
            }
        }
    };
    for (CellId c = 0; c < x.size(); ++c) {
        std::vector<CellId> ch{c};
        walk(ch);
    }
    std::map<std::vector<CellId>, CellId> index;
    out.barycenter.assign(x.size(), 0);
    for (std::size_t len = 1; len <= by_len.size(); ++len) {
        auto& chains = by_len[len - 1];
        std::sort(chains.begin(), chains.end());
        for (const auto& ch : chains) {
            std::vector<Incidence> bd;
            if (ch.size() > 1) {
                for (std::size_t i = 0; i < ch.size(); ++i) {
                    auto face = ch;
                    face.erase(face.begin() + static_cast<std::ptrdiff_t>(i));
                    bd.push_back({index.at(face), i % 2 == 0 ? 1 : -1});
                }
            }
            std::string name = "b(";
            for (std::size_t i = 0; i < ch.size(); ++i) {
                name += (i ? "<" : "") + x.name(ch[i]);
            }
            name += ")";
            CellId id = out.complex.add_cell(name, static_cast<int>(ch.size()) - 1, std::move(bd));
            index[ch] = id;
            out.chain.push_back(ch);
            if (ch.size() == 1) {
                out.barycenter[ch[0]] = id;
            }
        }
    }
    out.complex.finalize();
    return out;
}

/// Strata multiplicities: the coefficient of each cell's conormal cycle.
struct LagrangianCycle {
    const Complex* base = nullptr;
    std::vector<Q> multiplicity;

    Q total() const
    {
        Q s = 0;
        for (const auto& m : multiplicity) {
            s += m;
        }
        return s;
    }
};

/// Multiplicity at S = local index of the refined θ at the barycenter of S for the test
/// function −dim (which is generic on every chain simplex).
inline LagrangianCycle cc_of_function(const ConstructibleFunction& theta)
{
    const Complex& x = *theta.base;
    Subdivision sd = barycentric(x);
    auto refined = ConstructibleFunction::zero(sd.complex);
    for (CellId c = 0; c < sd.complex.size(); ++c) {
        refined.value[c] = theta(sd.chain[c].back());
    }
    TestFunction f{&sd.complex, std::vector<Q>(sd.complex.size()), {}};
    for (CellId c = 0; c < sd.complex.size(); ++c) {
        if (sd.chain[c].size() == 1) {
            f.value[c] = Q(-x.dim(sd.chain[c][0]));
        }
    }
    LagrangianCycle cyc{&x, std::vector<Q>(x.size())};
    for (CellId s = 0; s < x.size(); ++s) {
        cyc.multiplicity[s] = morse_local_index(refined, sd.barycenter[s], f);
    }
    return cyc;
}

/// Closed form of the same multiplicities: Σ_{γ ≥ S} (−1)^{dim γ − dim S} θ(γ).
inline LagrangianCycle cc_closed_form(const ConstructibleFunction& theta)
{
    const Complex& x = *theta.base;
    LagrangianCycle cyc{&x, std::vector<Q>(x.size())};
    for (CellId s = 0; s < x.size(); ++s) {
        Q m = 0;
        for (CellId g : star_of(x, {s})) {
            m += (x.dim(g) - x.dim(s)) % 2 == 0 ? theta(g) : Q(-theta(g));
        }
        cyc.multiplicity[s] = m;
    }
    return cyc;
}

}  // namespace lefkit

#endif
