#ifndef LEFKIT_WORLD_HPP
#define LEFKIT_WORLD_HPP

#include "lefkit/engine.hpp"
#include "lefkit/microlocal.hpp"
#include "lefkit/scenario.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace lefkit {

inline Value matrix_value(const QMatrix& m)
{
    Value l = Value::list();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::vector<Q> row;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        l.items.push_back(rational_list(row));
    }
    return l;
}

/// Reads a matrix; when a shape is given it must match ([] stands for any empty matrix).
inline QMatrix as_matrix(const Value& v, std::optional<std::pair<std::size_t, std::size_t>> shape = std::nullopt)
{
    const auto& rows = as_list(v);
    if (rows.empty()) {
        if (shape && shape->first * shape->second != 0) {
            throw ScenarioError(v.pos, "expected a " + std::to_string(shape->first) + "x" +
                                           std::to_string(shape->second) + " matrix");
        }
        return shape ? QMatrix(shape->first, shape->second) : QMatrix(0, 0);
    }
    std::vector<std::vector<Q>> data;
    for (const auto& r : rows) {
        data.push_back(as_rationals(r));
        if (data.back().size() != data.front().size()) {
            throw ScenarioError(r.pos, "matrix rows have different lengths");
        }
    }
    QMatrix m(data.size(), data.front().size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data[i].size(); ++j) {
            m(i, j) = data[i][j];
        }
    }
    if (shape && (m.rows() != shape->first || m.cols() != shape->second)) {
        throw ScenarioError(v.pos, "matrix has shape " + m.shape() + ", expected " + std::to_string(shape->first) + "x" +
                                       std::to_string(shape->second));
    }
    return m;
}

struct ConicSheaf {
    ConeComplexPtr cones;
    std::vector<std::string> ray_names;
    std::unique_ptr<CellSheaf> sheaf;
};

struct NamedCellSets {
    std::map<std::string, CellSet> sets;
};

/// Objects built from a scenario document. Names resolve to earlier blocks only.
struct World {
    std::map<std::string, std::unique_ptr<Complex>> complexes;
    std::map<std::string, NamedCellSets> sets;
    std::map<std::string, std::unique_ptr<CellSheaf>> sheaves;
    std::map<std::string, std::unique_ptr<CellularMap>> maps;
    std::map<std::string, std::unique_ptr<SheafHom>> homs;
    std::map<std::string, ConeComplexPtr> fans;
    std::map<std::string, std::vector<std::string>> ray_names;
    std::map<std::string, ConicSheaf> conic_sheaves;
    std::map<std::string, std::unique_ptr<FiberModel>> fibers;
    std::map<std::string, std::unique_ptr<ComponentData>> models;
    std::map<std::string, std::unique_ptr<ConstructibleFunction>> functions;
    std::map<std::string, std::unique_ptr<TestFunction>> test_functions;
    std::map<const void*, std::string> owner;  ///< object -> name of the complex it lives on
    std::vector<const Block*> tasks;

    template <class M>
    static auto& lookup(M& m, const Value& v, const char* what)
    {
        const std::string& n = as_name(v);
        auto it = m.find(n);
        if (it == m.end()) {
            throw ScenarioError(v.pos, std::string("unknown ") + what + " '" + n + "'");
        }
        return it->second;
    }

    const Complex& complex(const Value& v) const { return *lookup(complexes, v, "complex"); }
    const CellSheaf& sheaf(const Value& v) const { return *lookup(sheaves, v, "sheaf"); }
    const SheafHom& hom(const Value& v) const { return *lookup(homs, v, "hom"); }
    const FiberModel& fiber(const Value& v) const { return *lookup(fibers, v, "fiber_endo"); }
    const ComponentData& model(const Value& v) const { return *lookup(models, v, "normal_model"); }
    const ConstructibleFunction& function(const Value& v) const { return *lookup(functions, v, "function"); }
    const TestFunction& test_function(const Value& v) const { return *lookup(test_functions, v, "test_function"); }

    const CellSet& set(const Complex& x, const Value& v) const
    {
        auto it = sets.find(owner.at(&x));
        const std::string& n = as_name(v);
        if (it == sets.end() || !it->second.sets.count(n)) {
            throw ScenarioError(v.pos, "unknown cell set '" + n + "' in complex '" + owner.at(&x) + "'");
        }
        return it->second.sets.at(n);
    }
};

inline CellId cell_ref(const Complex& x, const Value& v)
{
    expect_kind(v, Value::Kind::Name, "a cell name");
    if (!x.has(v.name)) {
        throw ScenarioError(v.pos, "unknown cell '" + v.name + "'");
    }
    return x.id(v.name);
}

inline const Value& required(const Block& b, const std::string& key)
{
    const Field* f = b.get(key);
    if (!f) {
        throw ScenarioError(b.pos, b.kind + " '" + b.name + "' needs field '" + key + "'");
    }
    return f->value;
}

inline void check_fields(const Block& b, const std::vector<std::string>& allowed)
{
    for (const auto& f : b.fields) {
        if (std::find(allowed.begin(), allowed.end(), f.key) == allowed.end()) {
            throw ScenarioError(f.pos, "unknown field '" + f.key + "' in " + b.kind, allowed);
        }
    }
}

namespace detail {

inline SetKind set_kind(const Value& v)
{
    const std::string& k = as_name(v);
    if (k == "closed") {
        return SetKind::Closed;
    }
    if (k == "open") {
        return SetKind::Open;
    }
    if (k == "locally_closed") {
        return SetKind::LocallyClosed;
    }
    throw ScenarioError(v.pos, "unknown set kind '" + k + "'", {"closed", "open", "locally_closed"});
}

inline void build_complex(World& w, const Block& b)
{
    check_fields(b, {"cell", "coord", "set"});
    auto x = std::make_unique<Complex>();
    for (const Field* f : b.all("cell")) {
        const auto& t = as_tuple(f->value, 2, 3);
        const std::string& name = as_name(t[0]);
        if (x->has(name)) {
            throw ScenarioError(t[0].pos, "cell '" + name + "' is defined twice");
        }
        long dim = as_integer(t[1]);
        if (dim < 0) {
            throw ScenarioError(t[1].pos, "negative dimension");
        }
        std::vector<Incidence> bd;
        if (t.size() == 3) {
            for (const auto& e : as_list(t[2])) {
                expect_kind(e, Value::Kind::Name, "a signed face");
                if (e.sign == 0) {
                    throw ScenarioError(e.pos, "face '" + e.name + "' needs a sign", {"+name", "-name"});
                }
                bd.push_back({cell_ref(*x, e), e.sign});
            }
        }
        try {
            x->add_cell(name, static_cast<int>(dim), std::move(bd));
        } catch (const ScenarioError&) {
            throw;
        } catch (const Error& e) {
            throw ScenarioError(f->pos, e.what());
        }
    }
    if (auto d = validate_complex(*x); !d) {
        throw ScenarioError(b.pos, "complex '" + b.name + "': " + d.message);
    }
    for (const Field* f : b.all("coord")) {
        const auto& t = as_tuple(f->value, 2, 2);
        CellId v = cell_ref(*x, t[0]);
        if (x->dim(v) != 0) {
            throw ScenarioError(t[0].pos, "coordinates belong on vertices");
        }
        x->set_coordinates(v, as_rationals(t[1]));
    }
    x->finalize();
    auto& sets = w.sets[b.name];
    for (const Field* f : b.all("set")) {
        const auto& t = as_tuple(f->value, 3, 3);
        std::vector<CellId> cells;
        for (const auto& c : as_list(t[2])) {
            cells.push_back(cell_ref(*x, c));
        }
        SetKind kind = set_kind(t[1]);
        try {
            sets.sets[as_name(t[0])] = make_set(*x, cells, kind);
        } catch (const ScenarioError&) {
            throw;
        } catch (const Error& e) {
            throw ScenarioError(f->pos, e.what());
        }
    }
    w.owner[x.get()] = b.name;
    w.complexes[b.name] = std::move(x);
}

inline void build_sheaf(World& w, const Block& b)
{
    check_fields(b, {"base", "stalk", "gen", "constant", "support"});
    const Complex& x = w.complex(required(b, "base"));
    auto f = std::make_unique<CellSheaf>(x);
    if (const Field* c = b.get("constant")) {
        if (!b.all("stalk").empty() || !b.all("gen").empty()) {
            throw ScenarioError(c->pos, "'constant' excludes 'stalk' and 'gen'");
        }
        long r = as_integer(c->value);
        if (r < 0) {
            throw ScenarioError(c->value.pos, "negative rank");
        }
        const Field* s = b.get("support");
        const std::vector<CellId>* support = s ? &w.set(x, s->value).cells : nullptr;
        *f = constant_sheaf(x, static_cast<std::size_t>(r), support);
    } else {
        if (const Field* s = b.get("support")) {
            throw ScenarioError(s->pos, "'support' needs 'constant'");
        }
        for (const Field* s : b.all("stalk")) {
            const auto& t = as_tuple(s->value, 2, 2);
            long r = as_integer(t[1]);
            if (r < 0) {
                throw ScenarioError(t[1].pos, "negative rank");
            }
            f->set_stalk(cell_ref(x, t[0]), static_cast<std::size_t>(r));
        }
        for (const Field* g : b.all("gen")) {
            const auto& t = as_tuple(g->value, 3, 3);
            CellId s = cell_ref(x, t[0]);
            CellId c = cell_ref(x, t[1]);
            QMatrix m = as_matrix(t[2], std::make_pair(f->stalk(c), f->stalk(s)));
            try {
                f->set_gen(s, c, m);
            } catch (const Error& e) {
                throw ScenarioError(g->pos, e.what());
            }
        }
        f->finalize();
    }
    if (auto d = validate_sheaf(*f); !d) {
        throw ScenarioError(b.pos, "sheaf '" + b.name + "': " + d.message);
    }
    w.owner[f.get()] = w.owner.at(&x);
    w.sheaves[b.name] = std::move(f);
}

inline void build_map(World& w, const Block& b)
{
    check_fields(b, {"complex", "image", "moving"});
    const Complex& x = w.complex(required(b, "complex"));
    auto m = std::make_unique<CellularMap>(CellularMap::identity(x));
    for (const Field* f : b.all("image")) {
        const auto& t = as_tuple(f->value, 2, 3);
        CellId c = cell_ref(x, t[0]);
        m->image[c] = cell_ref(x, t[1]);
        m->sign[c] = t.size() == 3 ? static_cast<int>(as_integer(t[2])) : (x.dim(m->image[c]) == x.dim(c) ? 1 : 0);
    }
    if (const Field* f = b.get("moving")) {
        m->moving.assign(x.size(), false);
        for (const auto& c : as_list(f->value)) {
            m->moving[cell_ref(x, c)] = true;
        }
    }
    for (CellId c = 0; c < x.size(); ++c) {
        if (!m->preserves_dim(c)) {
            m->sign[c] = 0;
        }
    }
    if (auto d = validate_map(*m); !d) {
        throw ScenarioError(b.pos, "map '" + b.name + "': " + d.message);
    }
    w.maps[b.name] = std::move(m);
}

inline void build_hom(World& w, const Block& b)
{
    check_fields(b, {"sheaf", "map", "scalar", "phi"});
    const CellSheaf& f = w.sheaf(required(b, "sheaf"));
    const Complex& x = f.base();
    auto h = std::make_unique<SheafHom>();
    h->sheaf = &f;
    if (const Field* m = b.get("map")) {
        const CellularMap& mp = *World::lookup(w.maps, m->value, "map");
        if (mp.domain != &x) {
            throw ScenarioError(m->value.pos, "map lives on a different complex than the sheaf");
        }
        h->map = mp;
    } else {
        h->map = CellularMap::identity(x);
    }
    Q scalar = 1;
    if (const Field* s = b.get("scalar")) {
        scalar = as_rational(s->value);
    }
    std::vector<std::optional<QMatrix>> given(x.size());
    for (const Field* p : b.all("phi")) {
        const auto& t = as_tuple(p->value, 2, 2);
        CellId c = cell_ref(x, t[0]);
        given[c] = as_matrix(t[1], std::make_pair(f.stalk(c), f.stalk(h->map.image[c])));
    }
    for (CellId c = 0; c < x.size(); ++c) {
        if (given[c]) {
            h->phi.push_back(*given[c]);
            continue;
        }
        std::size_t r = f.stalk(c);
        std::size_t s = f.stalk(h->map.image[c]);
        if (r != s && r * s != 0) {
            throw ScenarioError(b.pos, "hom '" + b.name + "' needs an explicit phi at '" + x.name(c) + "'");
        }
        h->phi.push_back(r == s ? QMatrix::identity(r, scalar) : QMatrix(r, s));
    }
    if (auto d = validate_hom(*h); !d) {
        throw ScenarioError(b.pos, "hom '" + b.name + "': " + d.message);
    }
    w.homs[b.name] = std::move(h);
}

inline void build_fan(World& w, const Block& b)
{
    check_fields(b, {"dim", "ray", "cone"});
    long dim = as_integer(required(b, "dim"));
    std::vector<std::string> names;
    std::vector<std::vector<Q>> rays;
    for (const Field* f : b.all("ray")) {
        const auto& t = as_tuple(f->value, 2, 2);
        names.push_back(as_name(t[0]));
        rays.push_back(as_rationals(t[1]));
        if (static_cast<long>(rays.back().size()) != dim) {
            throw ScenarioError(t[1].pos, "ray has the wrong length");
        }
    }
    auto ray_ref = [&](const Value& v) {
        auto it = std::find(names.begin(), names.end(), as_name(v));
        if (it == names.end()) {
            throw ScenarioError(v.pos, "unknown ray '" + v.name + "'");
        }
        return static_cast<std::size_t>(it - names.begin());
    };
    std::vector<RaySet> gens;
    for (const Field* f : b.all("cone")) {
        RaySet s;
        for (const auto& r : as_list(f->value)) {
            s.push_back(ray_ref(r));
        }
        gens.push_back(s);
    }
    try {
        Fan fan = Fan::from_cones(static_cast<int>(dim), rays, gens);
        if (auto d = check_complete(fan); !d) {
            throw ScenarioError(b.pos, "fan '" + b.name + "' is not complete: " + d.message);
        }
        w.fans[b.name] = make_cone_complex(std::move(fan));
    } catch (const ScenarioError&) {
        throw;
    } catch (const Error& e) {
        throw ScenarioError(b.pos, "fan '" + b.name + "': " + e.what());
    }
    w.ray_names[b.name] = names;
}

inline std::size_t cone_ref(const ConeComplexPtr& cc, const std::vector<std::string>& names, const Value& v)
{
    RaySet s;
    for (const auto& r : as_list(v)) {
        auto it = std::find(names.begin(), names.end(), as_name(r));
        if (it == names.end()) {
            throw ScenarioError(r.pos, "unknown ray '" + r.name + "'");
        }
        s.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    auto c = cc->fan.find(s);
    if (!c) {
        throw ScenarioError(v.pos, "no such cone in the fan");
    }
    return *c;
}

inline void build_conic_sheaf(World& w, const Block& b)
{
    check_fields(b, {"fan", "stalk", "gen"});
    const Value& fv = required(b, "fan");
    ConeComplexPtr cc = World::lookup(w.fans, fv, "fan");
    const auto& names = w.ray_names.at(fv.name);
    ConicSheaf cs{cc, names, std::make_unique<CellSheaf>(cc->cells)};
    for (const Field* s : b.all("stalk")) {
        const auto& t = as_tuple(s->value, 2, 2);
        long r = as_integer(t[1]);
        if (r < 0) {
            throw ScenarioError(t[1].pos, "negative rank");
        }
        cs.sheaf->set_stalk(cone_ref(cc, names, t[0]), static_cast<std::size_t>(r));
    }
    for (const Field* g : b.all("gen")) {
        const auto& t = as_tuple(g->value, 3, 3);
        auto s = cone_ref(cc, names, t[0]);
        auto c = cone_ref(cc, names, t[1]);
        try {
            cs.sheaf->set_gen(s, c, as_matrix(t[2], std::make_pair(cs.sheaf->stalk(c), cs.sheaf->stalk(s))));
        } catch (const ScenarioError&) {
            throw;
        } catch (const Error& e) {
            throw ScenarioError(g->pos, e.what());
        }
    }
    cs.sheaf->finalize();
    if (auto d = validate_sheaf(*cs.sheaf); !d) {
        throw ScenarioError(b.pos, "conic_sheaf '" + b.name + "': " + d.message);
    }
    w.conic_sheaves[b.name] = std::move(cs);
}

inline void build_fiber_endo(World& w, const Block& b)
{
    check_fields(b, {"sheaf", "psi", "at"});
    const ConicSheaf& cs = World::lookup(w.conic_sheaves, required(b, "sheaf"), "conic_sheaf");
    const auto n = static_cast<std::size_t>(cs.cones->fan.dim());
    auto m = std::make_unique<FiberModel>(empty_fiber(cs.cones, as_matrix(required(b, "psi"), std::make_pair(n, n))));
    m->sheaf = *cs.sheaf;
    auto act = map_image_check(m->psi, m->fan());
    if (!act.ok) {
        throw ScenarioError(required(b, "psi").pos, "psi is not fan-compatible: " + act.message);
    }
    std::vector<std::optional<QMatrix>> given(m->cone_count());
    for (const Field* a : b.all("at")) {
        const auto& t = as_tuple(a->value, 2, 2);
        auto c = cone_ref(cs.cones, cs.ray_names, t[0]);
        given[c] = as_matrix(t[1], std::make_pair(m->sheaf.stalk(c), m->sheaf.stalk(act.cone_perm[c])));
    }
    for (std::size_t c = 0; c < m->cone_count(); ++c) {
        std::size_t r = m->sheaf.stalk(c);
        std::size_t s = m->sheaf.stalk(act.cone_perm[c]);
        if (given[c]) {
            m->Psi[c] = *given[c];
        } else if (r == s || r * s == 0) {
            m->Psi[c] = r == s ? QMatrix::identity(r) : QMatrix(r, s);
        } else {
            throw ScenarioError(b.pos, "fiber_endo '" + b.name + "' needs an explicit 'at' for cone " +
                                           m->fan().cone_label(c));
        }
    }
    if (auto d = validate_fiber(*m); !d) {
        throw ScenarioError(b.pos, "fiber_endo '" + b.name + "': " + d.message);
    }
    w.fibers[b.name] = std::move(m);
}

inline void build_normal_model(World& w, const Block& b)
{
    check_fields(b, {"base", "fiber", "expanding", "non_characteristic", "sign"});
    const Complex& x = w.complex(required(b, "base"));
    auto d = std::make_unique<ComponentData>();
    NormalModel& nm = d->model;
    nm.base = &x;
    std::map<std::string, std::size_t> fiber_index;
    std::vector<std::pair<CellId, std::size_t>> entries;
    for (const Field* f : b.all("fiber")) {
        const auto& t = as_tuple(f->value, 2, 2);
        CellId c = cell_ref(x, t[0]);
        const std::string& fname = as_name(t[1]);
        if (!fiber_index.count(fname)) {
            fiber_index[fname] = nm.fibers.size();
            nm.fibers.push_back(w.fiber(t[1]));
        }
        entries.emplace_back(c, fiber_index[fname]);
    }
    std::sort(entries.begin(), entries.end());
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        if (entries[i].first == entries[i + 1].first) {
            throw ScenarioError(b.pos, "normal_model '" + b.name + "' has two fibers at '" + x.name(entries[i].first) + "'");
        }
    }
    for (auto [c, i] : entries) {
        nm.cells.push_back(c);
        nm.fiber_of.push_back(i);
    }
    nm.expanding.assign(nm.fibers.size(), std::nullopt);
    for (const Field* f : b.all("expanding")) {
        const auto& t = as_tuple(f->value, 2, 2);
        auto it = fiber_index.find(as_name(t[0]));
        if (it == fiber_index.end()) {
            throw ScenarioError(t[0].pos, "fiber_endo '" + t[0].name + "' is not used by this model");
        }
        const auto n = static_cast<std::size_t>(nm.fibers[it->second].fan().dim());
        QMatrix e = as_matrix(t[1]);
        if (e.rows() == 0) {
            e = QMatrix(n, 0);
        } else if (e.rows() != n) {
            throw ScenarioError(t[1].pos, "expanding basis needs one row per coordinate");
        }
        nm.expanding[it->second] = e;
    }
    if (const Field* f = b.get("non_characteristic")) {
        d->non_characteristic = as_integer(f->value) != 0;
    }
    if (!b.all("sign").empty()) {
        d->declared_sign.assign(nm.cells.size(), 0);
        for (const Field* f : b.all("sign")) {
            const auto& t = as_tuple(f->value, 2, 2);
            CellId c = cell_ref(x, t[0]);
            auto it = std::lower_bound(nm.cells.begin(), nm.cells.end(), c);
            if (it == nm.cells.end() || *it != c) {
                throw ScenarioError(t[0].pos, "sign given off the component");
            }
            d->declared_sign[static_cast<std::size_t>(it - nm.cells.begin())] = static_cast<int>(as_integer(t[1]));
        }
    }
    if (auto v = validate_normal_model(nm); !v) {
        throw ScenarioError(b.pos, "normal_model '" + b.name + "': " + v.message);
    }
    w.models[b.name] = std::move(d);
}

inline void build_function(World& w, const Block& b)
{
    check_fields(b, {"base", "value"});
    const Complex& x = w.complex(required(b, "base"));
    auto f = std::make_unique<ConstructibleFunction>(ConstructibleFunction::zero(x));
    for (const Field* v : b.all("value")) {
        const auto& t = as_tuple(v->value, 2, 2);
        f->value[cell_ref(x, t[0])] = as_rational(t[1]);
    }
    w.functions[b.name] = std::move(f);
}

inline void build_test_function(World& w, const Block& b)
{
    check_fields(b, {"base", "covector", "value", "degenerate"});
    const Complex& x = w.complex(required(b, "base"));
    std::unique_ptr<TestFunction> f;
    if (const Field* c = b.get("covector")) {
        try {
            f = std::make_unique<TestFunction>(linear_test_function(x, as_rationals(c->value)));
        } catch (const ScenarioError&) {
            throw;
        } catch (const Error& e) {
            throw ScenarioError(c->pos, e.what());
        }
    } else {
        f = std::make_unique<TestFunction>(TestFunction{&x, std::vector<Q>(x.size()), {}});
        for (const Field* v : b.all("value")) {
            const auto& t = as_tuple(v->value, 2, 2);
            f->value[cell_ref(x, t[0])] = as_rational(t[1]);
        }
    }
    std::vector<std::vector<Q>> degenerate;
    for (const Field* d : b.all("degenerate")) {
        degenerate.push_back(as_rationals(d->value));
    }
    if (auto d = certify_generic(*f, degenerate); !d) {
        throw ScenarioError(b.pos, "test_function '" + b.name + "': " + d.message);
    }
    w.test_functions[b.name] = std::move(f);
}

}  // namespace detail

/// Builds and validates every object; the first failure is reported with its position.
inline std::unique_ptr<World> build_world(const ScenarioDoc& doc)
{
    auto w = std::make_unique<World>();
    for (const Block& b : doc.blocks) {
        if (b.kind == "complex") {
            detail::build_complex(*w, b);
        } else if (b.kind == "sheaf") {
            detail::build_sheaf(*w, b);
        } else if (b.kind == "map") {
            detail::build_map(*w, b);
        } else if (b.kind == "hom") {
            detail::build_hom(*w, b);
        } else if (b.kind == "fan") {
            detail::build_fan(*w, b);
        } else if (b.kind == "conic_sheaf") {
            detail::build_conic_sheaf(*w, b);
        } else if (b.kind == "fiber_endo") {
            detail::build_fiber_endo(*w, b);
        } else if (b.kind == "normal_model") {
            detail::build_normal_model(*w, b);
        } else if (b.kind == "function") {
            detail::build_function(*w, b);
        } else if (b.kind == "test_function") {
            detail::build_test_function(*w, b);
        } else if (b.kind == "task") {
            w->tasks.push_back(&b);
        }
    }
    return w;
}

// ---------------------------------------------------------------------------------------
// writing objects back as blocks

class DocWriter {
public:
    ScenarioDoc doc;

    Block& block(const std::string& kind, const std::string& name)
    {
        doc.blocks.push_back({kind, name, {}, {}});
        return doc.blocks.back();
    }

    static Value cell(const Complex& x, CellId c, int sign = 0) { return Value::ident(x.name(c), sign); }

    void complex(const std::string& name, const Complex& x,
                 const std::vector<std::pair<std::string, CellSet>>& sets = {})
    {
        Block& b = block("complex", name);
        for (CellId c = 0; c < x.size(); ++c) {
            std::vector<Value> t{cell(x, c), Value::rational(x.dim(c))};
            if (!x.cell(c).boundary.empty()) {
                Value bd = Value::list();
                for (const auto& inc : x.cell(c).boundary) {
                    bd.items.push_back(cell(x, inc.face, inc.sign));
                }
                t.push_back(bd);
            }
            b.add("cell", Value::tuple(t));
        }
        for (CellId c = 0; c < x.size(); ++c) {
            if (auto p = x.coordinate(c)) {
                b.add("coord", Value::tuple({cell(x, c), rational_list(*p)}));
            }
        }
        for (const auto& [sname, s] : sets) {
            Value cells = Value::list();
            for (auto c : s.cells) {
                cells.items.push_back(cell(x, c));
            }
            b.add("set", Value::tuple({Value::ident(sname), Value::ident(set_kind_name(s.kind)), cells}));
        }
        names_[&x] = name;
    }

    void sheaf(const std::string& name, const CellSheaf& f)
    {
        const Complex& x = f.base();
        Block& b = block("sheaf", name);
        b.add("base", Value::ident(names_.at(&x)));
        for (CellId c = 0; c < x.size(); ++c) {
            if (f.stalk(c) > 0) {
                b.add("stalk", Value::tuple({cell(x, c), Value::rational(static_cast<long>(f.stalk(c)))}));
            }
        }
        for (CellId t = 0; t < x.size(); ++t) {
            for (const auto& inc : x.cell(t).boundary) {
                if (f.stalk(t) > 0 && f.stalk(inc.face) > 0) {
                    b.add("gen", Value::tuple({cell(x, inc.face), cell(x, t), matrix_value(f.gen(inc.face, t))}));
                }
            }
        }
        names_[&f] = name;
    }

    void map(const std::string& name, const CellularMap& m)
    {
        const Complex& x = *m.domain;
        Block& b = block("map", name);
        b.add("complex", Value::ident(names_.at(&x)));
        for (CellId c = 0; c < x.size(); ++c) {
            if (m.image[c] != c || (m.preserves_dim(c) && m.sign[c] != 1)) {
                std::vector<Value> t{cell(x, c), cell(x, m.image[c])};
                if (m.preserves_dim(c)) {
                    t.push_back(Value::rational(m.sign[c]));
                }
                b.add("image", Value::tuple(t));
            }
        }
        Value mv = Value::list();
        for (CellId c = 0; c < x.size(); ++c) {
            if (m.is_moving(c)) {
                mv.items.push_back(cell(x, c));
            }
        }
        if (!mv.items.empty()) {
            b.add("moving", mv);
        }
        names_[&m] = name;
    }

    /// `map_name` empty means the identity map.
    void hom(const std::string& name, const SheafHom& h, const std::string& map_name = {})
    {
        const CellSheaf& f = *h.sheaf;
        const Complex& x = f.base();
        Block& b = block("hom", name);
        b.add("sheaf", Value::ident(names_.at(&f)));
        if (!map_name.empty()) {
            b.add("map", Value::ident(map_name));
        }
        for (CellId c = 0; c < x.size(); ++c) {
            const QMatrix& p = h.phi[c];
            if (p.rows() * p.cols() == 0) {
                continue;
            }
            if (p.rows() == p.cols() && p == QMatrix::identity(p.rows())) {
                continue;
            }
            b.add("phi", Value::tuple({cell(x, c), matrix_value(p)}));
        }
    }

    /// Writes the fan (rays r0, r1, ...) and returns its name.
    void fan(const std::string& name, const Fan& f)
    {
        Block& b = block("fan", name);
        b.add("dim", Value::rational(f.dim()));
        for (std::size_t r = 0; r < f.rays().size(); ++r) {
            b.add("ray", Value::tuple({Value::ident("r" + std::to_string(r)), rational_list(f.rays()[r])}));
        }
        for (std::size_t c = 0; c < f.cone_count(); ++c) {
            bool maximal = true;
            for (std::size_t d = 0; d < f.cone_count() && maximal; ++d) {
                maximal = !(d != c && f.cone_dim(d) > f.cone_dim(c) && f.face_of(c, d));
            }
            if (maximal) {
                b.add("cone", cone_value(f, c));
            }
        }
        fan_names_[&f] = name;
    }

    static Value cone_value(const Fan& f, std::size_t c)
    {
        Value l = Value::list();
        for (auto r : f.cone(c)) {
            l.items.push_back(Value::ident("r" + std::to_string(r)));
        }
        return l;
    }

    /// Conic sheaf plus fiber endomorphism; the fan block is written once per cone complex.
    void fiber(const std::string& name, const FiberModel& m)
    {
        const Fan& f = m.fan();
        if (!fan_names_.count(&f)) {
            fan(name + "_fan", f);
        }
        std::string sname = name + "_sheaf";
        Block& s = block("conic_sheaf", sname);
        s.add("fan", Value::ident(fan_names_.at(&f)));
        for (std::size_t c = 0; c < f.cone_count(); ++c) {
            if (m.sheaf.stalk(c) > 0) {
                s.add("stalk", Value::tuple({cone_value(f, c), Value::rational(static_cast<long>(m.sheaf.stalk(c)))}));
            }
        }
        const Complex& x = m.cones->cells;
        for (CellId t = 0; t < x.size(); ++t) {
            for (const auto& inc : x.cell(t).boundary) {
                if (m.sheaf.stalk(t) > 0 && m.sheaf.stalk(inc.face) > 0) {
                    s.add("gen", Value::tuple({cone_value(f, inc.face), cone_value(f, t), matrix_value(m.sheaf.gen(inc.face, t))}));
                }
            }
        }
        Block& e = block("fiber_endo", name);
        e.add("sheaf", Value::ident(sname));
        e.add("psi", matrix_value(m.psi));
        for (std::size_t c = 0; c < f.cone_count(); ++c) {
            const QMatrix& p = m.Psi[c];
            if (p.rows() * p.cols() == 0 || (p.rows() == p.cols() && p == QMatrix::identity(p.rows()))) {
                continue;
            }
            e.add("at", Value::tuple({cone_value(f, c), matrix_value(p)}));
        }
    }

    /// Fibers are written as `prefix_<i>` unless already named in `fiber_names`.
    void normal_model(const std::string& name, const ComponentData& d, const std::vector<std::string>& fiber_names)
    {
        const NormalModel& nm = d.model;
        const Complex& x = *nm.base;
        Block& b = block("normal_model", name);
        b.add("base", Value::ident(names_.at(&x)));
        for (std::size_t i = 0; i < nm.cells.size(); ++i) {
            b.add("fiber", Value::tuple({cell(x, nm.cells[i]), Value::ident(fiber_names.at(nm.fiber_of[i]))}));
        }
        for (std::size_t i = 0; i < nm.expanding.size(); ++i) {
            if (nm.expanding[i]) {
                b.add("expanding", Value::tuple({Value::ident(fiber_names.at(i)), matrix_value(*nm.expanding[i])}));
            }
        }
        if (d.non_characteristic) {
            b.add("non_characteristic", Value::rational(1));
        }
        for (std::size_t i = 0; i < d.declared_sign.size(); ++i) {
            b.add("sign", Value::tuple({cell(x, nm.cells[i]), Value::rational(d.declared_sign[i])}));
        }
    }

    void function(const std::string& name, const ConstructibleFunction& f)
    {
        const Complex& x = *f.base;
        Block& b = block("function", name);
        b.add("base", Value::ident(names_.at(&x)));
        for (CellId c = 0; c < x.size(); ++c) {
            if (!is_zero(f(c))) {
                b.add("value", Value::tuple({cell(x, c), Value::rational(f(c))}));
            }
        }
    }

    void test_function(const std::string& name, const Complex& x, const std::vector<Q>& covector)
    {
        Block& b = block("test_function", name);
        b.add("base", Value::ident(names_.at(&x)));
        b.add("covector", rational_list(covector));
    }

    Block& task(const std::string& name, const std::string& kind)
    {
        Block& b = block("task", name);
        b.add("kind", Value::ident(kind));
        return b;
    }

    const std::string& name_of(const void* p) const { return names_.at(p); }

private:
    static const char* set_kind_name(SetKind k)
    {
        switch (k) {
        case SetKind::Closed: return "closed";
        case SetKind::Open: return "open";
        default: return "locally_closed";
        }
    }

    std::map<const void*, std::string> names_;
    std::map<const Fan*, std::string> fan_names_;
};

}  // namespace lefkit

#endif
