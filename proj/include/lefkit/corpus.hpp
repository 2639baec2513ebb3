#ifndef LEFKIT_CORPUS_HPP
#define LEFKIT_CORPUS_HPP

#include "lefkit/generators.hpp"
#include "lefkit/world.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lefkit {

struct GenerateParams {
    int k = 2;                ///< sphere example size
    std::uint64_t seed = 1;
    int count = 12;           ///< instances for the random families
};

namespace detail {

inline bool same_fiber(const FiberModel& a, const FiberModel& b)
{
    if (a.cones != b.cones || a.psi != b.psi || a.Psi != b.Psi || a.sheaf.stalks() != b.sheaf.stalks()) {
        return false;
    }
    const Complex& x = a.cones->cells;
    for (CellId t = 0; t < x.size(); ++t) {
        for (const auto& inc : x.cell(t).boundary) {
            if (a.sheaf.gen(inc.face, t) != b.sheaf.gen(inc.face, t)) {
                return false;
            }
        }
    }
    return true;
}

/// Writes the fibers (deduplicated by content) and the model.
class ModelWriter {
public:
    explicit ModelWriter(DocWriter& w) : w_(w) {}

    void write(const std::string& name, const ComponentData& d)
    {
        std::vector<std::string> names;
        for (const auto& f : d.model.fibers) {
            names.push_back(fiber(name, f));
        }
        w_.normal_model(name, d, names);
    }

    std::string fiber(const std::string& hint, const FiberModel& f)
    {
        for (std::size_t i = 0; i < seen_.size(); ++i) {
            if (same_fiber(*seen_[i].first, f)) {
                return seen_[i].second;
            }
        }
        std::string n = hint + "_f" + std::to_string(count_[hint]++);
        w_.fiber(n, f);
        store_.push_back(std::make_unique<FiberModel>(f));
        seen_.emplace_back(store_.back().get(), n);
        return n;
    }

private:
    DocWriter& w_;
    std::vector<std::unique_ptr<FiberModel>> store_;
    std::vector<std::pair<const FiberModel*, std::string>> seen_;
    std::map<std::string, int> count_;
};

inline Value names(const std::vector<std::string>& v) { return name_list(v); }

inline ComponentData single_point_model(const Complex& x, CellId c, FiberModel f, bool non_char)
{
    ComponentData d;
    d.model.base = &x;
    d.model.cells = {c};
    d.model.fibers.push_back(std::move(f));
    d.model.fiber_of = {0};
    d.model.expanding = {std::nullopt};
    d.non_characteristic = non_char;
    return d;
}

// S², S¹ and an interval with the identity on the constant sheaf
inline ScenarioDoc identity_suite(const GenerateParams&)
{
    DocWriter w;
    struct Space {
        std::string name;
        Simplicial s;
        long trace;
        std::vector<std::size_t> dims;
    };
    std::vector<Space> spaces{{"sphere", octahedron(), 2, {1, 0, 1}}, {"circle", circle(4), 0, {1, 1}},
                              {"interval", path(2), 1, {1}}};
    for (auto& sp : spaces) {
        const Complex& x = sp.s.complex;
        CellId v = 0;
        w.complex(sp.name, x, {{"star0", star(x, v)}});
        CellSheaf f = constant_sheaf(x, 1);
        w.sheaf(sp.name + "_const", f);
        SheafHom h = SheafHom::identity(f);
        w.hom(sp.name + "_id", h);
        Block& c = w.task(sp.name + "_cohomology", "cohomology");
        c.add("sheaf", Value::ident(sp.name + "_const"));
        c.add("expect_dims", rational_list(std::vector<Q>(sp.dims.begin(), sp.dims.end())));
        Block& t = w.task(sp.name + "_trace", "trace");
        t.add("hom", Value::ident(sp.name + "_id"));
        t.add("open", Value::ident("star0"));
        t.add("expect", Value::rational(sp.trace));
        Block& k = w.task(sp.name + "_kashiwara", "verify");
        k.add("hom", Value::ident(sp.name + "_id"));
        k.add("expect", Value::rational(sp.trace));
    }
    return w.doc;
}

// reflection of a 4-gon fixing v0 and v2; the normal line is flipped at each fixed point
inline ScenarioDoc circle_reflection(const GenerateParams&)
{
    DocWriter w;
    Simplicial s = circle(4);
    const Complex& x = s.complex;
    w.complex("S1", x);
    CellSheaf f = constant_sheaf(x, 1);
    w.sheaf("C", f);
    CellularMap m = simplicial_map(s, {0, 3, 2, 1});
    w.map("reflection", m);
    SheafHom h = SheafHom::identity(f);
    h.map = m;
    w.hom("refl", h, "reflection");
    ModelWriter mw(w);
    std::vector<std::string> models;
    for (std::size_t v : {0, 2}) {
        CellId c = s.index.at({v});
        std::string n = "at_" + x.name(c);
        auto d = single_point_model(x, c, line_fiber(-1, LineSheaf::Whole), true);
        d.declared_sign = {1};
        mw.write(n, d);
        models.push_back(n);
    }
    Block& t = w.task("reflection_trace", "trace");
    t.add("hom", Value::ident("refl"));
    t.add("expect", Value::rational(2));
    Block& k = w.task("reflection_kashiwara", "verify");
    k.add("hom", Value::ident("refl"));
    k.add("models", names(models));
    k.add("expect", Value::rational(2));
    return w.doc;
}

inline ScenarioDoc octahedral_antipodal(const GenerateParams&)
{
    DocWriter w;
    Simplicial s = octahedron();
    const Complex& x = s.complex;
    w.complex("S2", x);
    CellSheaf f = constant_sheaf(x, 1);
    w.sheaf("C", f);
    CellularMap m = simplicial_map(s, antipode_on_octahedron());
    w.map("antipode", m);
    SheafHom h = SheafHom::identity(f);
    h.map = m;
    w.hom("anti", h, "antipode");
    Block& t = w.task("antipodal_trace", "trace");
    t.add("hom", Value::ident("anti"));
    t.add("expect", Value::rational(0));
    Block& k = w.task("antipodal_kashiwara", "verify");
    k.add("hom", Value::ident("anti"));
    k.add("expect", Value::rational(0));
    return w.doc;
}

/// Point × compactified fiber with the product models at the origin and at fixed points at infinity.
inline void write_compactified(DocWriter& w, ModelWriter& mw, const std::string& name, const Complex& base,
                               const SheafHom& base_hom, const FiberModel& fm, bool non_char, const Q& expect)
{
    auto cfb = compactify_fiber(fm);
    auto p = product(base, cfb->cf.complex);
    p.complex.finalize();
    CellSheaf f = product_sheaf(p, *base_hom.sheaf, cfb->sheaf);
    SheafHom h = product_hom(p, f, base_hom, cfb->hom);
    w.complex(name, p.complex);
    w.sheaf(name + "_sheaf", f);
    w.map(name + "_map", h.map);
    w.hom(name + "_hom", h, name + "_map");
    auto data = product_component_data(p, base_hom, fm, *cfb);
    std::vector<std::string> models;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (non_char) {
            bool all_constant = true;
            for (const auto& g : data[i].model.fibers) {
                all_constant = all_constant && locally_constant(g);
            }
            data[i].non_characteristic = all_constant;
            if (all_constant) {
                for (std::size_t j = 0; j < data[i].model.cells.size(); ++j) {
                    const auto& g = data[i].model.fibers[data[i].model.fiber_of[j]];
                    data[i].declared_sign.push_back(sign_det_id_minus(g.psi));
                }
            }
        }
        std::string n = name + "_m" + std::to_string(i);
        mw.write(n, data[i]);
        models.push_back(n);
    }
    Block& k = w.task(name + "_kashiwara", "verify");
    k.add("hom", Value::ident(name + "_hom"));
    k.add("models", names(models));
    k.add("expect", Value::rational(expect));
}

inline const Complex& point_complex()
{
    static const Complex pt = [] {
        Complex c;
        c.add_cell("pt", 0);
        c.finalize();
        return c;
    }();
    return pt;
}

// θ at the origin of the line for ψ = λ on ℂ_[0,∞) / ℂ_(0,∞): 0, −1, 1
inline ScenarioDoc line_trio(const GenerateParams&)
{
    DocWriter w;
    ModelWriter mw(w);
    struct Case {
        const char* name;
        Q lambda;
        LineSheaf kind;
        long theta;
        bool localizable;
    };
    const Case cases[] = {{"closed_expanding", 2, LineSheaf::ClosedHalf, 0, false},
                          {"open_expanding", 2, LineSheaf::OpenHalf, -1, false},
                          {"closed_shrinking", Q(1, 2), LineSheaf::ClosedHalf, 1, true}};
    const Complex& pt = point_complex();
    w.complex("point", pt);
    CellSheaf fp = constant_sheaf(pt, 1);
    w.sheaf("point_const", fp);
    SheafHom hp = SheafHom::identity(fp);
    for (const auto& c : cases) {
        FiberModel fm = line_fiber(c.lambda, c.kind);
        std::string fname = mw.fiber(c.name, fm);
        Block& t = w.task(std::string(c.name) + "_theta", "localize");
        t.add("fiber", Value::ident(fname));
        t.add("oracle", Value::ident("line"));
        t.add("expect", Value::rational(c.theta));
        t.add("expect_localizable", Value::rational(c.localizable ? 1 : 0));
        Q global = line_oracle(fm).global;
        write_compactified(w, mw, std::string(c.name) + "_line", pt, hp, fm, false, global);
    }
    return w.doc;
}

inline ScenarioDoc products(const GenerateParams&)
{
    DocWriter w;
    ModelWriter mw(w);
    Simplicial interval = path(1);
    Simplicial ring = circle(3);
    w.complex("interval", interval.complex);
    w.complex("ring", ring.complex);
    CellSheaf fi = constant_sheaf(interval.complex, 1);
    CellSheaf fr = constant_sheaf(ring.complex, 2);
    w.sheaf("interval_const", fi);
    w.sheaf("ring_const", fr);
    SheafHom hi = SheafHom::identity(fi, Q(3));
    SheafHom hr = SheafHom::identity(fr);
    auto quad = make_cone_complex(orthant_fan(2));
    std::vector<bool> all(quad->fan.cone_count(), true), positive;
    for (const auto& c : quad->fan.cones()) {
        positive.push_back(std::all_of(c.begin(), c.end(), [](auto r) { return r % 2 == 0; }));
    }
    struct Case {
        std::string name;
        const Complex* base;
        const SheafHom* hom;
        FiberModel fm;
    };
    std::vector<Case> cases;
    cases.push_back({"interval_x_line", &interval.complex, &hi, line_fiber(2, LineSheaf::Whole)});
    cases.push_back({"interval_x_flipped_line", &interval.complex, &hi, line_fiber(-2, LineSheaf::Whole)});
    cases.push_back({"interval_x_quadrant", &interval.complex, &hi,
                     indicator_fiber(quad, QMatrix{{2, 0}, {0, Q(1, 2)}}, positive)});
    cases.push_back({"ring_x_plane", &ring.complex, &hr, indicator_fiber(quad, QMatrix{{3, 0}, {0, -2}}, all)});
    cases.push_back({"ring_x_quadrant", &ring.complex, &hr,
                     indicator_fiber(quad, QMatrix{{Q(1, 3), 0}, {0, Q(1, 2)}}, positive)});
    for (const auto& c : cases) {
        auto cfb = compactify_fiber(c.fm);
        auto p = product(*c.base, cfb->cf.complex);
        p.complex.finalize();
        CellSheaf f = product_sheaf(p, *c.hom->sheaf, cfb->sheaf);
        SheafHom h = product_hom(p, f, *c.hom, cfb->hom);
        write_compactified(w, mw, c.name, *c.base, *c.hom, c.fm, true, global_trace(h));
    }
    return w.doc;
}

// constant normal data: non-characteristic components of every codimension and sign
inline ScenarioDoc noncharacteristic(const GenerateParams& p)
{
    DocWriter w;
    ModelWriter mw(w);
    Rng rng(p.seed);
    Simplicial interval = path(1);
    w.complex("interval", interval.complex);
    CellSheaf fi = constant_sheaf(interval.complex, 1);
    w.sheaf("interval_const", fi);
    SheafHom hi = SheafHom::identity(fi, Q(2));
    for (int i = 0; i < p.count; ++i) {
        const int n = 1 + i % 3;
        std::vector<int> classes(static_cast<std::size_t>(n));
        for (auto& c : classes) {
            c = static_cast<int>(uniform_int(rng, 0, 2));
        }
        if (i % 4 == 0) {
            std::fill(classes.begin(), classes.end(), 1);  // shrinking normal
        } else if (i % 4 == 1) {
            std::fill(classes.begin(), classes.end(), 0);  // expanding normal
        }
        auto s = distinct_scalars(rng, classes);
        QMatrix psi(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            psi(static_cast<std::size_t>(a), static_cast<std::size_t>(a)) = s[static_cast<std::size_t>(a)];
        }
        auto cc = make_cone_complex(orthant_fan(n));
        FiberModel fm = indicator_fiber(cc, psi, std::vector<bool>(cc->fan.cone_count(), true));
        auto cfb = compactify_fiber(fm);
        auto prod = product(interval.complex, cfb->cf.complex);
        prod.complex.finalize();
        CellSheaf f = product_sheaf(prod, fi, cfb->sheaf);
        SheafHom h = product_hom(prod, f, hi, cfb->hom);
        write_compactified(w, mw, "normal" + std::to_string(i), interval.complex, hi, fm, true, global_trace(h));
    }
    return w.doc;
}

inline ScenarioDoc toric(const GenerateParams& p)
{
    DocWriter w;
    ModelWriter mw(w);
    Rng rng(p.seed);
    for (int i = 0; i < p.count; ++i) {
        FanCase c = random_fan_case(rng);
        const FanKind kinds[] = {FanKind::Line, FanKind::Diagonal2, FanKind::Diagonal3};
        c.kind = kinds[i % 3];
        std::vector<int> classes(static_cast<std::size_t>(i % 3 + 1));
        for (auto& k : classes) {
            k = static_cast<int>(uniform_int(rng, 0, 2));
        }
        c.scalars = distinct_scalars(rng, classes);
        FiberModel fm = build_fan_case(c);
        std::string f = mw.fiber("toric" + std::to_string(i), fm);
        Block& t = w.task("toric" + std::to_string(i), "localize");
        t.add("fiber", Value::ident(f));
        t.add("toric", Value::rational(1));
    }
    return w.doc;
}

inline ScenarioDoc fan_suite(const GenerateParams& p)
{
    DocWriter w;
    ModelWriter mw(w);
    Rng rng(p.seed);
    for (int i = 0; i < p.count; ++i) {
        FanCase c = random_fan_case(rng);
        FiberModel fm = build_fan_case(c);
        std::string name = std::string("fan") + std::to_string(i);
        std::string f = mw.fiber(name, fm);
        Block& t = w.task(name + "_" + to_string(c.kind), "localize");
        t.add("fiber", Value::ident(f));
        FanCase d = classification_equivalent(rng, c);
        std::string g = mw.fiber(name + "eq", build_fan_case(d));
        Block& u = w.task(name + "_equivalent", "localize");
        u.add("fiber", Value::ident(g));
        u.add("expect", Value::rational(theta_value(fm).value));
    }
    return w.doc;
}

inline ScenarioDoc sphere(const GenerateParams& p)
{
    auto ex = sphere_example(p.k);
    DocWriter w;
    ModelWriter mw(w);
    const Complex& base = ex->base.complex;
    const Complex& disk = ex->disk.complex;
    w.complex("base", base);
    w.complex("disk", disk);
    w.complex("Z", ex->z_complex.complex, {{"Z", CellSet{ex->z_cells, SetKind::LocallyClosed}}});
    const char* sheaf_names[] = {"F", "CY", "CZ"};
    for (int i = 0; i < 3; ++i) {
        w.sheaf(sheaf_names[i], *ex->sheaves[static_cast<std::size_t>(i)]);
    }
    for (int j = 1; j < p.k; ++j) {
        w.map("rot" + std::to_string(j), ex->rotation[static_cast<std::size_t>(j)]);
    }
    // hom per (sheaf, slice); slice -1 is the generic identity
    auto hom_name = [&](int sheaf, int slice) {
        return std::string(sheaf_names[sheaf]) + (slice < 0 ? "_generic" : "_s" + std::to_string(slice));
    };
    for (int s = 0; s < 3; ++s) {
        for (int j = -1; j < p.k; ++j) {
            if (j < 0 && s != 1) {
                continue;
            }
            const CellSheaf& f = *ex->sheaves[static_cast<std::size_t>(s)];
            CellularMap m = j <= 0 ? CellularMap::identity(disk) : ex->rotation[static_cast<std::size_t>(j)];
            SheafHom h = indicator_hom(f, m);
            w.hom(hom_name(s, j), h, j <= 0 ? std::string() : "rot" + std::to_string(j));
        }
    }
    mw.write("normal", ComponentData{ex->model, false, {}});
    auto fibered = [&](const std::string& name, int sheaf_slice, int sheaf_generic, long expect, bool compare) {
        Block& t = w.task(name, "fibered_trace");
        t.add("base", Value::ident("base"));
        for (CellId c = 0; c < base.size(); ++c) {
            if (ex->is_slice(c)) {
                t.add("fiber", Value::tuple({DocWriter::cell(base, c), Value::ident(hom_name(sheaf_slice, ex->slice_index(c)))}));
            } else if (sheaf_generic >= 0) {
                t.add("fiber", Value::tuple({DocWriter::cell(base, c), Value::ident(hom_name(sheaf_generic, -1))}));
            }
        }
        if (compare) {
            t.add("compare", Value::ident("normal"));
            t.add("record", Value::rational(ex->recorded_value()));
        }
        t.add("expect", Value::rational(expect));
    };
    fibered("sphere_trace", 0, 1, 0, true);
    fibered("sphere_trace_Y", 1, 1, 0, false);
    fibered("sphere_trace_Z", 2, -1, 0, false);
    Block& e = w.task("chi_c_Z", "euler");
    e.add("complex", Value::ident("Z"));
    e.add("set", Value::ident("Z"));
    e.add("expect", Value::rational(static_cast<long>(p.k) * (1 - p.k)));
    return w.doc;
}

inline ScenarioDoc microlocal(const GenerateParams& p)
{
    DocWriter w;
    Rng rng(p.seed);
    Simplicial s1 = circle(5);
    Simplicial s2 = octahedron();
    Simplicial i1 = path(2);
    Simplicial i2 = path(1);
    ProductComplex sq = realized_product(i1.complex, i2.complex);
    std::vector<std::pair<std::string, const Complex*>> spaces{{"S1", &s1.complex}, {"S2", &s2.complex}, {"square", &sq.complex}};
    for (const auto& [name, x] : spaces) {
        w.complex(name, *x);
        for (int i = 0; i < p.count; ++i) {
            auto th = ConstructibleFunction::zero(*x);
            for (CellId c = 0; c < x->size(); ++c) {
                th.value[c] = i == 0 ? Q(1) : Q(uniform_int(rng, -2, 2));
            }
            std::string fn = name + "_theta" + std::to_string(i);
            w.function(fn, th);
            Block& c = w.task(fn + "_cc", "cc");
            c.add("function", Value::ident(fn));
            c.add("expect", Value::rational(cc_of_function(th).total()));
            Block& t = w.task(fn + "_pairing", "pairing");
            t.add("function", Value::ident(fn));
            t.add("random", Value::rational(5));
            t.add("expect", Value::rational(euler_integral_c(th)));
        }
    }
    return w.doc;
}

}  // namespace detail

using GeneratorFn = std::function<ScenarioDoc(const GenerateParams&)>;

inline const std::vector<std::pair<std::string, GeneratorFn>>& generators()
{
    static const std::vector<std::pair<std::string, GeneratorFn>> g{
        {"identity", detail::identity_suite},
        {"circle_reflection", detail::circle_reflection},
        {"octahedral_antipodal", detail::octahedral_antipodal},
        {"line_trio", detail::line_trio},
        {"products", detail::products},
        {"noncharacteristic", detail::noncharacteristic},
        {"toric", detail::toric},
        {"fan_suite", detail::fan_suite},
        {"sphere", detail::sphere},
        {"microlocal", detail::microlocal},
    };
    return g;
}

inline ScenarioDoc generate(const std::string& name, const GenerateParams& p = {})
{
    for (const auto& [n, fn] : generators()) {
        if (n == name) {
            return fn(p);
        }
    }
    std::vector<std::string> known;
    for (const auto& g : generators()) {
        known.push_back(g.first);
    }
    throw ScenarioError({1, 1}, "unknown generator '" + name + "'", known);
}

}  // namespace lefkit

#endif
