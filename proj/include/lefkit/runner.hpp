#ifndef LEFKIT_RUNNER_HPP
#define LEFKIT_RUNNER_HPP

#include "lefkit/generators.hpp"
#include "lefkit/world.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace lefkit {

using json = nlohmann::ordered_json;

inline constexpr const char* report_version = "1.0";

inline const std::vector<std::string>& task_kinds()
{
    static const std::vector<std::string> k{"validate", "cohomology", "euler",  "trace",  "localize",
                                            "cc",       "pairing",    "verify", "fibered_trace"};
    return k;
}

struct RunOptions {
    std::uint64_t seed = 1;
    std::optional<std::string> only_task;
    bool timing = false;
};

struct TaskOutcome {
    std::string name;
    std::string kind;
    bool pass = false;
    json result = json::object();
    std::vector<std::string> failed;  ///< names of failed checks
    std::string error;
    double millis = 0;
};

struct RunReport {
    std::string hash;
    std::uint64_t seed = 0;
    std::vector<TaskOutcome> tasks;
    bool pass = true;
};

inline json rationals_json(const std::vector<Q>& v)
{
    json a = json::array();
    for (const auto& q : v) {
        a.push_back(to_string(q));
    }
    return a;
}

inline json report_json(const RunReport& r, bool timing)
{
    json j;
    j["version"] = report_version;
    j["scenario_hash"] = r.hash;
    j["seed"] = r.seed;
    j["pass"] = r.pass;
    json tasks = json::array();
    for (const auto& t : r.tasks) {
        json o;
        o["name"] = t.name;
        o["kind"] = t.kind;
        o["pass"] = t.pass;
        o["result"] = t.result;
        o["failed_checks"] = t.failed;
        if (!t.error.empty()) {
            o["error"] = t.error;
        }
        if (timing) {
            o["millis"] = t.millis;
        }
        tasks.push_back(o);
    }
    j["tasks"] = tasks;
    return j;
}

inline std::string report_text(const RunReport& r, bool timing)
{
    std::string s = "scenario " + r.hash + " seed " + std::to_string(r.seed) + "\n";
    for (const auto& t : r.tasks) {
        s += (t.pass ? "PASS " : "FAIL ") + t.kind + " " + t.name;
        if (timing) {
            s += " (" + std::to_string(t.millis) + " ms)";
        }
        s += "\n";
        for (const auto& [k, v] : t.result.items()) {
            s += "  " + k + " = " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
        }
        for (const auto& f : t.failed) {
            s += "  failed: " + f + "\n";
        }
        if (!t.error.empty()) {
            s += "  error: " + t.error + "\n";
        }
    }
    s += r.pass ? "overall PASS\n" : "overall FAIL\n";
    return s;
}

namespace detail {

class TaskContext {
public:
    TaskContext(const World& w, const Block& b, TaskOutcome& out, std::uint64_t seed) : w(w), b(b), out(out), seed(seed) {}

    const World& w;
    const Block& b;
    TaskOutcome& out;
    std::uint64_t seed;

    void check(const std::string& name, bool ok)
    {
        out.result["check_" + name] = ok;
        if (!ok) {
            out.failed.push_back(name);
        }
    }

    void expect_value(const Q& actual, const char* key = "expect")
    {
        if (const Field* e = b.get(key)) {
            out.result[key] = to_string(as_rational(e->value));
            check(key, actual == as_rational(e->value));
        }
    }

    const Value& need(const std::string& key) const { return required(b, key); }
    const Field* opt(const std::string& key) const { return b.get(key); }
};

inline std::vector<CellId> all_ids(std::size_t n)
{
    std::vector<CellId> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = i;
    }
    return v;
}

inline CellSet task_set(const TaskContext& t, const Complex& x)
{
    if (const Field* s = t.opt("set")) {
        return t.w.set(x, s->value);
    }
    return all_cells(x);
}

inline json dims_json(const std::vector<std::size_t>& d)
{
    json a = json::array();
    for (auto v : d) {
        a.push_back(v);
    }
    return a;
}

inline void run_cohomology(TaskContext& t)
{
    check_fields(t.b, {"kind", "sheaf", "set", "expect_dims", "expect_lo"});
    const CellSheaf& f = t.w.sheaf(t.need("sheaf"));
    auto sc = sections_complex(f, task_set(t, f.base()));
    auto h = cohomology(sc.complex);
    t.out.result["lo"] = sc.complex.lo;
    t.out.result["dims"] = dims_json(h.dims());
    t.out.result["euler_characteristic"] = h.euler_characteristic();
    if (const Field* e = t.opt("expect_dims")) {
        std::vector<std::size_t> want;
        for (const auto& v : as_list(e->value)) {
            want.push_back(static_cast<std::size_t>(as_integer(v)));
        }
        int lo = t.opt("expect_lo") ? static_cast<int>(as_integer(t.opt("expect_lo")->value)) : 0;
        bool ok = true;
        int hi = std::max(lo + static_cast<int>(want.size()), sc.complex.lo + static_cast<int>(h.degrees.size()));
        for (int k = std::min(lo, sc.complex.lo); k < hi; ++k) {
            int i = k - lo;
            std::size_t w = i >= 0 && i < static_cast<int>(want.size()) ? want[static_cast<std::size_t>(i)] : 0;
            ok = ok && h.dim(k) == w;
        }
        t.check("expect_dims", ok);
    }
}

inline void run_euler(TaskContext& t)
{
    check_fields(t.b, {"kind", "function", "complex", "set", "expect"});
    Q v;
    if (const Field* f = t.opt("function")) {
        const ConstructibleFunction& th = t.w.function(f->value);
        v = euler_integral_c(th, task_set(t, *th.base));
        t.out.result["integral"] = to_string(v);
    } else {
        const Complex& x = t.w.complex(t.need("complex"));
        v = chi_c(x, task_set(t, x));
        t.out.result["chi_c"] = to_string(v);
    }
    t.expect_value(v);
}

inline void run_trace(TaskContext& t)
{
    check_fields(t.b, {"kind", "hom", "set", "open", "expect"});
    const SheafHom& h = t.w.hom(t.need("hom"));
    const Complex& x = h.sheaf->base();
    auto sc = sections_complex(*h.sheaf, task_set(t, x));
    auto e = induced_endo(h, sc);
    auto tr = endo_trace(sc.complex, e);
    t.out.result["lo"] = tr.lo;
    t.out.result["cochain_traces"] = rationals_json(tr.cochain_traces);
    t.out.result["cohomology_traces"] = rationals_json(tr.cohomology_traces);
    t.out.result["cochain"] = to_string(tr.cochain_alternating);
    t.out.result["cohomology"] = to_string(tr.cohomology_alternating);
    t.check("cochain_equals_cohomology", tr.consistent());
    if (const Field* o = t.opt("open")) {
        const CellSet& u = t.w.set(x, o->value);
        auto nc = open_sections_complex(*h.sheaf, u.cells);
        auto ne = nerve_endo(h, nc);
        auto nt = endo_trace(nc.complex, ne);
        Q integral = euler_integral_open(local_trace_function(h, u.cells), u.cells);
        t.out.result["open_trace"] = to_string(nt.cohomology_alternating);
        t.out.result["open_integral"] = to_string(integral);
        t.check("open_trace_equals_integral", nt.cohomology_alternating == integral && nt.consistent());
    }
    t.expect_value(tr.cohomology_alternating);
}

inline void run_localize(TaskContext& t)
{
    check_fields(t.b, {"kind", "fiber", "expanding", "oracle", "toric", "expect", "expect_localizable"});
    const FiberModel& m = t.w.fiber(t.need("fiber"));
    std::optional<QMatrix> override_e;
    if (const Field* e = t.opt("expanding")) {
        const auto n = static_cast<std::size_t>(m.fan().dim());
        QMatrix basis = as_matrix(e->value);
        override_e = basis.rows() == 0 ? QMatrix(n, 0) : basis;
    }
    QMatrix e = choose_expanding(m, override_e);
    ThetaValue tv = theta_value(m, e);
    Localized star = hyperbolic_localize(m, e);
    Localized shriek = hyperbolic_localize_shriek(m, e);
    t.out.result["theta"] = to_string(tv.value);
    t.out.result["closed_form"] = to_string(tv.closed_form);
    t.out.result["expanding_dim"] = e.cols();
    t.out.result["route_lo"] = star.trace.lo;
    t.out.result["route_dims"] = dims_json(star.dims);
    t.out.result["route_traces"] = rationals_json(star.trace.cohomology_traces);
    t.out.result["local_route_lo"] = shriek.trace.lo;
    t.out.result["local_route_dims"] = dims_json(shriek.dims);
    t.out.result["local_route_traces"] = rationals_json(shriek.trace.cohomology_traces);
    t.check("closed_form", tv.agree());
    t.check("routes_agree", routes_agree(star, shriek));
    bool e_indep = true;
    auto subspaces = valid_expanding_subspaces(m);
    for (const auto& s : subspaces) {
        e_indep = e_indep && theta_value(m, s).value == tv.value;
    }
    t.out.result["expanding_subspaces"] = subspaces.size();
    t.check("expanding_independent", e_indep);
    json shrinking = json::array();
    bool shrink_ok = true;
    for (const auto& s : valid_shrinking_subspaces(m)) {
        Q v = shrinking_localize(m, s).trace.cohomology_alternating;
        shrinking.push_back(to_string(v));
        shrink_ok = shrink_ok && v == tv.value;
    }
    t.out.result["shrinking_traces"] = shrinking;
    t.check("shrinking_equals_expanding", shrink_ok);
    Q restricted = m.Psi[0].rows() * m.Psi[0].cols() == 0 ? Q(0) : m.Psi[0].trace();
    t.out.result["restricted"] = to_string(restricted);
    t.out.result["localizable"] = restricted == tv.value;
    if (const Field* o = t.opt("oracle")) {
        if (as_name(o->value) != "line") {
            throw ScenarioError(o->value.pos, "unknown oracle '" + o->value.name + "'", {"line"});
        }
        LineOracle lo = line_oracle(m);
        t.out.result["oracle_global"] = to_string(lo.global);
        t.out.result["oracle_infinity"] = to_string(lo.theta_infinity);
        t.out.result["oracle_origin"] = to_string(lo.theta_origin);
        t.check("oracle", lo.theta_origin == tv.value);
    }
    if (const Field* o = t.opt("toric"); o && as_integer(o->value) != 0) {
        Q s = toric_sector_sum(m);
        t.out.result["toric"] = to_string(s);
        t.check("toric", s == tv.value);
    }
    if (const Field* l = t.opt("expect_localizable")) {
        t.check("expect_localizable", (restricted == tv.value) == (as_integer(l->value) != 0));
    }
    t.expect_value(tv.value);
}

inline json cycle_json(const LagrangianCycle& c)
{
    json o = json::object();
    for (CellId s = 0; s < c.base->size(); ++s) {
        if (!is_zero(c.multiplicity[s])) {
            o[c.base->name(s)] = to_string(c.multiplicity[s]);
        }
    }
    return o;
}

inline void run_cc(TaskContext& t)
{
    check_fields(t.b, {"kind", "function", "expect"});
    const ConstructibleFunction& th = t.w.function(t.need("function"));
    auto cc = cc_of_function(th);
    auto cf = cc_closed_form(th);
    t.out.result["multiplicity"] = cycle_json(cc);
    t.out.result["total"] = to_string(cc.total());
    t.check("closed_form", cc.multiplicity == cf.multiplicity);
    t.expect_value(cc.total());
}

inline void run_pairing(TaskContext& t)
{
    check_fields(t.b, {"kind", "function", "test_functions", "random", "expect"});
    const ConstructibleFunction& th = t.w.function(t.need("function"));
    const Complex& x = *th.base;
    std::vector<TestFunction> fs;
    std::vector<std::string> labels;
    if (const Field* l = t.opt("test_functions")) {
        for (const auto& v : as_list(l->value)) {
            const TestFunction& f = t.w.test_function(v);
            if (f.base != &x) {
                throw ScenarioError(v.pos, "test function lives on a different complex");
            }
            fs.push_back(f);
            labels.push_back(v.name);
        }
    }
    if (const Field* r = t.opt("random")) {
        long n = as_integer(r->value);
        std::size_t dim = 0;
        for (const auto& [v, p] : x.coordinates()) {
            dim = p.size();
        }
        if (dim == 0) {
            throw ScenarioError(r->pos, "random test functions need vertex coordinates");
        }
        Rng rng(t.seed ^ std::stoull(fnv1a_hex(t.b.name), nullptr, 16));
        for (long i = 0; i < n; ++i) {
            for (int attempt = 0;; ++attempt) {
                if (attempt == 100) {
                    throw Error("no generic covector found after 100 draws");
                }
                std::vector<Q> xi(dim);
                for (auto& q : xi) {
                    q = random_rational(rng, 9, 7);
                }
                TestFunction f = linear_test_function(x, xi);
                if (certify_generic(f)) {
                    fs.push_back(f);
                    std::string lab = "random(";
                    for (std::size_t k = 0; k < dim; ++k) {
                        lab += (k ? "," : "") + to_string(xi[k]);
                    }
                    labels.push_back(lab + ")");
                    break;
                }
            }
        }
    }
    if (fs.empty()) {
        throw ScenarioError(t.b.pos, "pairing needs 'test_functions' or 'random'");
    }
    Q integral = euler_integral_c(th);
    json per = json::object();
    bool ok = true;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        Q p = index_pairing(th, fs[i]);
        per[labels[i]] = to_string(p);
        ok = ok && p == integral;
    }
    t.out.result["integral"] = to_string(integral);
    t.out.result["pairings"] = per;
    t.check("pairing_equals_integral", ok);
    t.expect_value(integral);
}

inline json component_json(const Complex& x, const ComponentReport& c)
{
    json o;
    json cells = json::array();
    for (auto id : c.component.cells) {
        cells.push_back(x.name(id));
    }
    o["cells"] = cells;
    o["meets_support"] = c.meets_support;
    o["contribution"] = to_string(c.contribution);
    o["strategy"] = c.used ? to_string(*c.used) : "none";
    json s = json::object();
    for (const auto& r : c.strategies) {
        s[to_string(r.strategy)] = r.applicable ? json(to_string(r.value)) : json("n/a: " + r.reason);
    }
    o["strategies"] = s;
    o["strategies_agree"] = c.strategies_agree;
    o["restricted"] = to_string(c.restricted);
    o["localizable"] = c.localizable;
    if (!c.error.empty()) {
        o["error"] = c.error;
    }
    return o;
}

inline void run_verify(TaskContext& t)
{
    check_fields(t.b, {"kind", "hom", "models", "expect"});
    const SheafHom& h = t.w.hom(t.need("hom"));
    std::vector<ComponentData> data;
    if (const Field* m = t.opt("models")) {
        for (const auto& v : as_list(m->value)) {
            const ComponentData& d = t.w.model(v);
            if (d.model.base != &h.sheaf->base()) {
                throw ScenarioError(v.pos, "normal model lives on a different complex than the hom");
            }
            data.push_back(d);
        }
    }
    LefschetzReport r = verify_kashiwara(h, data);
    t.out.result["global"] = to_string(r.global);
    t.out.result["cochain_global"] = to_string(r.cochain_global);
    t.out.result["local_sum"] = to_string(r.local_sum);
    t.out.result["residual"] = to_string(r.residual);
    json comps = json::array();
    for (const auto& c : r.components) {
        comps.push_back(component_json(h.sheaf->base(), c));
    }
    t.out.result["components"] = comps;
    if (!r.errors.empty()) {
        t.out.result["errors"] = r.errors;
    }
    t.check("kashiwara", r.pass);
    t.expect_value(r.global);
}

inline void run_fibered_trace(TaskContext& t)
{
    check_fields(t.b, {"kind", "base", "fiber", "compare", "record", "expect"});
    const Complex& x = t.w.complex(t.need("base"));
    std::vector<const SheafHom*> fibers(x.size(), nullptr);
    for (const Field* f : t.b.all("fiber")) {
        const auto& tu = as_tuple(f->value, 2, 2);
        CellId c = cell_ref(x, tu[0]);
        if (fibers[c]) {
            throw ScenarioError(f->pos, "two fibers over '" + x.name(c) + "'");
        }
        fibers[c] = &t.w.hom(tu[1]);
    }
    Q total = fibered_trace(x, fibers);
    t.out.result["fibered_trace"] = to_string(total);
    if (const Field* c = t.opt("compare")) {
        const ComponentData& d = t.w.model(c->value);
        if (d.model.base != &x) {
            throw ScenarioError(c->value.pos, "normal model lives on a different complex");
        }
        auto table = theta_function(d.model);
        CellSet m{d.model.cells, SetKind::LocallyClosed};
        Q integral = euler_integral_c(table.theta, m);
        t.out.result["theta_integral"] = to_string(integral);
        t.check("routes_agree", integral == total);
    }
    if (const Field* r = t.opt("record")) {
        t.out.result["recorded"] = to_string(as_rational(r->value));
    }
    t.expect_value(total);
}

inline void run_task(TaskContext& t)
{
    const std::string& kind = as_name(required(t.b, "kind"));
    t.out.kind = kind;
    if (kind == "validate") {
        check_fields(t.b, {"kind"});
        t.out.result["objects"] = t.w.complexes.size() + t.w.sheaves.size() + t.w.homs.size() + t.w.fibers.size() +
                                  t.w.models.size() + t.w.functions.size();
    } else if (kind == "cohomology") {
        run_cohomology(t);
    } else if (kind == "euler") {
        run_euler(t);
    } else if (kind == "trace") {
        run_trace(t);
    } else if (kind == "localize") {
        run_localize(t);
    } else if (kind == "cc") {
        run_cc(t);
    } else if (kind == "pairing") {
        run_pairing(t);
    } else if (kind == "verify") {
        run_verify(t);
    } else if (kind == "fibered_trace") {
        run_fibered_trace(t);
    } else {
        throw ScenarioError(required(t.b, "kind").pos, "unknown task kind '" + kind + "'", task_kinds());
    }
}

}  // namespace detail

/// Parses, builds and runs a scenario. ScenarioError escapes for malformed documents;
/// computation errors are recorded on the failing task.
inline RunReport run_scenario(const std::string& text, const RunOptions& opt = {})
{
    ScenarioDoc doc = parse_scenario(text);
    auto world = build_world(doc);
    RunReport rep;
    rep.hash = fnv1a_hex(emit_scenario(doc));
    rep.seed = opt.seed;
    bool found = !opt.only_task;
    for (const Block* b : world->tasks) {
        if (opt.only_task && b->name != *opt.only_task) {
            continue;
        }
        found = true;
        TaskOutcome out;
        out.name = b->name;
        auto t0 = std::chrono::steady_clock::now();
        detail::TaskContext ctx(*world, *b, out, opt.seed);
        try {
            detail::run_task(ctx);
        } catch (const ScenarioError&) {
            throw;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        out.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        out.pass = out.error.empty() && out.failed.empty();
        rep.pass = rep.pass && out.pass;
        rep.tasks.push_back(std::move(out));
    }
    if (!found) {
        throw ScenarioError({1, 1}, "no task named '" + *opt.only_task + "'");
    }
    return rep;
}

}  // namespace lefkit

#endif
