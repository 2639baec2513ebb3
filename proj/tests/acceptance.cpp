// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "lefkit/corpus.hpp"
#include "lefkit/runner.hpp"

#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace lefkit;

namespace {

int failures = 0;

void line(int n, bool ok, const std::string& what, const std::string& detail)
{
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << what << " | " << detail << std::endl;
    failures += ok ? 0 : 1;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::filesystem::path> corpus()
{
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(LEFKIT_SCENARIO_DIR)) {
        if (e.path().extension() == ".lk") {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

const json& task_result(const json& rep, const std::string& name)
{
    for (const auto& t : rep["tasks"]) {
        if (t["name"] == name) {
            return t;
        }
    }
    throw Error("no task " + name);
}

void criterion1()
{
    bool ok = true;
    std::string detail;
    for (int k = 1; k <= 4; ++k) {
        auto ex = sphere_example(k);
        long direct = chi_c(ex->z_complex.complex, CellSet{ex->z_cells, SetKind::LocallyClosed});
        auto rep = report_json(run_scenario(emit_scenario(generate("sphere", {k, 1, 0})), {}), false);
        const auto& t = task_result(rep, "chi_c_Z");
        ok = ok && direct == k * (1 - k) && t["pass"] == true && t["result"]["chi_c"] == std::to_string(k * (1 - k));
        detail += "k=" + std::to_string(k) + ":" + std::to_string(direct) + " ";
    }
    line(1, ok, "chi_c(Z) = k(1-k), k = 1..4", detail);
}

void criterion2()
{
    Rng rng(2024);
    int n = 0, good = 0, opens = 0;
    std::size_t max_cells = 0;
    for (; n < 60; ++n) {
        Simplicial s = random_simplicial(rng, 200, 3);
        const Complex& x = s.complex;
        max_cells = std::max(max_cells, x.size());
        FlagProfile p = random_profile(rng, x, static_cast<std::size_t>(uniform_int(rng, 1, 3)), identity_orbits(x));
        CellSheaf f = flag_sheaf(x, p);
        SheafHom h = flag_endo(f, p, random_upper(rng, p.rank));
        auto sc = sections_complex(f, all_cells(x));
        auto tr = endo_trace(sc.complex, induced_endo(h, sc));
        bool ok = tr.consistent();
        // open star of a few random cells
        std::vector<CellId> seeds;
        for (int i = 0; i < 3; ++i) {
            seeds.push_back(static_cast<CellId>(uniform_int(rng, 0, static_cast<long>(x.size()) - 1)));
        }
        auto u = star_of(x, seeds);
        auto nc = open_sections_complex(f, u);
        auto nt = endo_trace(nc.complex, nerve_endo(h, nc));
        ok = ok && nt.consistent() && nt.cohomology_alternating == euler_integral_open(local_trace_function(h, u), u);
        opens += 1;
        good += ok ? 1 : 0;
    }
    line(2, good == n && n >= 50, "cochain trace = cohomology trace; open-set trace = open Euler integral",
         std::to_string(good) + "/" + std::to_string(n) + " random instances, " + std::to_string(opens) +
             " open sets, max " + std::to_string(max_cells) + " cells");
}

void criteria3and4()
{
    Rng rng(99);
    int n = 0, routes = 0, shrink_cases = 0, shrink_ok = 0, eind = 0, equiv = 0, subspaces = 0;
    for (; n < 120; ++n) {
        FanCase c = random_fan_case(rng);
        FiberModel m = build_fan_case(c);
        QMatrix e = choose_expanding(m);
        ThetaValue tv = theta_value(m, e);
        routes += routes_agree(hyperbolic_localize(m, e), hyperbolic_localize_shriek(m, e)) && tv.agree() ? 1 : 0;
        bool sh = true;
        auto shrinking = valid_shrinking_subspaces(m);
        for (const auto& s : shrinking) {
            sh = sh && shrinking_localize(m, s).trace.cohomology_alternating == tv.value;
        }
        shrink_cases += shrinking.empty() ? 0 : 1;
        shrink_ok += sh ? 1 : 0;
        bool ind = true;
        for (const auto& s : valid_expanding_subspaces(m)) {
            ind = ind && theta_value(m, s).value == tv.value;
            ++subspaces;
        }
        eind += ind ? 1 : 0;
        equiv += theta_value(build_fan_case(classification_equivalent(rng, c))).value == tv.value ? 1 : 0;
    }
    line(3, routes == n && shrink_ok == n && n >= 100, "localization routes agree degreewise; shrinking = expanding",
         std::to_string(routes) + "/" + std::to_string(n) + " route pairs, shrinking checked on " +
             std::to_string(shrink_cases) + " models");
    line(4, eind == n && equiv == n, "independent of E and of classification-equivalent psi",
         std::to_string(subspaces) + " expanding subspaces, " + std::to_string(equiv) + "/" + std::to_string(n) +
             " equivalent replacements");
}

void criterion5()
{
    const auto rep = report_json(run_scenario(emit_scenario(generate("line_trio"))), false);
    const char* names[] = {"closed_expanding", "open_expanding", "closed_shrinking"};
    const char* want[] = {"0", "-1", "1"};
    bool ok = rep["pass"] == true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        const auto& r = task_result(rep, std::string(names[i]) + "_theta")["result"];
        ok = ok && r["theta"] == want[i] && r["oracle_origin"] == want[i] && r["check_oracle"] == true;
        detail += std::string(names[i]) + "=" + r["theta"].get<std::string>() + " ";
    }
    // middle case: contribution differs from the restricted trace
    const auto& v = task_result(rep, "open_expanding_line_kashiwara")["result"];
    bool middle = false;
    for (const auto& c : v["components"]) {
        if (c["cells"].size() == 1 && c["contribution"] == "-1") {
            middle = c["restricted"] != c["contribution"] && c["localizable"] == false;
            detail += "middle contribution " + c["contribution"].get<std::string>() + " vs restricted " +
                      c["restricted"].get<std::string>();
        }
    }
    line(5, ok && middle, "line trio 0, -1, 1 with compactification oracle", detail);
}

void criterion6()
{
    Rng rng(6);
    int n = 0, good = 0;
    while (n < 60) {
        FanCase c = random_fan_case(rng);
        if (c.kind != FanKind::Line && c.kind != FanKind::Diagonal2 && c.kind != FanKind::Diagonal3) {
            continue;
        }
        FiberModel m = build_fan_case(c);
        good += toric_sector_sum(m) == theta_value(m).value ? 1 : 0;
        ++n;
    }
    auto tor = run_scenario(slurp(std::filesystem::path(LEFKIT_SCENARIO_DIR) / "toric.lk"));
    line(6, good == n && tor.pass, "toric sector formula",
         std::to_string(good) + "/" + std::to_string(n) + " sheaves, corpus toric.lk " + (tor.pass ? "pass" : "fail"));
}

void criterion7()
{
    bool ok = true;
    int verified = 0;
    std::string detail;
    for (const auto& p : corpus()) {
        auto rep = report_json(run_scenario(slurp(p)), false);
        for (const auto& t : rep["tasks"]) {
            if (t["kind"] == "verify") {
                ++verified;
                ok = ok && t["pass"] == true && t["result"]["residual"] == "0";
            }
            if (t["kind"] == "fibered_trace" && t["result"].contains("theta_integral")) {
                ok = ok && t["result"]["check_routes_agree"] == true;
                detail += p.stem().string() + ": " + t["result"]["fibered_trace"].get<std::string>() + "=" +
                          t["result"]["theta_integral"].get<std::string>() + " (recorded " +
                          t["result"]["recorded"].get<std::string>() + "); ";
            }
        }
        if (p.stem() == "circle_reflection") {
            const auto& r = task_result(rep, "reflection_kashiwara")["result"];
            bool split = r["global"] == "2" && r["components"].size() == 2;
            for (const auto& c : r["components"]) {
                split = split && c["contribution"] == "1";
            }
            ok = ok && split;
            detail += "reflection 2=1+1 " + std::string(split ? "ok" : "no") + "; ";
        }
        if (p.stem() == "octahedral_antipodal") {
            const auto& r = task_result(rep, "antipodal_kashiwara")["result"];
            ok = ok && r["global"] == "0" && r["components"].empty();
            detail += "antipodal " + r["global"].get<std::string>() + "; ";
        }
    }
    line(7, ok && verified > 0, "Kashiwara residual 0 on the corpus", std::to_string(verified) + " verify tasks; " + detail);
}

void criterion8()
{
    GenerateParams gp;
    gp.count = 24;
    gp.seed = 8;
    ScenarioDoc doc = generate("noncharacteristic", gp);
    auto world = build_world(doc);
    int agree = 0, total = 0;
    std::set<std::string> coverage;
    for (const Block* b : world->tasks) {
        const SheafHom& h = world->hom(required(*b, "hom"));
        std::vector<ComponentData> data;
        for (const auto& v : as_list(required(*b, "models"))) {
            data.push_back(world->model(v));
        }
        LefschetzReport r = verify_kashiwara(h, data);
        for (const auto& c : r.components) {
            const StrategyResult* nc = nullptr;
            const StrategyResult* th = nullptr;
            for (const auto& s : c.strategies) {
                if (s.strategy == Strategy::NonCharacteristic) {
                    nc = &s;
                } else if (s.strategy == Strategy::Theta) {
                    th = &s;
                }
            }
            if (!nc || !nc->applicable) {
                continue;
            }
            ++total;
            agree += th && th->applicable && th->value == nc->value && c.strategies_agree && r.pass ? 1 : 0;
            for (const auto& d : data) {
                if (d.model.cells != c.component.cells) {
                    continue;
                }
                for (const auto& fm : d.model.fibers) {
                    const int n = fm.fan().dim();
                    coverage.insert(n % 2 ? "odd codimension" : "even codimension");
                    coverage.insert(sign_det_id_minus(fm.psi) > 0 ? "sgn +1" : "sgn -1");
                    auto cls = classify_spectrum(fm.psi);
                    if (cls.count(RootClass::RealInOpenUnit) == static_cast<std::size_t>(n)) {
                        coverage.insert("shrinking normal");
                    }
                    if (cls.count(RootClass::RealAboveOne) == static_cast<std::size_t>(n)) {
                        coverage.insert("expanding normal");
                    }
                }
            }
        }
    }
    std::string cov;
    for (const auto& c : coverage) {
        cov += c + ", ";
    }
    line(8, total >= 20 && agree == total && coverage.size() == 6, "non-characteristic strategy agrees with theta",
         std::to_string(agree) + "/" + std::to_string(total) + " components; " + cov);
}

void criterion9()
{
    GenerateParams gp;
    gp.count = 7;
    auto rep = report_json(run_scenario(emit_scenario(generate("microlocal", gp)), {}), false);
    int thetas = 0, good = 0;
    std::size_t min_f = 1000;
    std::set<std::string> spaces;
    for (const auto& t : rep["tasks"]) {
        if (t["kind"] != "pairing") {
            continue;
        }
        ++thetas;
        const auto& r = t["result"];
        bool ok = t["pass"] == true;
        for (const auto& [f, v] : r["pairings"].items()) {
            ok = ok && v == r["integral"];
        }
        min_f = std::min(min_f, r["pairings"].size());
        good += ok ? 1 : 0;
        spaces.insert(t["name"].get<std::string>().substr(0, 2));
    }
    bool cc_ok = true;
    for (const auto& t : rep["tasks"]) {
        if (t["kind"] == "cc") {
            cc_ok = cc_ok && t["pass"] == true;
        }
    }
    line(9, good == thetas && thetas >= 20 && min_f >= 5 && cc_ok && spaces.size() == 3,
         "index pairing f-independent and equal to the Euler integral",
         std::to_string(good) + "/" + std::to_string(thetas) + " functions, " + std::to_string(min_f) +
             " generic test functions each, on S1, S2 and a square");
}

void criterion10()
{
    Rng rng(10);
    int n = 0, good = 0;
    for (; n < 30; ++n) {
        FanCase c = random_fan_case(rng);
        auto cc = fan_case_cones(c);
        QMatrix psi = fan_case_psi(c);
        FlagProfile p;
        QMatrix t;
        std::size_t rank = static_cast<std::size_t>(uniform_int(rng, 2, 3));
        FiberModel f2 = random_flag_fiber(rng, cc, psi, rank, &p, &t);
        auto [sub, quo] = flag_split(p, static_cast<std::size_t>(uniform_int(rng, 1, static_cast<long>(rank) - 1)));
        FiberModel f1 = flag_fiber(cc, psi, sub, t);
        FiberModel f3 = flag_fiber(cc, psi, quo, t);
        good += theta_value(f2).value == theta_value(f1).value + theta_value(f3).value ? 1 : 0;
    }
    line(10, good == n && n >= 20, "additivity on short exact sequences",
         std::to_string(good) + "/" + std::to_string(n) + " sequences");
}

struct Malformed {
    std::string text;
    std::size_t line, col;
};

void criterion11()
{
    int files = 0, idem = 0;
    for (const auto& p : corpus()) {
        std::string text = slurp(p);
        ScenarioDoc d = parse_scenario(text);
        std::string once = emit_scenario(d);
        ScenarioDoc d2 = parse_scenario(once);
        ++files;
        idem += once == emit_scenario(d2) && equivalent(d, d2) && once == text ? 1 : 0;
    }
    const std::vector<Malformed> bad{
        {"begin compex X\nend\n", 1, 7},
        {"begin complex\nend\n", 1, 14},
        {"begin complex X\n  cell (a, 0)\nend\n", 2, 8},
        {"begin complex X\n  cell = (a, 0)\n", 3, 1},
        {"begin complex X\n  cell = (a, 0)\nend\nbegin function f\n  base = X\n  value = (a, 2/)\nend\n", 6, 17},
        {"begin complex X\n  cell = (\"a, 0)\nend\n", 2, 11},
        {"begin complex X\n  cell = (a, 0)\nend\nbegin complex X\n  cell = (b, 0)\nend\n", 4, 1},
        {"begin complex X\n  cell = (a, 0)\n  cell = (b, 1, [+a, -q])\nend\n", 3, 22},
        {"begin complex X\n  cell = (a, 0)\n  cell = (b, 0)\n  cell = (e, 1, [-a, +b])\nend\nbegin sheaf F\n  base = X\n"
         "  stalk = (a, 1)\n  stalk = (e, 1)\n  gen = (a, e, [[1, 0]])\nend\n",
         10, 16},
        {"begin complex X\n  cell = (a, 0)\n  colour = red\nend\n", 3, 3},
        {"begin complex X\n  cell = (a, 0)\nend\nbegin task t\n  kind = integrate\nend\n", 5, 10},
        {"begin complex X\n  cell = (a, 0) junk\nend\n", 2, 17},
    };
    int positioned = 0;
    for (const auto& m : bad) {
        try {
            run_scenario(m.text);
        } catch (const ScenarioError& e) {
            positioned += e.pos.line == m.line && e.pos.col == m.col ? 1 : 0;
        }
    }
    line(11, idem == files && files > 0 && positioned == static_cast<int>(bad.size()),
         "parser round trip and positioned errors",
         std::to_string(idem) + "/" + std::to_string(files) + " corpus files idempotent, " + std::to_string(positioned) +
             "/" + std::to_string(bad.size()) + " malformed inputs positioned");
}

}  // namespace

int main()
{
    const std::vector<std::function<void()>> steps{criterion1, criterion2, criteria3and4, criterion5, criterion6,
                                                   criterion7, criterion8, criterion9,    criterion10, criterion11};
    for (const auto& s : steps) {
        try {
            s();
        } catch (const std::exception& e) {
            std::cout << "FAIL (exception) " << e.what() << std::endl;
            ++failures;
        }
    }
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
