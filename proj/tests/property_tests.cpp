#include "lefkit/corpus.hpp"
#include "lefkit/runner.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

using namespace lefkit;

namespace {

std::uint64_t seed_for(int i) { return 0x5eed0000ULL + static_cast<std::uint64_t>(i); }

}  // namespace

TEST_CASE("global trace is consistent on cochains and cohomology")
{
    const int i = GENERATE(range(0, 25));
    Rng rng(seed_for(i));
    Simplicial s = random_simplicial(rng, 150, 3);
    const Complex& x = s.complex;
    FlagProfile p = random_profile(rng, x, static_cast<std::size_t>(uniform_int(rng, 1, 3)), identity_orbits(x));
    CellSheaf f = flag_sheaf(x, p);
    SheafHom h = flag_endo(f, p, random_upper(rng, p.rank));
    REQUIRE(validate_hom(h));
    auto sc = sections_complex(f, all_cells(x));
    auto tr = endo_trace(sc.complex, induced_endo(h, sc));
    CHECK(tr.consistent());
    CHECK(tr.cohomology_alternating == euler_integral_c(local_trace_function(h, all_cells(x).cells)));
}

TEST_CASE("trace on an open set equals the open Euler integral of stalk traces")
{
    const int i = GENERATE(range(0, 20));
    Rng rng(seed_for(100 + i));
    Simplicial s = random_simplicial(rng, 120, 3);
    const Complex& x = s.complex;
    FlagProfile p = random_profile(rng, x, 2, identity_orbits(x));
    CellSheaf f = flag_sheaf(x, p);
    SheafHom h = flag_endo(f, p, random_upper(rng, p.rank));
    auto u = star_of(x, {static_cast<CellId>(uniform_int(rng, 0, static_cast<long>(x.size()) - 1))});
    auto nc = open_sections_complex(f, u);
    auto nt = endo_trace(nc.complex, nerve_endo(h, nc));
    CHECK(nt.consistent());
    CHECK(nt.cohomology_alternating == euler_integral_open(local_trace_function(h, u), u));
}

TEST_CASE("localization routes agree and do not depend on the expanding subspace")
{
    const int i = GENERATE(range(0, 30));
    Rng rng(seed_for(200 + i));
    FanCase c = random_fan_case(rng);
    FiberModel m = build_fan_case(c);
    REQUIRE(validate_fiber(m));
    auto tv = theta_value(m);
    CHECK(tv.agree());
    auto subspaces = valid_expanding_subspaces(m);
    REQUIRE_FALSE(subspaces.empty());
    for (const auto& e : subspaces) {
        CHECK(theta_value(m, e).value == tv.value);
    }
    FanCase d = classification_equivalent(rng, c);
    CHECK(theta_value(build_fan_case(d)).value == tv.value);
}

TEST_CASE("theta is additive along flag filtrations")
{
    const int i = GENERATE(range(0, 25));
    Rng rng(seed_for(300 + i));
    FanCase c = random_fan_case(rng);
    auto cc = fan_case_cones(c);
    QMatrix psi = fan_case_psi(c);
    FlagProfile p;
    QMatrix t;
    const std::size_t rank = 3;
    FiberModel whole = random_flag_fiber(rng, cc, psi, rank, &p, &t);
    for (std::size_t j = 1; j < rank; ++j) {
        auto [sub, quo] = flag_split(p, j);
        CHECK(theta_value(whole).value ==
              theta_value(flag_fiber(cc, psi, sub, t)).value + theta_value(flag_fiber(cc, psi, quo, t)).value);
    }
}

TEST_CASE("characteristic cycle matches the closed form and the pairing is f-independent")
{
    const int i = GENERATE(range(0, 15));
    Rng rng(seed_for(400 + i));
    Simplicial s = i % 3 == 0 ? circle(static_cast<std::size_t>(uniform_int(rng, 3, 7)))
                              : i % 3 == 1 ? octahedron() : path(static_cast<std::size_t>(uniform_int(rng, 1, 4)));
    const Complex& x = s.complex;
    auto th = ConstructibleFunction::zero(x);
    for (CellId c = 0; c < x.size(); ++c) {
        th.value[c] = Q(uniform_int(rng, -3, 3));
    }
    CHECK(cc_of_function(th).multiplicity == cc_closed_form(th).multiplicity);
    const Q integral = euler_integral_c(th);
    int generic = 0;
    for (int k = 0; k < 12 && generic < 5; ++k) {
        std::vector<Q> xi;
        for (std::size_t a = 0; a < x.coordinates().begin()->second.size(); ++a) {
            xi.push_back(random_rational(rng, 9, 7));
        }
        TestFunction f = linear_test_function(x, xi);
        if (!certify_generic(f)) {
            continue;
        }
        ++generic;
        CHECK(index_pairing(th, f) == integral);
    }
    CHECK(generic >= 3);
}

TEST_CASE("Euler integration is linear")
{
    const int i = GENERATE(range(0, 15));
    Rng rng(seed_for(500 + i));
    Simplicial s = random_simplicial(rng, 100, 3);
    const Complex& x = s.complex;
    auto a = ConstructibleFunction::zero(x);
    auto b = ConstructibleFunction::zero(x);
    for (CellId c = 0; c < x.size(); ++c) {
        a.value[c] = random_rational(rng);
        b.value[c] = random_rational(rng);
    }
    const Q l = random_rational(rng);
    auto comb = ConstructibleFunction::zero(x);
    for (CellId c = 0; c < x.size(); ++c) {
        comb.value[c] = a.value[c] + l * b.value[c];
    }
    CHECK(euler_integral_c(comb) == euler_integral_c(a) + l * euler_integral_c(b));
}

TEST_CASE("generated documents round-trip and keep their hash")
{
    const auto& names = GENERATE(from_range(std::vector<std::string>{"identity", "circle_reflection", "line_trio",
                                                                     "toric", "fan_suite", "microlocal",
                                                                     "noncharacteristic", "products", "sphere"}));
    const std::uint64_t seed = GENERATE(1ULL, 17ULL);
    GenerateParams gp;
    gp.seed = seed;
    gp.count = 3;
    std::string once = emit_scenario(generate(names, gp));
    ScenarioDoc back = parse_scenario(once);
    CHECK(emit_scenario(back) == once);
    CHECK(fnv1a_hex(emit_scenario(back)) == fnv1a_hex(once));
    REQUIRE_NOTHROW(build_world(back));
}

TEST_CASE("mutated documents either parse or fail with a position inside the text")
{
    const int i = GENERATE(range(0, 40));
    Rng rng(seed_for(600 + i));
    std::string text = emit_scenario(generate("circle_reflection"));
    const std::string junk = "()[]=,#\"+-/ \nbeginend";
    for (int k = 0; k < 3; ++k) {
        auto at = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(text.size()) - 1));
        if (uniform_int(rng, 0, 1) == 0) {
            text.erase(at, 1);
        } else {
            text.insert(at, 1, junk[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(junk.size()) - 1))]);
        }
    }
    const std::size_t lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
    try {
        auto rep = run_scenario(text);
        SUCCEED();
        (void)rep;
    } catch (const ScenarioError& e) {
        CHECK(e.pos.line >= 1);
        CHECK(e.pos.line <= lines);
        CHECK(e.pos.col >= 1);
    }
}

TEST_CASE("thread count does not change results")
{
    std::string text = emit_scenario(generate("fan_suite", GenerateParams{2, 5, 4}));
    setenv("LEFKIT_THREADS", "1", 1);
    json one = report_json(run_scenario(text), false);
    setenv("LEFKIT_THREADS", "4", 1);
    json four = report_json(run_scenario(text), false);
    unsetenv("LEFKIT_THREADS");
    CHECK(one == four);
}
