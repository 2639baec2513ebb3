#include "lefkit/corpus.hpp"
#include "lefkit/runner.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <complex>

using namespace lefkit;

namespace {

Eigen::MatrixXd to_eigen(const QMatrix& m)
{
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j).convert_to<double>();
        }
    }
    return e;
}

QMatrix random_int_matrix(Rng& rng, std::size_t r, std::size_t c, long lo = -3, long hi = 3)
{
    QMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            m(i, j) = uniform_int(rng, lo, hi);
        }
    }
    return m;
}

long eigen_rank(const QMatrix& m)
{
    if (m.rows() == 0 || m.cols() == 0) {
        return 0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(m));
    lu.setThreshold(1e-9);
    return lu.rank();
}

CellularMap flip_map(const Complex& x, std::vector<CellId> image, std::vector<int> sign)
{
    CellularMap m = CellularMap::identity(x);
    m.image = std::move(image);
    m.sign = std::move(sign);
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------------------
// linalgq

TEST_CASE("rational text round trip")
{
    for (std::string s : {"0", "-3", "7/2", "-12/5", "123456789012345678901234567891/7"}) {
        auto q = parse_rational(s);
        REQUIRE(q);
        CHECK(to_string(*q) == s);
    }
    CHECK_FALSE(parse_rational("2/"));
    CHECK_FALSE(parse_rational("1/0"));
    CHECK_FALSE(parse_rational("x"));
    CHECK(to_string(*parse_rational("4/6")) == "2/3");
}

TEST_CASE("rank, determinant and inverse agree with a floating oracle")
{
    Rng rng(11);
    for (int t = 0; t < 60; ++t) {
        std::size_t r = static_cast<std::size_t>(uniform_int(rng, 1, 6));
        std::size_t c = static_cast<std::size_t>(uniform_int(rng, 1, 6));
        QMatrix m = random_int_matrix(rng, r, c);
        if (t % 3 == 0 && r > 1) {
            for (std::size_t j = 0; j < c; ++j) {
                m(r - 1, j) = m(0, j) * 2 - m(1 % r, j);  // force a dependency
            }
        }
        CHECK(static_cast<long>(rank(m)) == eigen_rank(m));
        QMatrix k = kernel_basis(m);
        CHECK(k.cols() == c - rank(m));
        CHECK((m * k).is_zero());
        if (r == c) {
            double d = to_eigen(m).determinant();
            CHECK(determinant(m).convert_to<double>() == Catch::Approx(d).margin(1e-6));
            auto inv = inverse(m);
            CHECK(inv.has_value() == !is_zero(determinant(m)));
            if (inv) {
                CHECK(m * *inv == QMatrix::identity(r));
            }
        }
    }
}

TEST_CASE("solve finds exact solutions")
{
    Rng rng(12);
    for (int t = 0; t < 30; ++t) {
        QMatrix a = random_int_matrix(rng, 4, 3);
        std::vector<Q> x{random_rational(rng), random_rational(rng), random_rational(rng)};
        auto b = a.apply(x);
        auto s = solve(a, b);
        REQUIRE(s);
        CHECK(a.apply(*s) == b);
    }
}

// ---------------------------------------------------------------------------------------
// spectrum

TEST_CASE("squarefree decomposition and rational roots")
{
    Poly p = Poly::linear_root(2) * Poly::linear_root(2) * Poly::linear_root(Q(-1, 3)) * Poly({1, 0, 1});
    auto roots = rational_roots(p);
    std::sort(roots.begin(), roots.end());
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == Q(-1, 3));
    CHECK(roots[1] == 2);
    CHECK(root_multiplicity(p, 2) == 2);
    unsigned total = 0;
    for (const auto& part : squarefree_decomposition(p)) {
        total += part.multiplicity * static_cast<unsigned>(part.factor.degree());
    }
    CHECK(total == 5);
}

TEST_CASE("Sturm counts match numerical roots")
{
    Rng rng(13);
    for (int t = 0; t < 40; ++t) {
        QMatrix m = random_int_matrix(rng, 4, 4);
        Poly p = characteristic_polynomial(m);
        Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m));
        std::size_t real_pos = 0;
        bool near_boundary = false;
        std::set<long> seen;
        for (const auto& l : es.eigenvalues()) {
            if (std::abs(l.imag()) < 1e-7) {
                near_boundary |= std::abs(l.real()) < 1e-6;
                if (l.real() > 1e-6) {
                    ++real_pos;
                }
            }
        }
        if (near_boundary) {
            continue;
        }
        CHECK(count_roots_open_mult(p, Q(0), std::nullopt) == real_pos);
    }
}

TEST_CASE("spectral classification matches a floating eigenvalue oracle")
{
    Rng rng(14);
    int checked = 0;
    for (int t = 0; t < 150 && checked < 60; ++t) {
        std::size_t n = static_cast<std::size_t>(uniform_int(rng, 2, 4));
        QMatrix m = random_int_matrix(rng, n, n, -2, 2) * Q(1, static_cast<long>(uniform_int(rng, 1, 3)));
        Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m));
        std::array<std::size_t, kRootClassCount> want{};
        bool ambiguous = false;
        for (const auto& l : es.eigenvalues()) {
            const double re = l.real(), im = l.imag(), mod = std::abs(l);
            RootClass c;
            if (std::abs(im) < 1e-6) {
                if (std::abs(re - 1) < 1e-6 || std::abs(re) < 1e-6) {
                    ambiguous = true;
                }
                c = re > 1 ? RootClass::RealAboveOne : re > 0 ? RootClass::RealInOpenUnit : RootClass::RealNonPositive;
            } else {
                if (std::abs(mod - 1) < 1e-6 || std::abs(im) < 1e-4) {
                    ambiguous = true;
                }
                c = mod > 1 ? RootClass::ComplexOutside : RootClass::ComplexInside;
            }
            ++want[static_cast<std::size_t>(c)];
        }
        if (ambiguous) {
            continue;
        }
        ++checked;
        auto cls = classify_spectrum(m);
        for (std::size_t c = 0; c < kRootClassCount; ++c) {
            CHECK(cls.count(static_cast<RootClass>(c)) == want[c]);
        }
    }
    CHECK(checked >= 30);
}

TEST_CASE("unit circle boundary cases are exact")
{
    auto rot = classify_spectrum(QMatrix{{0, -1}, {1, 0}});
    CHECK(rot.count(RootClass::OnUnitCircle) == 2);
    auto one = classify_spectrum(QMatrix{{1, 1}, {0, 1}});
    CHECK(one.count(RootClass::EqualsOne) == 2);
    CHECK(one.has_eigenvalue_one());
    auto minus = classify_spectrum(QMatrix{{-1}});
    CHECK(minus.count(RootClass::RealNonPositive) == 1);
    auto zero = classify_spectrum(QMatrix{{0, 1}, {0, 0}});
    CHECK(zero.has_zero_eigenvalue());
}

// ---------------------------------------------------------------------------------------
// poset_complex

TEST_CASE("boundary squares to zero and Betti numbers match a floating rank oracle")
{
    Rng rng(15);
    for (int t = 0; t < 25; ++t) {
        Simplicial s = random_simplicial(rng, 120, 3);
        const Complex& x = s.complex;
        REQUIRE(validate_complex(x));
        long chi = 0;
        CellSheaf f = constant_sheaf(x, 1);
        auto h = cohomology(sections_complex(f, all_cells(x)).complex);
        for (int k = 0; k <= x.max_dim(); ++k) {
            QMatrix dk = boundary_matrix(x, k);
            if (k + 1 <= x.max_dim()) {
                QMatrix dk1 = boundary_matrix(x, k + 1);
                if (dk.cols() > 0 && dk1.cols() > 0 && dk.rows() > 0) {
                    CHECK((dk * dk1).is_zero());
                }
            }
            long nk = static_cast<long>(x.cells_of_dim(k).size());
            long betti = nk - eigen_rank(boundary_matrix(x, k)) - (k + 1 <= x.max_dim() ? eigen_rank(boundary_matrix(x, k + 1)) : 0);
            CHECK(static_cast<long>(h.dim(k)) == betti);
            chi += k % 2 == 0 ? betti : -betti;
        }
        CHECK(chi == x.euler_characteristic());
    }
}

TEST_CASE("validation rejects bad incidences")
{
    Complex x;
    x.add_cell("a", 0);
    x.add_cell("b", 0);
    x.add_cell("e", 1, std::vector<std::pair<std::string, int>>{{"a", 1}, {"b", 1}});
    CHECK_FALSE(validate_complex(x));
    CHECK_THROWS_AS(x.add_cell("a", 0), Error);
    CHECK_THROWS(x.id("missing"));
}

TEST_CASE("closure, star and set kinds")
{
    Simplicial s = circle(4);
    const Complex& x = s.complex;
    CellId v0 = s.index.at({0});
    auto st = star(x, v0);
    CHECK(st.cells.size() == 3);
    CHECK(is_open(x, st.cells));
    CHECK(is_closed(x, closure(x, v0).cells));
    CHECK_FALSE(is_open(x, {v0}));
    CHECK_THROWS(make_set(x, {v0}, SetKind::Open));
    CHECK(chi_c(x, st) == -1);
}

TEST_CASE("pointwise fixed cells exclude moving cells")
{
    auto cc = line_cones();
    FiberModel fm = line_fiber(2, LineSheaf::Whole);
    auto cf = compactify_fiber(fm);
    auto fixed = pointwise_fixed_cells(cf->hom.map);
    CHECK(fixed.size() == 3);  // origin and two points at infinity
    CHECK(invariant_unfixed_cells(cf->hom.map).empty());
}

// ---------------------------------------------------------------------------------------
// sheaf_algebra

TEST_CASE("compactly supported cohomology of standard sets")
{
    Simplicial s = path(3);
    const Complex& x = s.complex;
    CellSheaf f = constant_sheaf(x, 1);
    // open interior: H^1_c = 1
    std::vector<CellId> interior;
    for (CellId c = 0; c < x.size(); ++c) {
        if (x.name(c) != "p0" && x.name(c) != "p3") {
            interior.push_back(c);
        }
    }
    auto h = cohomology(sections_complex(f, make_set(x, interior, SetKind::Open)).complex);
    CHECK(h.dim(0) == 0);
    CHECK(h.dim(1) == 1);
    auto whole = cohomology(sections_complex(f, all_cells(x)).complex);
    CHECK(whole.dim(0) == 1);
    CHECK(whole.dim(1) == 0);
}

TEST_CASE("rank-nullity dimensions agree with the complement construction")
{
    Rng rng(16);
    for (int t = 0; t < 20; ++t) {
        Simplicial s = random_simplicial(rng, 80, 2);
        FlagProfile p = random_profile(rng, s.complex, 3, identity_orbits(s.complex));
        CellSheaf f = flag_sheaf(s.complex, p);
        REQUIRE(validate_sheaf(f));
        auto sc = sections_complex(f, all_cells(s.complex));
        CHECK(cohomology(sc.complex).dims() == cohomology_dims_rank_nullity(sc.complex));
    }
}

TEST_CASE("nerve model computes ordinary cohomology of an open set")
{
    Simplicial s = circle(5);
    const Complex& x = s.complex;
    CellSheaf f = constant_sheaf(x, 1);
    std::vector<CellId> all(x.size());
    std::iota(all.begin(), all.end(), 0);
    auto nc = open_sections_complex(f, all);
    auto h = cohomology(nc.complex);
    CHECK(h.dim(0) == 1);
    CHECK(h.dim(1) == 1);
    auto st = star_of(x, {s.index.at({0}), s.index.at({2})});
    auto hs = cohomology(open_sections_complex(f, st).complex);
    CHECK(hs.dim(0) == 2);
    CHECK(hs.dim(1) == 0);
}

TEST_CASE("reflection trace on the circle")
{
    Complex c;
    c.add_cell("a", 0);
    c.add_cell("b", 0);
    c.add_cell("e1", 1, std::vector<std::pair<std::string, int>>{{"a", -1}, {"b", 1}});
    c.add_cell("e2", 1, std::vector<std::pair<std::string, int>>{{"b", -1}, {"a", 1}});
    CellSheaf f = constant_sheaf(c, 1);
    SheafHom h = SheafHom::identity(f);
    h.map = flip_map(c, {0, 1, 3, 2}, {1, 1, -1, -1});
    REQUIRE(validate_hom(h));
    auto sc = sections_complex(f, all_cells(c));
    auto tr = endo_trace(sc.complex, induced_endo(h, sc));
    CHECK(tr.cohomology_alternating == 2);
    CHECK(tr.cochain_alternating == 2);
    SheafHom wrong = h;
    wrong.map.sign = {1, 1, 1, -1};
    CHECK_FALSE(validate_hom(wrong));
}

TEST_CASE("shifted cone of an isomorphism is acyclic")
{
    Simplicial s = path(2);
    CellSheaf f = constant_sheaf(s.complex, 2);
    auto sc = sections_complex(f, all_cells(s.complex));
    ChainMap id;
    id.source = &sc.complex;
    id.target = &sc.complex;
    id.lo = sc.complex.lo;
    for (auto d : sc.complex.dims) {
        id.components.push_back(QMatrix::identity(d));
    }
    auto cone = shifted_cone(sc.complex, sc.complex, id);
    for (auto d : cohomology(cone).dims()) {
        CHECK(d == 0);
    }
}

// ---------------------------------------------------------------------------------------
// euler_calculus

TEST_CASE("Euler integrals")
{
    Simplicial s = octahedron();
    const Complex& x = s.complex;
    CHECK(euler_integral_c(ConstructibleFunction::constant(x, 1)) == 2);
    CHECK(euler_integral_c(ConstructibleFunction::constant(x, Q(3, 2))) == 3);
    CellId v = s.index.at({0});
    auto st = star_of(x, {v});
    auto ind = ConstructibleFunction::indicator(x, st);
    CHECK(euler_integral_c(ind) == 1);  // open disk
    CHECK(euler_integral_open(ConstructibleFunction::constant(x, 1), st) == 1);
    auto a = ConstructibleFunction::indicator(x, {v}, 5);
    auto b = ConstructibleFunction::indicator(x, st, -1);
    CHECK(euler_integral_c(a + b) == euler_integral_c(a) + euler_integral_c(b));
}

TEST_CASE("open Euler integral matches nerve cohomology of the constant sheaf")
{
    Rng rng(17);
    for (int t = 0; t < 20; ++t) {
        Simplicial s = random_simplicial(rng, 100, 3);
        const Complex& x = s.complex;
        auto u = star_of(x, {static_cast<CellId>(uniform_int(rng, 0, static_cast<long>(x.size()) - 1)),
                              static_cast<CellId>(uniform_int(rng, 0, static_cast<long>(x.size()) - 1))});
        CellSheaf f = constant_sheaf(x, 1);
        auto h = cohomology(open_sections_complex(f, u).complex);
        CHECK(Q(h.euler_characteristic()) == euler_integral_open(ConstructibleFunction::constant(x, 1), u));
    }
}

// ---------------------------------------------------------------------------------------
// hyploc

TEST_CASE("line models agree with the direct oracle")
{
    for (Q lambda : {Q(2), Q(1, 2), Q(3), Q(1, 5)}) {
        for (LineSheaf kind : {LineSheaf::Whole, LineSheaf::ClosedHalf, LineSheaf::OpenHalf}) {
            FiberModel m = line_fiber(lambda, kind);
            REQUIRE(validate_fiber(m));
            auto tv = theta_value(m);
            CHECK(tv.agree());
            CHECK(tv.value == line_oracle(m).theta_origin);
        }
    }
    CHECK(theta_value(line_fiber(2, LineSheaf::ClosedHalf)).value == 0);
    CHECK(theta_value(line_fiber(2, LineSheaf::OpenHalf)).value == -1);
    CHECK(theta_value(line_fiber(Q(1, 2), LineSheaf::ClosedHalf)).value == 1);
}

TEST_CASE("expanding subspace conditions")
{
    QMatrix psi{{2, 0}, {0, Q(1, 2)}};
    QMatrix e1 = QMatrix::from_columns({{1, 0}});
    QMatrix e2 = QMatrix::from_columns({{0, 1}});
    CHECK(validate_expanding(psi, e1).ok);
    CHECK_FALSE(validate_expanding(psi, e2).ok);
    CHECK(validate_shrinking(psi, e2).ok);
    CHECK(same_subspace(minimal_expanding(psi), e1));
    CHECK(same_subspace(minimal_shrinking(psi), e2));
}

TEST_CASE("sector fans rotate onto themselves")
{
    for (int k : {2, 3, 4, 6}) {
        SectorFan s = sector_fan(k);
        REQUIRE(check_complete(s.cones->fan));
        auto act = map_image_check(s.rotation, s.cones->fan);
        CHECK(act.ok);
    }
    CHECK_THROWS(lattice_rotation(5));
}

// ---------------------------------------------------------------------------------------
// microlocal

TEST_CASE("characteristic cycle and index pairing on a square")
{
    Simplicial a = path(2);
    Simplicial b = path(1);
    ProductComplex sq = realized_product(a.complex, b.complex);
    auto th = ConstructibleFunction::zero(sq.complex);
    for (CellId c = 0; c < sq.complex.size(); ++c) {
        th.value[c] = static_cast<long>(c % 3) - 1;
    }
    auto cc = cc_of_function(th);
    CHECK(cc.multiplicity == cc_closed_form(th).multiplicity);
    for (auto xi : std::vector<std::vector<Q>>{{1, Q(1, 3)}, {-2, 1}, {Q(1, 5), -1}}) {
        TestFunction f = linear_test_function(sq.complex, xi);
        REQUIRE(certify_generic(f));
        CHECK(index_pairing(th, f) == euler_integral_c(th));
    }
    TestFunction flat = linear_test_function(sq.complex, {0, 1});
    CHECK_FALSE(certify_generic(flat));
}

TEST_CASE("sheaf Morse index equals the function index")
{
    Simplicial s = circle(5);
    CellSheaf f = constant_sheaf(s.complex, 2);
    SheafHom h = SheafHom::identity(f, Q(3));
    TestFunction g = linear_test_function(s.complex, {1, Q(1, 7)});
    REQUIRE(certify_generic(g));
    auto trace = ConstructibleFunction::constant(s.complex, 6);
    for (std::size_t v = 0; v < 5; ++v) {
        CellId c = s.index.at({v});
        CHECK(morse_local_index_sheaf(h, c, g) == morse_local_index(trace, c, g));
    }
}

// ---------------------------------------------------------------------------------------
// lefschetz_engine

TEST_CASE("Kashiwara identity on the reflected circle")
{
    auto rep = run_scenario(emit_scenario(generate("circle_reflection")));
    CHECK(rep.pass);
}

TEST_CASE("components without a usable strategy are reported")
{
    Simplicial s = circle(4);
    CellSheaf f = constant_sheaf(s.complex, 1);
    SheafHom h = SheafHom::identity(f);
    h.map = simplicial_map(s, {0, 3, 2, 1});
    auto r = verify_kashiwara(h, {});
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.errors.empty());
}

TEST_CASE("product with a compactified quadrant")
{
    Simplicial i = path(1);
    CellSheaf fb = constant_sheaf(i.complex, 1);
    SheafHom hb = SheafHom::identity(fb, Q(3));
    auto quad = make_cone_complex(orthant_fan(2));
    std::vector<bool> positive;
    for (const auto& c : quad->fan.cones()) {
        positive.push_back(std::all_of(c.begin(), c.end(), [](auto r) { return r % 2 == 0; }));
    }
    FiberModel fm = indicator_fiber(quad, QMatrix{{2, 0}, {0, 3}}, positive);
    auto cfb = compactify_fiber(fm);
    auto p = product(i.complex, cfb->cf.complex);
    p.complex.finalize();
    CellSheaf f = product_sheaf(p, fb, cfb->sheaf);
    SheafHom h = product_hom(p, f, hb, cfb->hom);
    auto r = verify_kashiwara(h, product_component_data(p, hb, fm, *cfb));
    CHECK(r.pass);
    CHECK(r.residual == 0);
}

// ---------------------------------------------------------------------------------------
// scenario_io

TEST_CASE("parser accepts comments, quoting and multi-line lists")
{
    const char* text = "# header\nbegin complex X   # trailing\n  cell = (\"a b\", 0)\n  cell = (c, 0)\n"
                       "  cell = (e, 1, [\n    -\"a b\",\n    +c])\nend\n";
    ScenarioDoc d = parse_scenario(text);
    REQUIRE(d.blocks.size() == 1);
    auto w = build_world(d);
    const Complex& x = *w->complexes.at("X");
    CHECK(x.has("a b"));
    CHECK(x.incidence(x.id("a b"), x.id("e")) == -1);
    std::string once = emit_scenario(d);
    CHECK(emit_scenario(parse_scenario(once)) == once);
    CHECK(equivalent(d, parse_scenario(once)));
}

TEST_CASE("canonical form ignores field order")
{
    ScenarioDoc a = parse_scenario("begin task t\n  kind = euler\n  complex = X\nend\n");
    ScenarioDoc b = parse_scenario("begin task t\n  complex = X\n  kind = euler\nend\n");
    CHECK(equivalent(a, b));
    CHECK(fnv1a_hex(emit_scenario(a)) == fnv1a_hex(emit_scenario(b)));
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("semantic errors carry positions")
{
    try {
        build_world(parse_scenario("begin complex X\n  cell = (a, 0)\nend\nbegin sheaf F\n  base = Y\nend\n"));
        FAIL("no error");
    } catch (const ScenarioError& e) {
        CHECK(e.pos.line == 5);
        CHECK(e.pos.col == 10);
    }
}
