#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "geofinlab/boundary.hpp"
#include "geofinlab/lorentz.hpp"
#include "geofinlab/mat2.hpp"
#include "geofinlab/rng.hpp"

using namespace geofinlab::geo;
using geofinlab::Rng;

namespace {

double mat2_diff(const Mat2r& a, const Mat2r& b) {
    return std::max(std::max(std::abs(a.a - b.a), std::abs(a.b - b.b)),
                    std::max(std::abs(a.c - b.c), std::abs(a.d - b.d)));
}

double mat2c_diff(const Mat2c& a, const Mat2c& b) {
    return std::max(std::max(std::abs(a.a - b.a), std::abs(a.b - b.b)),
                    std::max(std::abs(a.c - b.c), std::abs(a.d - b.d)));
}

double herm_diff(const Herm& a, const Herm& b) {
    return std::max(std::abs(a.p - b.p), std::max(std::abs(a.r - b.r), std::abs(a.q - b.q)));
}

double vec4_diff(const Vec4& a, const Vec4& b) {
    double m = 0.0;
    for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Random SL2(C): fix three Gaussian entries, solve for d.  The first entry is
// redrawn away from zero so the division stays well conditioned.
Mat2c random_sl2c(Rng& rng) {
    cplx a{rng.normal(), rng.normal()};
    while (std::abs(a) < 0.5) a = {rng.normal(), rng.normal()};
    cplx b{0.5 * rng.normal(), 0.5 * rng.normal()};
    cplx c{0.5 * rng.normal(), 0.5 * rng.normal()};
    cplx d = (cplx(1.0) + b * c) / a;
    return {a, b, c, d};
}

// Random SU(2) from a Gaussian pair normalized to the unit sphere.
Mat2c random_su2(Rng& rng) {
    cplx a{rng.normal(), rng.normal()};
    cplx b{rng.normal(), rng.normal()};
    double n = std::sqrt(std::norm(a) + std::norm(b));
    while (n < 1e-3) {
        a = {rng.normal(), rng.normal()};
        b = {rng.normal(), rng.normal()};
        n = std::sqrt(std::norm(a) + std::norm(b));
    }
    a /= n;
    b /= n;
    return {a, -std::conj(b), b, std::conj(a)};
}

}  // namespace

TEST_CASE("cross ratio: values, infinity, invariance") {
    // (a-c)(b-d) / ((a-d)(b-c)) at (1,2,3,4): (-2)(-2) / ((-3)(-1)) = 4/3.
    CHECK(cross_ratio(1.0, 2.0, 3.0, 4.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    // One infinite argument cancels its two factors: [0,1;2,inf] = (0-2)/(1-2).
    CHECK(cross_ratio(0.0, 1.0, 2.0, BoundaryPoint::inf()) == doctest::Approx(2.0));
    CHECK(cross_ratio(BoundaryPoint::inf(), 1.0, 2.0, 4.0) ==
          doctest::Approx((1.0 - 4.0) / (1.0 - 2.0)));

    const RealMobius g{2.0, 1.0, 1.0, 1.0};  // det = 1
    const BoundaryPoint pts[4] = {0.3, 1.7, -2.5, 4.1};
    double before = cross_ratio(pts[0], pts[1], pts[2], pts[3]);
    double after = cross_ratio(mobius(g, pts[0]), mobius(g, pts[1]), mobius(g, pts[2]),
                               mobius(g, pts[3]));
    CHECK(std::abs(after - before) <= 1e-12);

    CHECK_THROWS_AS(cross_ratio(1.0, 1.0, 2.0, 3.0), std::domain_error);
    CHECK_THROWS_AS(
        cross_ratio(BoundaryPoint::inf(), BoundaryPoint::inf(), 2.0, 3.0),
        std::domain_error);
}

TEST_CASE("mobius action on boundary points") {
    const RealMobius g{2.0, 1.0, 1.0, 1.0};
    CHECK(mobius(g, BoundaryPoint(0.0)).v == doctest::Approx(1.0));
    CHECK(mobius(g, BoundaryPoint::inf()).v == doctest::Approx(2.0));  // a/c
    CHECK(mobius(g, BoundaryPoint(-1.0)).infinite);                    // pole at -d/c
    CHECK_THROWS_AS(mobius(RealMobius{1.0, 2.0, 2.0, 4.0}, BoundaryPoint(0.0)),
                    std::domain_error);
    // Complex overload keeps the upper half plane for det > 0.
    std::complex<double> z = mobius(g, std::complex<double>(0.0, 1.0));
    CHECK(z.imag() > 0.0);
}

TEST_CASE("line distance: concentric and vertical closed forms") {
    // Concentric semicircles of radii 1 and R meet the imaginary axis at i
    // and Ri; the distance along that common perpendicular is log R.
    for (double r : {2.0, 9.0, 150.0}) {
        auto res = line_distance({-1.0, 1.0}, {-r, r});
        REQUIRE_FALSE(res.degenerate);
        CHECK(res.distance == doctest::Approx(std::log(r)).epsilon(1e-12));
    }

    // Vertical line {0, inf} against the semicircle over (p, q):
    // cosh d = (q+p)/(q-p), here (2+1)/(2-1) = 3.
    auto vert = line_distance({BoundaryPoint(0.0), BoundaryPoint::inf()}, {1.0, 2.0});
    REQUIRE_FALSE(vert.degenerate);
    CHECK(vert.distance == doctest::Approx(std::acosh(3.0)).epsilon(1e-12));

    // Distance ignores endpoint labeling.
    auto flipped = line_distance({BoundaryPoint::inf(), BoundaryPoint(0.0)}, {2.0, 1.0});
    CHECK(flipped.distance == doctest::Approx(vert.distance).epsilon(1e-14));

    // Mobius invariance.
    const RealMobius g{3.0, 1.0, 2.0, 1.0};
    GeodesicLine l1{-1.0, 1.0}, l2{-9.0, 9.0};
    auto moved = line_distance({mobius(g, l1.x), mobius(g, l1.y)},
                               {mobius(g, l2.x), mobius(g, l2.y)});
    CHECK(moved.distance == doctest::Approx(std::log(9.0)).epsilon(1e-9));
}

TEST_CASE("line distance: degenerate configurations") {
    CHECK(line_distance({0.0, 2.0}, {1.0, 3.0}).degenerate);  // interleaved: crossing
    CHECK(line_distance({0.0, 1.0}, {1.0, 2.0}).degenerate);  // shared endpoint
    auto crossing = line_distance({-1.0, 1.0}, {BoundaryPoint(0.0), BoundaryPoint::inf()});
    CHECK(crossing.degenerate);
    CHECK(crossing.distance == 0.0);
}

TEST_CASE("kan factors reconstruct and recover") {
    // g = k a(t) u(s) with the factors chosen up front.
    const double theta = 0.3, t = 0.6, s = -0.8;
    Mat2r g = rotation(theta) * diag_flow(t) * unipotent(s);
    auto f = qr_decompose(g);
    CHECK(f.t == doctest::Approx(t).epsilon(1e-12));
    CHECK(f.s == doctest::Approx(s).epsilon(1e-12));
    CHECK(mat2_diff(f.k, rotation(theta)) <= 1e-12);
    CHECK(mat2_diff(f.k * diag_flow(f.t) * unipotent(f.s), g) <= 1e-12);

    // Complex case: reconstruction and special-unitary k.
    Rng rng(7001, 0);
    for (int i = 0; i < 50; ++i) {
        Mat2c m = random_sl2c(rng);
        auto fc = qr_decompose(m);
        CHECK(mat2c_diff(fc.k * diag_flow<cplx>(fc.t) * unipotent(fc.s), m) <= 1e-9);
        Mat2c kk = fc.k.conj_transpose() * fc.k;
        CHECK(mat2c_diff(kk, Mat2c::identity()) <= 1e-12);
    }

    CHECK_THROWS_AS(qr_decompose(Mat2r{2.0, 0.0, 0.0, 2.0}), std::domain_error);
}

TEST_CASE("siegel height reads the flow coordinate") {
    // h = k a(-t) u(s) has first column of norm e^{-t/2}, so height t/2.
    Mat2r h = rotation(0.4) * diag_flow(-0.6) * unipotent(1.3);
    CHECK(siegel_height(h) == doctest::Approx(0.3).epsilon(1e-12));
    // Right-invariant under upper triangulars with unit diagonal.
    CHECK(siegel_height(h * unipotent(17.0)) == doctest::Approx(siegel_height(h)));
    CHECK_THROWS_AS(siegel_height(Mat2r{0.0, 1.0, 0.0, 1.0}), std::domain_error);
}

TEST_CASE("hermitian basis matches the quadratic form") {
    Vec4 v{{0.3, -1.2, 0.7, 2.5}};
    Herm a = herm_from_coords(v);
    // Basis I, diag(1,-1), [[0,1],[1,0]], [[0,i],[-i,0]]:
    CHECK(a.p == doctest::Approx(v[0] + v[1]));
    CHECK(a.r == doctest::Approx(v[0] - v[1]));
    CHECK(a.q.real() == doctest::Approx(v[2]));
    CHECK(a.q.imag() == doctest::Approx(v[3]));
    CHECK(a.det() == doctest::Approx(v.q()).epsilon(1e-14));
    CHECK(vec4_diff(coords_from_herm(a), v) <= 1e-14);

    Herm w0 = w0_matrix();
    CHECK(w0.p == 0.0);
    CHECK(w0.r == 0.0);
    CHECK(std::abs(w0.q - cplx(0.0, 1.0)) <= 1e-15);
    CHECK(w0.det() == doctest::Approx(-1.0));
}

TEST_CASE("hermitian action: stabilizer, composition, determinant") {
    Rng rng(7002, 0);
    // SL2(R) fixes the w0 matrix.
    Mat2r real_g = rotation(0.7) * diag_flow(1.1) * unipotent(-2.0);
    Herm moved = hermitian_action(to_complex(real_g), w0_matrix());
    CHECK(herm_diff(moved, w0_matrix()) <= 1e-12);

    for (int i = 0; i < 50; ++i) {
        Mat2c g1 = random_sl2c(rng), g2 = random_sl2c(rng);
        Vec4 v{{rng.normal(), rng.normal(), rng.normal(), rng.normal()}};
        Herm a = herm_from_coords(v);
        // Group action: g1.(g2.A) = (g1 g2).A.
        Herm lhs = hermitian_action(g1, hermitian_action(g2, a));
        Herm rhs = hermitian_action(g1 * g2, a);
        CHECK(herm_diff(lhs, rhs) <= 1e-8 * std::max(1.0, std::abs(a.det())));
        // det is Q, and the action preserves it.
        CHECK(std::abs(hermitian_action(g1, a).det() - a.det()) <=
              1e-8 * std::max(1.0, std::abs(a.det())));
    }
    CHECK_THROWS_AS(hermitian_action(Mat2c{2.0, 0.0, 0.0, 2.0}, w0_matrix()),
                    std::domain_error);
}

TEST_CASE("lorentz matrix of an SL2(C) element") {
    Rng rng(7003, 0);
    CHECK(vec4_diff(lorentz_of(Mat2c::identity()) * base_point(), base_point()) <= 1e-14);
    for (int i = 0; i < 25; ++i) {
        Mat2c g = random_sl2c(rng);
        Mat4 lg = lorentz_of(g);
        CHECK(lorentz_defect(lg) <= 1e-9);
        // Same action in both pictures.
        Vec4 v{{rng.normal(), rng.normal(), rng.normal(), rng.normal()}};
        Vec4 via_herm = coords_from_herm(hermitian_action(g, herm_from_coords(v)));
        CHECK(vec4_diff(lg * v, via_herm) <= 1e-8 * std::max(1.0, v.norm()));
        // Functorial in products.
        Mat2c h = random_sl2c(rng);
        Mat4 prod = lorentz_of(g * h);
        Mat4 comp = lorentz_of(g) * lorentz_of(h);
        double d = 0.0;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                d = std::max(d, std::abs(prod.m[(size_t)r][(size_t)c] -
                                         comp.m[(size_t)r][(size_t)c]));
        CHECK(d <= 1e-7);
    }
}

TEST_CASE("psi form value and constructive minimizer") {
    // psi((x,y), w0) = 2 Im(x conj(y)); at x = 2+i, y = 1-3i the product
    // x conj(y) = (2+i)(1+3i) = -1+7i, so psi = 14.
    std::array<cplx, 2> v{cplx{2.0, 1.0}, cplx{1.0, -3.0}};
    CHECK(psi_form(v, w0_matrix()) == doctest::Approx(14.0).epsilon(1e-14));
    // Equivalently -2 det[Re v | Im v]: det = 2(-3) - 1(1) = -7.
    auto pm = psi_constructive_minimizer(v);
    CHECK(pm.g.det() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pm.min_value == doctest::Approx(14.0).epsilon(1e-12));
    std::array<cplx, 2> gv{pm.g.a * v[0] + pm.g.b * v[1], pm.g.c * v[0] + pm.g.d * v[1]};
    CHECK(std::norm(gv[0]) + std::norm(gv[1]) == doctest::Approx(14.0).epsilon(1e-12));

    // |psi| really is a lower bound over the group: random g never dips below.
    Rng rng(7004, 0);
    for (int i = 0; i < 200; ++i) {
        Mat2r g = rotation(rng.uniform(-3.14, 3.14)) * diag_flow(rng.uniform(-2.0, 2.0)) *
                  unipotent(rng.uniform(-3.0, 3.0));
        std::array<cplx, 2> w{g.a * v[0] + g.b * v[1], g.c * v[0] + g.d * v[1]};
        CHECK(std::norm(w[0]) + std::norm(w[1]) >= 14.0 - 1e-9);
    }

    // Invariance of psi under the simultaneous action.
    Mat2c gc = random_sl2c(rng);
    Herm moved_w = hermitian_action(gc, w0_matrix());
    std::array<cplx, 2> moved_v{gc.a * v[0] + gc.b * v[1], gc.c * v[0] + gc.d * v[1]};
    CHECK(psi_form(moved_v, moved_w) == doctest::Approx(14.0).epsilon(1e-9));

    // Degenerate pair (real span): psi vanishes and the minimizer refuses.
    CHECK_THROWS_AS(psi_constructive_minimizer({cplx{1.0, 0.0}, cplx{2.0, 0.0}}),
                    std::domain_error);
}

TEST_CASE("psi unit bound is respected by random samples") {
    Rng rng(7005, 0);
    for (int i = 0; i < 300; ++i) {
        cplx x{rng.normal(), rng.normal()}, y{rng.normal(), rng.normal()};
        double n = std::sqrt(std::norm(x) + std::norm(y));
        if (n < 1e-6) continue;
        x /= n;
        y /= n;
        Vec4 w{{rng.normal(), rng.normal(), rng.normal(), rng.normal()}};
        double wn = w.norm();
        if (wn < 1e-6) continue;
        for (int c = 0; c < 4; ++c) w[c] /= wn;
        CHECK(std::abs(psi_form({x, y}, herm_from_coords(w))) <= kPsiUnitBound + 1e-12);
    }
    CHECK(kPsiUnitBound == doctest::Approx(std::sqrt(2.0)));
    CHECK(kProjectionNormBound == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("projection norm bound for unit-complement plane vectors") {
    Rng rng(7006, 0);
    for (int i = 0; i < 300; ++i) {
        // (w1,w2,w3) in the unit ball, w4 completing Q(w) = -1.
        double w1 = rng.uniform(-1.0, 1.0), w2 = rng.uniform(-1.0, 1.0),
               w3 = rng.uniform(-1.0, 1.0);
        double nsq = w1 * w1 + w2 * w2 + w3 * w3;
        if (nsq > 1.0) continue;
        double w4sq = w1 * w1 - w2 * w2 - w3 * w3 + 1.0;
        REQUIRE(w4sq >= 0.0);
        Vec4 w{{w1, w2, w3, std::sqrt(w4sq)}};
        CHECK(w.q() == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(w.norm() <= kProjectionNormBound + 1e-12);
    }
}

TEST_CASE("signed plane distance on both sheets") {
    const double s = 0.9;
    // Point sheet Q = +1: distance asinh(p4).
    Vec4 p{{std::cosh(s), 0.0, 0.0, std::sinh(s)}};
    CHECK(signed_plane_distance(p) == doctest::Approx(s).epsilon(1e-12));
    p[3] = -p[3];
    CHECK(signed_plane_distance(p) == doctest::Approx(-s).epsilon(1e-12));
    // Plane sheet Q = -1: distance asinh(p1).
    Vec4 w{{std::sinh(s), 0.0, 0.0, std::cosh(s)}};
    CHECK(signed_plane_distance(w) == doctest::Approx(s).epsilon(1e-12));
    CHECK(signed_plane_distance(base_point()) == 0.0);
    CHECK_THROWS_AS(signed_plane_distance(Vec4{{1.0, 1.0, 1.0, 1.0}}), std::domain_error);
    Vec4 lower{{-1.0, 0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(signed_plane_distance(lower), std::domain_error);
}

TEST_CASE("linearized plane distance stays in its band") {
    CHECK(kPlaneDistanceBand == doctest::Approx(std::log(2.0)));
    Rng rng(7007, 0);
    for (int i = 0; i < 50; ++i) {
        Mat4 g1 = lorentz_of(random_sl2c(rng));
        Mat4 g2 = lorentz_of(random_sl2c(rng));
        auto res = plane_distance_linearized(g2, g1);
        CHECK(res.band == doctest::Approx(kPlaneDistanceBand));
        // Recompute w = g2 g1^{-1} w0 with g1^{-1} = J g1^t J.
        Mat4 g1t = g1.transpose();
        const double J[4] = {1.0, -1.0, -1.0, -1.0};
        Mat4 g1inv;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                g1inv.m[(size_t)r][(size_t)c] = J[r] * g1t.m[(size_t)r][(size_t)c] * J[c];
        Vec4 w = g2 * (g1inv * plane_normal());
        CHECK(w.q() == doctest::Approx(-1.0).epsilon(1e-6));
        // Q(w) = -1 forces the norm identity used for the band.
        CHECK(w.norm_sq() == doctest::Approx(2.0 * w[0] * w[0] + 1.0).epsilon(1e-6));
        CHECK(res.approx == doctest::Approx(std::log(w.norm())).epsilon(1e-9));
        double exact = std::abs(std::asinh(w[0]));
        CHECK(std::abs(exact - res.approx) < res.band);
    }
    CHECK_THROWS_AS(plane_distance_linearized(Mat4::identity(), Mat4{}), std::domain_error);
}

TEST_CASE("hyperbolic regulation flattens a plane vector") {
    // Q(v) = 0.25 - 0.09 - 0.16 - 1 = -1 by construction.
    Vec4 v{{0.5, 0.3, -0.4, 1.0}};
    REQUIRE(v.q() == doctest::Approx(-1.0));
    auto reg = hyperbolic_regulation(v);
    CHECK(lorentz_defect(reg.k) <= 1e-12);
    CHECK(lorentz_defect(reg.k_prime) <= 1e-12);
    Vec4 moved = reg.k_prime * (lorentz_boost12(reg.t) * (reg.k * v));
    CHECK(vec4_diff(moved, plane_normal()) <= 1e-10);
    CHECK(std::cosh(reg.t) <= v.norm() + 1e-12);

    // Random plane vectors.
    Rng rng(7008, 0);
    for (int i = 0; i < 100; ++i) {
        double a = rng.normal(), b = rng.normal(), c = rng.normal();
        Vec4 u{{a, b, c, std::sqrt(1.0 + a * a - b * b - c * c)}};
        if (!(1.0 + a * a - b * b - c * c > 1e-6)) continue;
        REQUIRE(u.q() == doctest::Approx(-1.0).epsilon(1e-9));
        auto r = hyperbolic_regulation(u);
        Vec4 m = r.k_prime * (lorentz_boost12(r.t) * (r.k * u));
        CHECK(vec4_diff(m, plane_normal()) <= 1e-9);
        CHECK(std::cosh(r.t) <= u.norm() + 1e-9);
    }
    CHECK_THROWS_AS(hyperbolic_regulation(base_point()), std::domain_error);
}

TEST_CASE("regulation building blocks") {
    Mat4 boost = lorentz_boost12(0.7);
    CHECK(lorentz_defect(boost) <= 1e-12);
    Vec4 b = boost * base_point();
    CHECK(b[0] == doctest::Approx(std::cosh(0.7)));
    CHECK(b[1] == doctest::Approx(std::sinh(0.7)));
    CHECK(b[2] == 0.0);
    CHECK(b[3] == 0.0);

    Vec4 e2{{0.0, 1.0, 0.0, 0.0}};
    CHECK(vec4_diff(regulation_swap_rotation() * e2, plane_normal()) <= 1e-14);
    CHECK(lorentz_defect(regulation_swap_rotation()) <= 1e-14);
}

TEST_CASE("noncontraction bound over random rotations") {
    Rng rng(7009, 0);
    for (int i = 0; i < 100; ++i) {
        Mat2c k = random_su2(rng);
        Herm w;
        w.p = 0.0;
        w.r = rng.normal();
        w.q = {rng.normal(), rng.normal()};
        double t = rng.uniform(0.0, 3.0);
        auto chk = noncontracting_bound_check(k, w, t);
        CHECK(chk.holds);
        CHECK(chk.lhs <= chk.rhs * (1.0 + 1e-9) + 1e-12);
    }
    Herm bad;
    bad.p = 1.0;
    CHECK_THROWS_AS(noncontracting_bound_check(Mat2c::identity(), bad, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(noncontracting_bound_check(Mat2c{2.0, 0.0, 0.0, 0.5}, Herm{}, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(noncontracting_bound_check(Mat2c::identity(), Herm{}, -1.0),
                    std::domain_error);
}

TEST_CASE("cusp height counts only contracted vectors") {
    std::vector<std::array<cplx, 2>> fam{{cplx(1.0), cplx(0.0)}, {cplx(0.0), cplx(1.0)}};
    // a(-3) scales e1 by e^{-1.5} (inside the ball) and e2 by e^{1.5} (outside).
    Mat2c g = to_complex(diag_flow(-3.0));
    CHECK(cusp_height(g, fam) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(cusp_height(Mat2c::identity(), fam) == 0.0);
    CHECK(cusp_height(g, {}) == 0.0);
}

TEST_CASE("orbit height and its divergence sentinel") {
    // u(1) moves the coordinate vector (0,1,0,0) to (1/2, 1/2, -1, 0), whose
    // projection (dropping the w0 slot) has norm sqrt(3/2).
    Herm w = herm_from_coords(Vec4{{0.0, 1.0, 0.0, 0.0}});
    double h = orbit_height(to_complex(unipotent(1.0)), {w});
    CHECK(h == doctest::Approx(-0.5 * std::log(1.5)).epsilon(1e-12));
    // The w0 matrix itself projects to zero: the sup is honestly infinite.
    CHECK(std::isinf(orbit_height(Mat2c::identity(), {w0_matrix()})));
}

TEST_CASE("tube volume closed form") {
    CHECK(tube_volume(2.5, 0.8) ==
          doctest::Approx(2.5 * (0.8 + std::sinh(0.8) * std::cosh(0.8))).epsilon(1e-14));
    CHECK(tube_volume(0.0, 1.0) == 0.0);
    CHECK(tube_volume(3.0, 0.0) == 0.0);
    CHECK_THROWS_AS(tube_volume(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(tube_volume(1.0, -0.1), std::domain_error);
}
