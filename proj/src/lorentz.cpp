#include "geofinlab/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geofinlab::geo {

double lorentz_defect(const Mat4& g) {
    const double J[4] = {1.0, -1.0, -1.0, -1.0};
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += g.m[size_t(k)][size_t(i)] * J[k] * g.m[size_t(k)][size_t(j)];
            double target = (i == j) ? J[i] : 0.0;
            worst = std::max(worst, std::abs(s - target));
        }
    return worst;
}

Herm herm_from_coords(const Vec4& x) {
    // x₁I + x₂diag(1,-1) + x₃[[0,1],[1,0]] + x₄[[0,i],[-i,0]]
    Herm a;
    a.p = x[0] + x[1];
    a.r = x[0] - x[1];
    a.q = cplx(x[2], x[3]);
    return a;
}

Vec4 coords_from_herm(const Herm& a) {
    Vec4 x;
    x[0] = (a.p + a.r) / 2.0;
    x[1] = (a.p - a.r) / 2.0;
    x[2] = a.q.real();
    x[3] = a.q.imag();
    return x;
}

Herm hermitian_action(const Mat2c& g, const Herm& a) {
    if (std::abs(g.det() - cplx(1.0)) > 1e-9)
        throw std::domain_error("hermitian_action: determinant must be one");
    Mat2c minv = g.inv_unimodular();
    // Full matrix of A, conjugated: (g^{-1})* A g^{-1}.
    Mat2c am{cplx(a.p), a.q, std::conj(a.q), cplx(a.r)};
    Mat2c res = minv.conj_transpose() * am * minv;
    // Re-symmetrize to kill last-bit drift; entries are Hermitian in exact
    // arithmetic.
    Herm out;
    out.p = res.a.real();
    out.r = res.d.real();
    out.q = (res.b + std::conj(res.c)) * 0.5;
    return out;
}

Mat4 lorentz_of(const Mat2c& g) {
    Mat4 r;
    for (int j = 0; j < 4; ++j) {
        Vec4 e;
        e[j] = 1.0;
        Vec4 img = coords_from_herm(hermitian_action(g, herm_from_coords(e)));
        for (int i = 0; i < 4; ++i) r.m[size_t(i)][size_t(j)] = img[i];
    }
    return r;
}

double psi_form(const std::array<cplx, 2>& v, const Herm& w) {
    // v* W v = p|x|² + r|y|² + 2 Re(conj(x) q y)
    const cplx& x = v[0];
    const cplx& y = v[1];
    return w.p * std::norm(x) + w.r * std::norm(y) + 2.0 * (std::conj(x) * w.q * y).real();
}

PsiMinimizer psi_constructive_minimizer(const std::array<cplx, 2>& v) {
    // M = [Re v | Im v] as columns.
    double m11 = v[0].real(), m12 = v[0].imag();
    double m21 = v[1].real(), m22 = v[1].imag();
    double det = m11 * m22 - m12 * m21;
    if (det == 0.0)
        throw std::domain_error("psi_constructive_minimizer: Psi(v, w0) vanishes");
    double lambda = std::abs(det);
    // O orthogonal with det(O) = sign(det M) makes det(g) = +1.
    double o22 = det > 0 ? 1.0 : -1.0;
    // g = sqrt(λ) · O · M^{-1}
    double s = std::sqrt(lambda) / det;
    Mat2r g{s * m22, -s * m12, o22 * -s * m21, o22 * s * m11};
    // ‖g v‖² = ‖g v₁‖² + ‖g v₂‖²
    auto apply = [&](double a1, double a2) {
        double r1 = g.a * a1 + g.b * a2;
        double r2 = g.c * a1 + g.d * a2;
        return r1 * r1 + r2 * r2;
    };
    double value = apply(m11, m21) + apply(m12, m22);
    return {g, value};
}

double signed_plane_distance(const Vec4& p) {
    double q = p.q();
    if (std::abs(q - 1.0) <= 1e-6) {
        if (p[0] <= 0.0)
            throw std::domain_error("signed_plane_distance: point must lie on the upper sheet");
        return std::asinh(p[3]);
    }
    if (std::abs(q + 1.0) <= 1e-6) return std::asinh(p[0]);
    throw std::domain_error("signed_plane_distance: Q(p) must be +1 or -1");
}

LinearizedPlaneDistance plane_distance_linearized(const Mat4& g2, const Mat4& g1) {
    if (lorentz_defect(g1) > 1e-8 || lorentz_defect(g2) > 1e-8)
        throw std::domain_error("plane_distance_linearized: inputs must preserve Q");
    // g1^{-1} = J g1ᵗ J for Q-orthogonal g1.
    Mat4 g1t = g1.transpose();
    const double J[4] = {1.0, -1.0, -1.0, -1.0};
    Mat4 g1inv;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            g1inv.m[size_t(i)][size_t(j)] = J[i] * g1t.m[size_t(i)][size_t(j)] * J[j];
    Vec4 w = (g2 * g1inv) * plane_normal();
    return {std::log(w.norm()), kPlaneDistanceBand};
}

Mat4 lorentz_boost12(double t) {
    Mat4 r = Mat4::identity();
    r.m[0][0] = std::cosh(t);
    r.m[0][1] = std::sinh(t);
    r.m[1][0] = std::sinh(t);
    r.m[1][1] = std::cosh(t);
    return r;
}

Mat4 regulation_swap_rotation() {
    // Block rotation on coordinates 2..4 sending (0,1,0,0) ↦ (0,0,0,1):
    // 3×3 block [[0,0,-1],[0,1,0],[1,0,0]] has determinant +1.
    Mat4 r;
    r.m[0][0] = 1.0;
    r.m[1][3] = -1.0;
    r.m[2][2] = 1.0;
    r.m[3][1] = 1.0;
    return r;
}

namespace {

// SO(3) rotation (as a block Mat4 on coordinates 2..4) taking the unit
// 3-vector u to (1,0,0).  Rodrigues' formula around u × e₁.
Mat4 rotation_tail_to_first(double u1, double u2, double u3) {
    Mat4 out = Mat4::identity();
    double r3[3][3];
    const double c = u1;  // cos of the rotation angle = u·e₁
    double ax = 0.0, ay = u3, az = -u2;  // u × e₁
    double an = std::sqrt(ay * ay + az * az);
    if (an < 1e-14) {
        if (c > 0) return out;  // already aligned
        // u = -e₁: rotate by π around e₂.
        out.m[1][1] = -1.0;
        out.m[2][2] = 1.0;
        out.m[3][3] = -1.0;
        return out;
    }
    ax = 0.0;
    ay /= an;
    az /= an;
    double s = an;  // |u × e₁| = sin of the angle
    double K[3][3] = {{0, -az, ay}, {az, 0, -ax}, {-ay, ax, 0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double kk = 0.0;
            for (int m = 0; m < 3; ++m) kk += K[i][m] * K[m][j];
            r3[i][j] = (i == j ? 1.0 : 0.0) + s * K[i][j] + (1.0 - c) * kk;
        }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.m[size_t(i + 1)][size_t(j + 1)] = r3[i][j];
    return out;
}

}  // namespace

Regulation hyperbolic_regulation(const Vec4& v) {
    if (std::abs(v.q() + 1.0) > 1e-9)
        throw std::domain_error("hyperbolic_regulation: Q(v) must be -1");
    double tail = std::sqrt(v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    // Q(v) = -1 forces tail² = 1 + v₁² ≥ 1 > 0.
    Mat4 k = rotation_tail_to_first(v[1] / tail, v[2] / tail, v[3] / tail);
    // k·v = (v₁, r, 0, 0) with v₁ = sinh t', r = cosh t'.
    double t_prime = std::asinh(v[0]);
    double t = -t_prime;
    Mat4 k_prime = regulation_swap_rotation();
    return {k, k_prime, t};
}

NoncontractionCheck noncontracting_bound_check(const Mat2c& k, const Herm& w, double t) {
    if (t < 0.0) throw std::domain_error("noncontracting_bound_check: t must be >= 0");
    double scale = std::sqrt(w.p * w.p + w.r * w.r + 2.0 * std::norm(w.q));
    if (std::abs(w.p) > 1e-12 * std::max(1.0, scale))
        throw std::domain_error("noncontracting_bound_check: upper-left entry of w must vanish");
    // Unitarity check for k (defect of k*k from the identity).
    Mat2c kk = k.conj_transpose() * k;
    double udef = std::abs(kk.a - cplx(1.0)) + std::abs(kk.b) + std::abs(kk.c) +
                  std::abs(kk.d - cplx(1.0));
    if (udef > 1e-9 || std::abs(k.det() - cplx(1.0)) > 1e-9)
        throw std::domain_error("noncontracting_bound_check: k must be special unitary");

    auto proj_norm = [](const Herm& h) {
        Vec4 c = coords_from_herm(h);
        return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    };
    Mat2c ka = k * to_complex(diag_flow(t));
    double lhs = proj_norm(hermitian_action(ka, w));
    double rhs = 4.0 * std::exp(t) * proj_norm(hermitian_action(k, w));
    return {lhs, rhs, lhs <= rhs * (1.0 + 1e-12) + 1e-300};
}

double cusp_height(const Mat2c& g, const std::vector<std::array<cplx, 2>>& family) {
    double best = 0.0;
    for (const auto& v : family) {
        cplx t = g.a * v[0] + g.b * v[1];
        cplx b = g.c * v[0] + g.d * v[1];
        double n = std::sqrt(std::norm(t) + std::norm(b));
        if (n < 1.0 && n > 0.0) best = std::max(best, -std::log(n));
    }
    return best;
}

double orbit_height(const Mat2c& g, const std::vector<Herm>& family) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& w : family) {
        Vec4 c = coords_from_herm(hermitian_action(g, w));
        double n = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
        if (n == 0.0) return std::numeric_limits<double>::infinity();
        best = std::max(best, -std::log(n));
    }
    return best;
}

double tube_volume(double area, double t0) {
    if (area < 0.0 || t0 < 0.0)
        throw std::domain_error("tube_volume: area and radius must be nonnegative");
    return area * (t0 + std::sinh(t0) * std::cosh(t0));
}

}  // namespace geofinlab::geo
