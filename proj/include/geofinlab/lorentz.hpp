// The rank-one Lorentz model and its Hermitian avatar.
//
// Vectors x ∈ R⁴ carry the quadratic form Q(x) = x₁² - x₂² - x₃² - x₄².
// The hyperbolic 3-space is the sheet {Q = 1, x₁ > 0} with base point
// p₀ = (1,0,0,0); the totally geodesic plane is {x₄ = 0}, cut out by the
// Q-negative vector w₀ = (0,0,0,1).
//
// The same space shows up as 2×2 Hermitian matrices via the basis
//   B₁ = I,  B₂ = diag(1,-1),  B₃ = [[0,1],[1,0]],  B₄ = [[0,i],[-i,0]],
// chosen so that det(Σ xᵢBᵢ) = Q(x) identically.  SL₂(C) acts by
// A ↦ g^{-*} A g^{-1}, preserving det, and SL₂(R) is exactly the stabilizer
// of the w₀ matrix [[0,i],[-i,0]].

#pragma once

#include "geofinlab/mat2.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace geofinlab::geo {

// ---------------------------------------------------------------- vectors

struct Vec4 {
    std::array<double, 4> x{0, 0, 0, 0};

    double& operator[](int i) { return x[size_t(i)]; }
    double operator[](int i) const { return x[size_t(i)]; }

    double q() const { return x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3]; }
    double norm_sq() const { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]; }
    double norm() const { return std::sqrt(norm_sq()); }
};

inline Vec4 base_point() { return Vec4{{1, 0, 0, 0}}; }
inline Vec4 plane_normal() { return Vec4{{0, 0, 0, 1}}; }  // w₀

// Q-bilinear form: ⟨x,y⟩ = x₁y₁ - x₂y₂ - x₃y₃ - x₄y₄.
inline double q_inner(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

// ---------------------------------------------------------------- matrices

struct Mat4 {
    // Row-major.
    std::array<std::array<double, 4>, 4> m{};

    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r.m[size_t(i)][size_t(i)] = 1.0;
        return r;
    }

    friend Mat4 operator*(const Mat4& a, const Mat4& b) {
        Mat4 r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0;
                for (int k = 0; k < 4; ++k) s += a.m[size_t(i)][size_t(k)] * b.m[size_t(k)][size_t(j)];
                r.m[size_t(i)][size_t(j)] = s;
            }
        return r;
    }

    friend Vec4 operator*(const Mat4& a, const Vec4& v) {
        Vec4 r;
        for (int i = 0; i < 4; ++i) {
            double s = 0;
            for (int k = 0; k < 4; ++k) s += a.m[size_t(i)][size_t(k)] * v[k];
            r[i] = s;
        }
        return r;
    }

    Mat4 transpose() const {
        Mat4 r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) r.m[size_t(i)][size_t(j)] = m[size_t(j)][size_t(i)];
        return r;
    }
};

// Defect from the Lorentz group: max |(gᵗJg - J)_{ij}| with J = diag(1,-1,-1,-1).
double lorentz_defect(const Mat4& g);

// ------------------------------------------------------------- Hermitian

// [[p, q], [conj(q), r]] with p, r real.
struct Herm {
    double p = 0.0;
    double r = 0.0;
    cplx q{0.0, 0.0};

    double det() const { return p * r - std::norm(q); }
};

Herm herm_from_coords(const Vec4& x);
Vec4 coords_from_herm(const Herm& a);
inline Herm w0_matrix() { return herm_from_coords(plane_normal()); }  // [[0,i],[-i,0]]

// g.A = g^{-*} A g^{-1}; det-preserving for det(g) = 1, and a group action.
Herm hermitian_action(const Mat2c& g, const Herm& a);

// The 4×4 matrix of A ↦ g.A in the B-basis; lands in the identity component
// of the Q-orthogonal group.
Mat4 lorentz_of(const Mat2c& g);

// ------------------------------------------------------------- Ψ and heights

// Ψ(v, w) = v* W v for the Hermitian matrix W; real by symmetry.  Invariant
// under simultaneous (g·v, g.W).  At w₀: Ψ((x,y), w₀) = 2·Im(x·conj(y)).
double psi_form(const std::array<cplx, 2>& v, const Herm& w);

// |Ψ(v, w₀)| equals inf over g ∈ SL₂(R) of ‖g v‖².  Writing v = v₁ + i v₂
// with real columns, Ψ(v,w₀) = -2 det[v₁ v₂] and ‖gv‖² = ‖gv₁‖² + ‖gv₂‖²
// ≥ 2|det[gv₁ gv₂]| = 2|det[v₁ v₂]|, with equality when the two real columns
// are orthogonal with equal norms.  The constructive minimizer produces that
// g directly: g = √|det M| · O · M^{-1} with M = [v₁ v₂] and O orthogonal of
// determinant sign(det M).
struct PsiMinimizer {
    Mat2r g;           // the minimizing real matrix, det = 1
    double min_value;  // ‖g v‖², equal to |Ψ(v, w₀)| up to rounding
};
PsiMinimizer psi_constructive_minimizer(const std::array<cplx, 2>& v);

// Sharp bound |Ψ(v,w)| ≤ √2 for ‖v‖ = 1 and unit coordinate norm of w
// (eigenvalues of Σ xᵢBᵢ are x₁ ± ‖(x₂,x₃,x₄)‖, and |x₁| + √(1-x₁²) ≤ √2).
inline constexpr double kPsiUnitBound = 1.4142135623730951;
// If Q(w) = -1 and the w₀-complement has norm ≤ 1 then ‖w‖ ≤ √3
// (w₄² = w₁² - w₂² - w₃² + 1 ≤ 2); tight at w = (1,0,0,√2).
inline constexpr double kProjectionNormBound = 1.7320508075688772;

// --------------------------------------------------- plane distances

// Signed distance to the plane {x₄ = 0}, for either sheet:
//  * Q(p) = +1 (a point of hyperbolic 3-space): asinh(p₄), the sign telling
//    which side of the plane the point is on;
//  * Q(p) = -1 (a plane vector g·w₀): asinh(p₁), the signed distance from
//    the base point p₀ to the plane defined by p.
// For the transvection along the geodesic through p₀ normal to the plane,
// both readings report the flow time t.
double signed_plane_distance(const Vec4& p);

// First-order version of the distance between the base plane moved by g₁ and
// the base point moved by g₂: exact = |asinh(w₁)|, approx = log‖w‖ for
// w = g₂ g₁^{-1} · w₀.  Since Q(w) = -1 forces ‖w‖² = 2w₁² + 1, the defect
// exact - approx lives in (-½log2, ½log2); the frozen regression band below
// is log 2, which the sweep test re-checks.
inline constexpr double kPlaneDistanceBand = 0.6931471805599453;  // log 2
struct LinearizedPlaneDistance {
    double approx;  // log‖w‖
    double band;    // kPlaneDistanceBand
};
LinearizedPlaneDistance plane_distance_linearized(const Mat4& g2, const Mat4& g1);

// --------------------------------------------------- regulation

// For Q(v) = -1, produces rotations k, k' (block SO(3) on coordinates 2..4)
// and a flow time t with  k'·a(t)·k·v = w₀  and cosh(t) ≤ ‖v‖.
// Construction: rotate the tail of v to (r,0,0) with r = √(1+v₁²), so
// k·v = (sinh t', cosh t', 0, 0); the boost a(-t') in the (1,2)-plane takes
// that to (0,1,0,0); a fixed rotation k' carries (0,1,0,0) to w₀.
struct Regulation {
    Mat4 k;
    Mat4 k_prime;
    double t;
};
Regulation hyperbolic_regulation(const Vec4& v);

// The boost a(t) in the (1,2)-plane used by the regulation.
Mat4 lorentz_boost12(double t);
// The fixed rotation sending (0,1,0,0) to (0,0,0,1).
Mat4 regulation_swap_rotation();

// --------------------------------------------------- non-contraction check

// For k ∈ SU(2), t ≥ 0, and w Hermitian with vanishing upper-left entry
// (equivalently Ψ(e₁, w) = 0), checks
//   ‖π(k·a(t).w)‖ ≤ 4·e^t·‖π(k.w)‖,
// where π drops the w₀-coordinate.  Returns the two sides so callers can
// log the margin; `holds` applies a 1e-12 relative slack.
struct NoncontractionCheck {
    double lhs;
    double rhs;
    bool holds;
};
NoncontractionCheck noncontracting_bound_check(const Mat2c& k, const Herm& w, double t);

// --------------------------------------------------- heights over families

// Cusp-style height: max(0, max over v of -log‖g v‖ over the vectors that
// g brings inside the unit ball).  Empty families (or no small vectors)
// give 0.
double cusp_height(const Mat2c& g, const std::vector<std::array<cplx, 2>>& family);

// Orbit-style height: sup over w of -log‖π(g.w)‖ with π dropping the
// w₀-coordinate; +∞ (the honest sentinel) when some π(g.w) vanishes.
double orbit_height(const Mat2c& g, const std::vector<Herm>& family);

// --------------------------------------------------- tubes

// Volume of the radius-t₀ tube around a totally geodesic plane piece of the
// given area: area · (t₀ + sinh t₀ · cosh t₀).
double tube_volume(double area, double t0);

}  // namespace geofinlab::geo
