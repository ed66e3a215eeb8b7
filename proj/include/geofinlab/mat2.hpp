// 2×2 unimodular matrices over R or C, and the K·A·N coordinates used
// throughout: upper unipotent u(s), diagonal flow a(t), and the rotation
// part recovered by a unit-determinant QR decomposition.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace geofinlab::geo {

using cplx = std::complex<double>;

inline double conj_scalar(double x) { return x; }
inline cplx conj_scalar(const cplx& x) { return std::conj(x); }
inline double abs_sq(double x) { return x * x; }
inline double abs_sq(const cplx& x) { return std::norm(x); }

template <typename F>
struct Mat2 {
    // Row-major entries [[a, b], [c, d]].
    F a{}, b{}, c{}, d{};

    static Mat2 identity() { return {F(1), F(0), F(0), F(1)}; }

    F det() const { return a * d - b * c; }

    // Inverse of a determinant-one matrix (adjugate).
    Mat2 inv_unimodular() const { return {d, -b, -c, a}; }

    Mat2 conj_transpose() const {
        return {conj_scalar(a), conj_scalar(c), conj_scalar(b), conj_scalar(d)};
    }

    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }

    // Frobenius norm squared.
    double norm_sq() const { return abs_sq(a) + abs_sq(b) + abs_sq(c) + abs_sq(d); }
};

using Mat2r = Mat2<double>;
using Mat2c = Mat2<cplx>;

// u(s) = [[1, s], [0, 1]].
template <typename F>
Mat2<F> unipotent(F s) {
    return {F(1), s, F(0), F(1)};
}

// a(t) = diag(e^{t/2}, e^{-t/2}).
template <typename F = double>
Mat2<F> diag_flow(double t) {
    return {F(std::exp(t / 2.0)), F(0), F(0), F(std::exp(-t / 2.0))};
}

inline Mat2r rotation(double theta) {
    double cs = std::cos(theta), sn = std::sin(theta);
    return {cs, -sn, sn, cs};
}

inline Mat2c to_complex(const Mat2r& m) {
    return {cplx(m.a), cplx(m.b), cplx(m.c), cplx(m.d)};
}

// g = k · a(t) · u(s) with k special orthogonal/unitary.
//
// The factor a(t)·u(s) is upper triangular with positive diagonal
// (e^{t/2}, e^{-t/2}), so this is the QR decomposition of g normalized to
// R_{11} > 0; for det(g) = 1 that forces R_{22} > 0 too and the splitting is
// unique and continuous in g.  Concretely: e^{t/2} = ‖g·e₁‖, k's first
// column is g·e₁ normalized, k's second column is forced by det(k) = 1, and
// s = (k*·g)₁₂ / e^{t/2}.
template <typename F>
struct KanFactors {
    Mat2<F> k;
    double t = 0.0;
    F s{};
};

template <typename F>
KanFactors<F> qr_decompose(const Mat2<F>& g) {
    double det_err = std::abs(g.det() - F(1));
    if (det_err > 1e-9) throw std::domain_error("qr_decompose: determinant must be one");
    double r = std::sqrt(abs_sq(g.a) + abs_sq(g.c));
    if (r == 0.0) throw std::domain_error("qr_decompose: zero first column");
    F alpha = g.a * (1.0 / r);
    F beta = g.c * (1.0 / r);
    // k = [[α, -β̄], [β, ᾱ]]: special orthogonal for real input, special
    // unitary for complex input.
    Mat2<F> k{alpha, -conj_scalar(beta), beta, conj_scalar(alpha)};
    Mat2<F> upper = k.conj_transpose() * g;
    double t = 2.0 * std::log(r);
    F s = upper.b * (1.0 / r);
    return {k, t, s};
}

// Height of the standard lattice vector e₁ under h, i.e. -log‖h e₁‖.
// Right-invariant under upper-triangular matrices with unit-modulus diagonal,
// since those fix ‖·e₁‖ of the first column.  For h = k·a(-t)·u(s) the value
// is t/2.
template <typename F>
double siegel_height(const Mat2<F>& h) {
    double n = std::sqrt(abs_sq(h.a) + abs_sq(h.c));
    if (n == 0.0) throw std::domain_error("siegel_height: zero first column");
    return -std::log(n);
}

}  // namespace geofinlab::geo
