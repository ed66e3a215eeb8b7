#pragma once

// Integer quadratic-form machinery for diagonal forms
//
//     Q(x) = c1*x1^2 + c2*x2^2 + c3*x3^2 + c4*x4^2,
//
// canonically (7, -1, -1, -A) with A = 1 (mod 8), together with the rescaled
// lattice embedding
//
//     (m1, m2, m3, m4)  |->  (sqrt(A/7)*m1, sqrt(A)*m2, sqrt(A)*m3, m4),
//
// under which the standard signature-(1,3) form evaluates to
//
//     Q(embedded) = (A/7)*m1^2 - A*m2^2 - A*m3^2 - m4^2.
//
// Integrality of (A/7)*m1^2 with gcd(A,7) = 1 forces 7 | m1, so with m1 = 7n
// the condition Q(embedded) = -1 is the exact Diophantine equation
//
//     7*A*n^2 - A*m2^2 - A*m3^2 - m4^2 = -1.                          (*)
//
// Everything Diophantine here is decided in exact integer arithmetic
// (128-bit intermediates); floating point appears only in the embedding
// coordinates reported for convenience and in the analytic constants.

#include <array>
#include <optional>
#include <vector>

namespace geofinlab {

// A diagonal integral quadratic form in four variables.  `a` is the defining
// parameter of the canonical family; for hand-built forms (e.g. the
// all-units control form) set it to coefficients consistent with the intent.
struct DiagonalForm {
    std::array<long long, 4> coefficients;
    long long a = 0;

    // The canonical form (7, -1, -1, -a).  Requires a > 0 and a = 1 (mod 8).
    static DiagonalForm canonical(long long a);
};

// Counts tuples (x1..x4) in (Z/8)^4, not all even, with Q(x) = 0 (mod 8).
// A return value of 0 certifies that Q has no nontrivial 2-adic zeros at
// level 8, the obstruction used to rule out isotropic vectors.
// Requires form.a = 1 (mod 8).
long long mod8_solubility(const DiagonalForm& form);

// True iff a1/a2 is the square of a rational, i.e. a1*a2 is a perfect
// square.  Used to certify that two form parameters give incommensurable
// groups.  Requires a1, a2 > 0.
bool ratio_is_square(long long a1, long long a2);

// A lattice point m together with its rescaled embedding.  norm_sq is the
// exact integer value of |embedded|^2 = 7*A*n^2 + A*m2^2 + A*m3^2 + m4^2
// (an integer precisely because 7 | m1).
struct ScaledLatticeVector {
    std::array<long long, 4> m;
    std::array<double, 4> embedded;
    long long norm_sq = 0;
    bool m1_divisible = true;  // 7 | m1; true by construction for enumerated vectors

    bool is_plus_minus_w0() const {
        return m[0] == 0 && m[1] == 0 && m[2] == 0 && (m[3] == 1 || m[3] == -1);
    }
};

// Safety cap on a * norm_bound^2; enumeration beyond this is refused
// (overflow error) rather than risking silent wraparound.
inline constexpr long long kEnumerationCap = 1'000'000'000'000LL;

// All solutions of (*) with |embedded| <= norm_bound, each sign combination
// reported, sorted by (norm_sq, m) ascending.  Requires a >= 9,
// gcd(a, 7) = 1 and a * norm_bound^2 <= kEnumerationCap.
std::vector<ScaledLatticeVector> enumerate_q_minus_one(long long a, double norm_bound);

struct NormGapResult {
    bool holds = false;
    std::optional<ScaledLatticeVector> witness;  // a non-central short vector, on failure
};

// Enumerates Q = -1 vectors with |embedded| <= sqrt(a/7) and reports whether
// they all lie in {±w0}, w0 = (0,0,0,±1).  Requires a = 1 (mod 8) (and the
// preconditions of enumerate_q_minus_one).
NormGapResult norm_gap_check(long long a);

// (1/4) * ln a - c0 + ln c.  The half-width of the disjoint collar allowed
// around the special locus; monotone increasing in a.  Requires a, c > 0.
double separation_constant(double a, double c0, double c);

// tube_volume(area, max(0, separation_constant(a, c0, c))): the volume of the
// collar of that half-width around a totally geodesic piece of the given
// area.  Grows like (area/4) * sqrt(a).  Requires area >= 0.
double volume_lower_bound(double a, double area, double c0, double c);

}  // namespace geofinlab
