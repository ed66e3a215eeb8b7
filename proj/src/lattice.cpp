#include "geofinlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "geofinlab/lorentz.hpp"

namespace geofinlab {

namespace {

using i128 = __int128;

// Integer square root with exact perfect-square detection.
// Valid for 0 <= v < 2^100 or so; inputs here are <= kEnumerationCap.
long long isqrt_i128(i128 v) {
    if (v < 0) return -1;
    long long r = static_cast<long long>(std::sqrt(static_cast<double>(v)));
    while (r > 0 && static_cast<i128>(r) * r > v) --r;
    while (static_cast<i128>(r + 1) * (r + 1) <= v) ++r;
    return r;
}

}  // namespace

DiagonalForm DiagonalForm::canonical(long long a) {
    if (a <= 0) throw std::invalid_argument("DiagonalForm::canonical: a must be positive");
    if (a % 8 != 1) throw std::invalid_argument("DiagonalForm::canonical: a must be 1 mod 8");
    return DiagonalForm{{7, -1, -1, -a}, a};
}

long long mod8_solubility(const DiagonalForm& form) {
    if (((form.a % 8) + 8) % 8 != 1)
        throw std::invalid_argument("mod8_solubility: form parameter must be 1 mod 8");
    long long c[4];
    for (int i = 0; i < 4; ++i) c[i] = ((form.coefficients[i] % 8) + 8) % 8;
    long long count = 0;
    for (int x1 = 0; x1 < 8; ++x1)
        for (int x2 = 0; x2 < 8; ++x2)
            for (int x3 = 0; x3 < 8; ++x3)
                for (int x4 = 0; x4 < 8; ++x4) {
                    if (x1 % 2 == 0 && x2 % 2 == 0 && x3 % 2 == 0 && x4 % 2 == 0) continue;
                    long long q = c[0] * x1 * x1 + c[1] * x2 * x2 + c[2] * x3 * x3 + c[3] * x4 * x4;
                    if (q % 8 == 0) ++count;
                }
    return count;
}

bool ratio_is_square(long long a1, long long a2) {
    if (a1 <= 0 || a2 <= 0) throw std::invalid_argument("ratio_is_square: arguments must be positive");
    // a1/a2 in (Q*)^2  <=>  a1*a2 is a perfect square.
    i128 prod = static_cast<i128>(a1) * a2;
    long long r = isqrt_i128(prod);
    return static_cast<i128>(r) * r == prod;
}

std::vector<ScaledLatticeVector> enumerate_q_minus_one(long long a, double norm_bound) {
    if (a < 9) throw std::invalid_argument("enumerate_q_minus_one: a must be >= 9");
    if (a % 7 == 0)
        throw std::invalid_argument(
            "enumerate_q_minus_one: a must be coprime to 7 (divisibility of m1 relies on it)");
    if (!(norm_bound > 0.0) || !std::isfinite(norm_bound))
        throw std::invalid_argument("enumerate_q_minus_one: norm_bound must be positive and finite");

    // Largest admissible integer |embedded|^2.  The relative nudge keeps
    // bounds like 3*sqrt(a), whose square is exactly 9a, inclusive despite
    // the rounding of the bound itself.
    double bsq = norm_bound * norm_bound * (1.0 + 8e-16);
    if (static_cast<double>(a) * bsq > static_cast<double>(kEnumerationCap))
        throw std::overflow_error("enumerate_q_minus_one: a * norm_bound^2 exceeds the safety cap");
    const i128 T = static_cast<i128>(std::floor(bsq));

    std::vector<ScaledLatticeVector> out;
    if (T < 1) return out;
    const double ra = std::sqrt(static_cast<double>(a));
    const double r7a = std::sqrt(7.0 * static_cast<double>(a));

    // The defining equation forces a*m2^2 + a*m3^2 + m4^2 = 7a n^2 + 1, so
    // |embedded|^2 = 7a n^2 + (7a n^2 + 1) = 14a n^2 + 1 depends on n alone.
    const long long nmax = isqrt_i128((T - 1) / (static_cast<i128>(14) * a));
    const i128 budget_max = static_cast<i128>(7) * a * nmax * nmax + 1;
    for (long long m4 = 0; static_cast<i128>(m4) * m4 <= budget_max; ++m4) {
        const i128 m4sq = static_cast<i128>(m4) * m4;
        for (long long n = 0; n <= nmax; ++n) {
            const i128 budget = static_cast<i128>(7) * a * n * n + 1;
            if (m4sq > budget) continue;  // this n is too small to reach m4
            for (long long m2 = 0;; ++m2) {
                const i128 residual = budget - static_cast<i128>(a) * m2 * m2 - m4sq;
                if (residual < 0) break;  // decreasing in m2, no further solutions
                if (residual % a != 0) continue;
                const long long s = static_cast<long long>(residual / a);
                const long long m3 = isqrt_i128(s);
                if (static_cast<i128>(m3) * m3 != s) continue;
                const i128 norm_sq = static_cast<i128>(14) * a * n * n + 1;
                // Emit every sign combination exactly once.
                for (int sn = 0; sn < (n == 0 ? 1 : 2); ++sn)
                    for (int s2 = 0; s2 < (m2 == 0 ? 1 : 2); ++s2)
                        for (int s3 = 0; s3 < (m3 == 0 ? 1 : 2); ++s3)
                            for (int s4 = 0; s4 < (m4 == 0 ? 1 : 2); ++s4) {
                                const long long vn = sn ? -n : n;
                                const long long v2 = s2 ? -m2 : m2;
                                const long long v3 = s3 ? -m3 : m3;
                                const long long v4 = s4 ? -m4 : m4;
                                ScaledLatticeVector v;
                                v.m = {7 * vn, v2, v3, v4};
                                v.embedded = {r7a * static_cast<double>(vn),
                                              ra * static_cast<double>(v2),
                                              ra * static_cast<double>(v3),
                                              static_cast<double>(v4)};
                                v.norm_sq = static_cast<long long>(norm_sq);
                                v.m1_divisible = true;
                                out.push_back(v);
                            }
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const ScaledLatticeVector& p, const ScaledLatticeVector& q) {
        if (p.norm_sq != q.norm_sq) return p.norm_sq < q.norm_sq;
        return p.m < q.m;
    });
    return out;
}

NormGapResult norm_gap_check(long long a) {
    if (a % 8 != 1) throw std::invalid_argument("norm_gap_check: a must be 1 mod 8");
    const double bound = std::sqrt(static_cast<double>(a) / 7.0);
    NormGapResult result;
    result.holds = true;
    for (const ScaledLatticeVector& v : enumerate_q_minus_one(a, bound)) {
        if (!v.is_plus_minus_w0()) {
            result.holds = false;
            result.witness = v;
            break;
        }
    }
    return result;
}

double separation_constant(double a, double c0, double c) {
    if (!(a > 0.0)) throw std::invalid_argument("separation_constant: a must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("separation_constant: c must be positive");
    return 0.25 * std::log(a) - c0 + std::log(c);
}

double volume_lower_bound(double a, double area, double c0, double c) {
    if (!(area >= 0.0)) throw std::invalid_argument("volume_lower_bound: area must be >= 0");
    const double half_width = std::max(0.0, separation_constant(a, c0, c));
    return geo::tube_volume(area, half_width);
}

}  // namespace geofinlab
