// Exact rational arithmetic for the triadic interval machinery.
//
// Values are fractions num/den with 128-bit storage.  The use pattern keeps
// everything small: family endpoints carry denominators bounded by 2^40 (or
// the exact power-of-two denominator of a double), triadic endpoints carry
// powers of three up to 3^31, and the only products ever formed are
// cross-multiplications.  Those can still overflow 128 bits in principle, so
// every comparison and every arithmetic intermediate runs in 256 bits
// (Boost.Multiprecision, header-only) before gcd reduction back to storage.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace geofinlab {

using int256 = boost::multiprecision::int256_t;

namespace detail {

// Boost's cpp_int is sign-magnitude, so all limb extraction below works on
// absolute values only (bitwise ops on negative multiprecision values are a
// portability trap).
inline __int128 to_i128_checked(const int256& v) {
    const bool neg = v < 0;
    int256 u = neg ? int256(-v) : v;
    static const int256 hi = int256(1) << 126;
    if (u >= hi)
        throw std::overflow_error("rational arithmetic exceeded 128-bit storage");
    std::uint64_t low = static_cast<std::uint64_t>(u & 0xffffffffffffffffULL);
    std::uint64_t high = static_cast<std::uint64_t>(u >> 64);
    unsigned __int128 mag =
        (static_cast<unsigned __int128>(high) << 64) | static_cast<unsigned __int128>(low);
    return neg ? -static_cast<__int128>(mag) : static_cast<__int128>(mag);
}

inline unsigned __int128 uabs(__int128 x) {
    return x < 0 ? static_cast<unsigned __int128>(-(x + 1)) + 1
                 : static_cast<unsigned __int128>(x);
}

inline unsigned __int128 gcd_u128(unsigned __int128 a, unsigned __int128 b) {
    while (b != 0) {
        unsigned __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace detail

struct Rat {
    __int128 num = 0;
    __int128 den = 1;  // always > 0, gcd(num, den) == 1

    Rat() = default;
    Rat(long long n) : num(n), den(1) {}
    Rat(long long n, long long d) { assign(n, d); }

    static Rat from_parts128(__int128 n, __int128 d) {
        Rat r;
        r.assign128(n, d);
        return r;
    }

    void assign(long long n, long long d) { assign128(n, d); }

    void assign128(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        unsigned __int128 g = detail::gcd_u128(detail::uabs(n), static_cast<unsigned __int128>(d));
        if (g > 1) {
            n = (n < 0) ? -static_cast<__int128>(detail::uabs(n) / g)
                        : static_cast<__int128>(detail::uabs(n) / g);
            d = static_cast<__int128>(static_cast<unsigned __int128>(d) / g);
        }
        num = n;
        den = d;
    }

    double to_double() const {
        return static_cast<double>(num) / static_cast<double>(den);
    }

    bool is_zero() const { return num == 0; }
};

namespace detail {
inline int256 widen(__int128 x) {
    unsigned __int128 u = uabs(x);
    std::uint64_t low = static_cast<std::uint64_t>(u);
    std::uint64_t high = static_cast<std::uint64_t>(u >> 64);
    int256 r = (int256(high) << 64) + int256(low);
    return x < 0 ? int256(-r) : r;
}
}  // namespace detail

// Comparisons cross-multiply in 256 bits; denominators are positive.
inline int compare(const Rat& a, const Rat& b) {
    int256 lhs = detail::widen(a.num) * detail::widen(b.den);
    int256 rhs = detail::widen(b.num) * detail::widen(a.den);
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
}

inline bool operator<(const Rat& a, const Rat& b) { return compare(a, b) < 0; }
inline bool operator>(const Rat& a, const Rat& b) { return compare(a, b) > 0; }
inline bool operator<=(const Rat& a, const Rat& b) { return compare(a, b) <= 0; }
inline bool operator>=(const Rat& a, const Rat& b) { return compare(a, b) >= 0; }
inline bool operator==(const Rat& a, const Rat& b) { return compare(a, b) == 0; }
inline bool operator!=(const Rat& a, const Rat& b) { return compare(a, b) != 0; }

inline Rat combine(const Rat& a, const Rat& b, bool subtract) {
    int256 n = detail::widen(a.num) * detail::widen(b.den);
    int256 m = detail::widen(b.num) * detail::widen(a.den);
    int256 num = subtract ? n - m : n + m;
    int256 den = detail::widen(a.den) * detail::widen(b.den);
    int256 g = boost::multiprecision::gcd(boost::multiprecision::abs(num), den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rat::from_parts128(detail::to_i128_checked(num), detail::to_i128_checked(den));
}

inline Rat operator+(const Rat& a, const Rat& b) { return combine(a, b, false); }
inline Rat operator-(const Rat& a, const Rat& b) { return combine(a, b, true); }

inline Rat operator*(const Rat& a, const Rat& b) {
    int256 num = detail::widen(a.num) * detail::widen(b.num);
    int256 den = detail::widen(a.den) * detail::widen(b.den);
    int256 g = boost::multiprecision::gcd(boost::multiprecision::abs(num), den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rat::from_parts128(detail::to_i128_checked(num), detail::to_i128_checked(den));
}

inline const Rat& rat_min(const Rat& a, const Rat& b) { return b < a ? b : a; }
inline const Rat& rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }

// floor(a): exact, correct for negatives.
inline __int128 rat_floor(const Rat& a) {
    __int128 q = a.num / a.den;
    if (a.num % a.den != 0 && a.num < 0) --q;
    return q;
}

// Exact conversion: every finite double is a dyadic rational.  Restricted to
// |x| < 2^63 and scale 2^-70 to keep denominators small; family endpoints
// live in (0,1) so this is never a constraint in practice.
inline Rat rat_from_double(double x) {
    if (!(x == x) || x > 9.2e18 || x < -9.2e18)
        throw std::domain_error("double out of exact-rational range");
    __int128 num = 0;
    __int128 den = 1;
    double work = x;
    int shifts = 0;
    while (work != static_cast<double>(static_cast<long long>(work))) {
        work *= 2.0;
        ++shifts;
        if (shifts > 70) {
            // Denormal tail beyond 2^-70 is far below every tolerance in this
            // project; round the remainder away rather than grow the storage.
            break;
        }
    }
    num = static_cast<__int128>(static_cast<long long>(work));
    den = static_cast<__int128>(1) << shifts;
    return Rat::from_parts128(num, den);
}

// Power of three, exact up to 3^39 (fits in 64 bits).
inline long long pow3(int k) {
    if (k < 0 || k > 39) throw std::domain_error("3^k out of supported range");
    long long p = 1;
    while (k-- > 0) p *= 3;
    return p;
}

}  // namespace geofinlab
