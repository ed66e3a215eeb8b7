#include "geofinlab/boundary.hpp"

#include <cmath>
#include <stdexcept>

namespace geofinlab::geo {

namespace {

int count_infinite(const BoundaryPoint* pts, int n) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += pts[i].infinite ? 1 : 0;
    return k;
}

// Angle coordinate on the boundary circle: R ∪ {∞} → (-π, π], with ∞ ↦ π.
// Monotone in the counterclockwise orientation of the boundary of the upper
// half-plane, which makes circular-order tests painless.
double circle_angle(BoundaryPoint p) {
    if (p.infinite) return 3.14159265358979323846;
    return 2.0 * std::atan(p.v);
}

// True if p lies strictly inside the counterclockwise arc from `from` to `to`.
bool in_ccw_arc(BoundaryPoint p, BoundaryPoint from, BoundaryPoint to) {
    double a = circle_angle(from), b = circle_angle(to), x = circle_angle(p);
    // Rotate so the arc starts at zero.
    auto wrap = [](double t) {
        const double two_pi = 6.28318530717958647692;
        while (t <= 0.0) t += two_pi;
        while (t > two_pi) t -= two_pi;
        return t;
    };
    double span = wrap(b - a);
    double off = wrap(x - a);
    return off > 0.0 && off < span;
}

}  // namespace

double cross_ratio(BoundaryPoint a, BoundaryPoint b, BoundaryPoint c, BoundaryPoint d) {
    const BoundaryPoint pts[4] = {a, b, c, d};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (pts[i] == pts[j])
                throw std::domain_error("cross_ratio: coincident boundary points");
    int ninf = count_infinite(pts, 4);
    if (ninf > 1) throw std::domain_error("cross_ratio: more than one infinite point");

    // (a-c)(b-d) / ((a-d)(b-c)); with one point at ∞ the two factors that
    // contain it tend to a common ratio of 1 and drop out.
    if (a.infinite) return (b.v - d.v) / (b.v - c.v);
    if (b.infinite) return (a.v - c.v) / (a.v - d.v);
    if (c.infinite) return (b.v - d.v) / (a.v - d.v);
    if (d.infinite) return (a.v - c.v) / (b.v - c.v);
    return ((a.v - c.v) * (b.v - d.v)) / ((a.v - d.v) * (b.v - c.v));
}

BoundaryPoint mobius(const RealMobius& g, BoundaryPoint z) {
    double det = g.a * g.d - g.b * g.c;
    if (det == 0.0) throw std::domain_error("mobius: singular coefficient matrix");
    if (z.infinite) {
        if (g.c == 0.0) return BoundaryPoint::inf();
        return BoundaryPoint(g.a / g.c);
    }
    double denom = g.c * z.v + g.d;
    if (denom == 0.0) return BoundaryPoint::inf();
    return BoundaryPoint((g.a * z.v + g.b) / denom);
}

std::complex<double> mobius(const RealMobius& g, std::complex<double> z) {
    return (g.a * z + g.b) / (g.c * z + g.d);
}

LineDistanceResult line_distance(const GeodesicLine& l1, const GeodesicLine& l2) {
    // Shared endpoint → asymptotic.
    if (l1.x == l2.x || l1.x == l2.y || l1.y == l2.x || l1.y == l2.y)
        return {0.0, true};
    // Interleaved endpoints → the geodesics cross.  Exactly one endpoint of
    // l2 inside the arc (l1.x → l1.y) does it.
    int inside = (in_ccw_arc(l2.x, l1.x, l1.y) ? 1 : 0) + (in_ccw_arc(l2.y, l1.x, l1.y) ? 1 : 0);
    if (inside == 1) return {0.0, true};

    double u = cross_ratio(l1.x, l2.x, l2.y, l1.y);
    // Consistently labeled disjoint lines give u = -sinh²(d/2); flipping one
    // line's labels turns the same configuration into u = cosh²(d/2).
    if (u < 0.0) return {2.0 * std::asinh(std::sqrt(-u)), false};
    if (u > 1.0) return {2.0 * std::acosh(std::sqrt(u)), false};
    // Numerically collapsed (nearly asymptotic) configurations land in [0,1].
    return {0.0, true};
}

}  // namespace geofinlab::geo
