// Boundary of the hyperbolic plane and cross-ratio distance formulas.
//
// The upper half-plane model has boundary R ∪ {∞}.  Geodesics are recorded
// by their (unordered, in effect) endpoint pairs; the distance between two
// disjoint geodesics is a function of one cross-ratio of the four endpoints.

#pragma once

#include <complex>
#include <utility>

namespace geofinlab::geo {

// A boundary point: a real number or the point at infinity.  Infinity is an
// explicit variant, not a sentinel double, so arithmetic on it can't leak in.
struct BoundaryPoint {
    bool infinite = false;
    double v = 0.0;

    BoundaryPoint() = default;
    BoundaryPoint(double x) : infinite(false), v(x) {}  // implicit on purpose

    static BoundaryPoint inf() {
        BoundaryPoint p;
        p.infinite = true;
        return p;
    }

    friend bool operator==(const BoundaryPoint& a, const BoundaryPoint& b) {
        if (a.infinite || b.infinite) return a.infinite && b.infinite;
        return a.v == b.v;
    }
};

// Cross-ratio [a,b;c,d] = (a-c)(b-d) / ((a-d)(b-c)).
//
// When exactly one argument is ∞ the two factors containing it cancel in the
// limit; coincident arguments are a degenerate configuration and rejected.
// Invariant under Möbius transformations (exactly, as a function; to float
// precision numerically).
double cross_ratio(BoundaryPoint a, BoundaryPoint b, BoundaryPoint c, BoundaryPoint d);

// Real Möbius action z ↦ (az+b)/(cz+d) on boundary points, det(g) != 0.
struct RealMobius {
    double a = 1, b = 0, c = 0, d = 1;
};

BoundaryPoint mobius(const RealMobius& g, BoundaryPoint z);
std::complex<double> mobius(const RealMobius& g, std::complex<double> z);

// A geodesic, stored by its two boundary endpoints.
struct GeodesicLine {
    BoundaryPoint x;  // endpoint listed first
    BoundaryPoint y;  // endpoint listed second
};

// Distance between two geodesics.
//
// For disjoint, non-asymptotic lines the value is d with
//     sinh²(d/2) = |[x₁, x₂; y₂, y₁]|,
// i.e. d = 2·asinh(√|cr|) under the consistent endpoint-labeling convention
// (the cross-ratio is then negative).  If the caller labels one line's
// endpoints in the opposite sense, the same cross-ratio comes out as
// cosh²(d/2) > 1 instead; both cases are recognized, so the result does not
// depend on labeling.  Intersecting or asymptotic lines (shared endpoint or
// interleaved endpoints; the cross-ratio then falls in [0,1]) return zero
// with `degenerate` set instead of a throw.
struct LineDistanceResult {
    double distance = 0.0;
    bool degenerate = false;  // lines intersect or are asymptotic
};

LineDistanceResult line_distance(const GeodesicLine& l1, const GeodesicLine& l2);

}  // namespace geofinlab::geo
