#pragma once

// Avoidance sets in (0,1): families of separated open intervals, the nested
// triadic sampler that dodges them, exact path-probability trees, and
// box-counting dimension estimates for the leftover set
//
//     D = [0,1] \ union of the family intervals.
//
// A family carries its separation parameter aprime (written A' below), the
// threshold that the two cross-ratio-style quantities must clear:
//
//   single interval:  x(1-y)/(y-x)                                >= A'
//   ordered pair:     (x2-y1)(y2-x1) / ((y1-x1)(y2-x2))           >= A'
//
// Both are Moebius-invariant quantities of the boundary configuration
// {0, 1, x, y}; for intervals cut out by geodesic lines at pairwise distance
// d they equal sinh(d/2)^2.  All interval decisions (overlap thresholds,
// nesting invariants, survival counts) are made in exact rational
// arithmetic; doubles appear only in reported quantities.

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geofinlab/boundary.hpp"
#include "geofinlab/rational.hpp"

namespace geofinlab {

// Thrown when a structural invariant that the construction guarantees is
// found broken at runtime (e.g. two blocking intervals for one triadic
// interval, which the separation threshold is supposed to exclude).
struct invariant_violation : std::logic_error {
    using std::logic_error::logic_error;
};

// Open interval (x, y).  Endpoints are exact rationals; every constructor
// path bounds denominators by 1e9 so downstream cross-multiplications stay
// well inside 128/256-bit headroom.
struct Interval {
    Rat x, y;
};

struct IntervalFamily {
    std::vector<Interval> intervals;  // sorted by left endpoint, pairwise disjoint
    double aprime = 0.0;              // separation parameter A'
};

// Validates 0 < x < y < 1 and pairwise disjointness (open intervals), sorts
// by left endpoint.  Throws std::invalid_argument on structural violations.
// The separation conditions are *not* enforced here; use check_separation.
IntervalFamily make_family(std::vector<Interval> intervals, double aprime);

// Boundary-interval family cut out by disjoint geodesic lines: the first
// line is normalized to endpoints {0, 1} with `base` inside the half-disk it
// bounds, and each remaining line contributes the interval between its
// endpoint images.  aprime is set to the smallest separation quantity
// observed (infinity for an empty family).  Throws std::invalid_argument if
// lines intersect, if base lies on a line, or if some line does not face the
// normalized side.
IntervalFamily family_from_lines(const std::vector<geo::GeodesicLine>& lines,
                                 std::complex<double> base);

// Deterministic synthetic family generator: `count` intervals on a fine
// grid, sized so the separation conditions hold with margin, then
// re-verified with check_separation.  Requires aprime > 5000, count >= 1.
// Throws std::runtime_error if rejection sampling cannot place the points.
IntervalFamily synth_family(double aprime, int count, std::uint64_t seed);

namespace detail {
// Same generator with a caller-chosen admissibility floor on aprime; used by
// randomized property searches that probe thresholds below the production
// floor of 5000.
IntervalFamily synth_family_with_floor(double aprime, int count, std::uint64_t seed,
                                       double min_aprime);
}  // namespace detail

struct SeparationViolation {
    int first = -1;         // interval index
    int second = -1;        // partner index for pair violations, -1 for single
    double quantity = 0.0;  // the offending quantity
};

struct SeparationReport {
    bool ok = true;
    std::vector<SeparationViolation> violations;
};

// Evaluates the single-interval and ordered-pair separation quantities
// against family.aprime.  Comparisons are exact (arbitrary-precision
// integers); the reported quantity values are doubles.
SeparationReport check_separation(const IntervalFamily& family);

// The closed triadic interval [index/3^level, (index+1)/3^level].
struct TriadicInterval {
    int level = 0;
    long long index = 0;
};

struct Classification {
    bool regular = true;
    int blocker = -1;  // index into family.intervals when irregular
};

// Regular iff every family interval meets J in measure < 3^(-level-2);
// otherwise returns the unique interval with overlap in
// [3^(-level-2), 3^(-level-1)).  Requires J to satisfy the nesting invariant
// (all overlaps < 3^(-level-1)); violations of it throw
// std::invalid_argument.  Two blockers throw invariant_violation (excluded
// by the separation threshold whenever aprime > 99).
Classification classify_interval(const TriadicInterval& j, const IntervalFamily& family);

struct LevelRecord {
    bool regular = true;
    std::int32_t blocker = -1;
};

struct TriadicPath {
    int depth = 0;
    Rat a;                          // left endpoint of the final interval
    std::string choices;            // digits '0','1','2', one per level
    std::vector<LevelRecord> flags; // classification of J_k for k = 0..depth-1
};

// Samples J_0 = [0,1] superset J_1 superset ... superset J_depth, choosing a
// uniform third at regular levels and a uniform admissible (blocker-
// disjoint) third at irregular levels.  Every level is assert-checked
// against the nesting invariant.  Requires family.aprime > 5000 and
// depth <= 30.  Deterministic in seed.
TriadicPath sample_path(const IntervalFamily& family, int depth, std::uint64_t seed);

// Batch sampler: path i is drawn from an independent stream keyed by
// (seed, i), so results are reproducible and thread-count independent.
std::vector<TriadicPath> sample_paths(const IntervalFamily& family, int depth,
                                      long long count, std::uint64_t seed, int threads = 0);

// Single path from stream `stream` of the batch keying: equal to
// sample_paths(...)[stream], letting callers replay one path (for example
// to re-raise its invariant_violation) without drawing the whole batch.
TriadicPath sample_path_stream(const IntervalFamily& family, int depth,
                               std::uint64_t seed, std::uint64_t stream);

// True iff the final interval of the path is not contained in any family
// interval — the depth-limited certificate that the limit point avoids the
// family.  (Containment would force every point of J, including the limit,
// inside one interval.)
bool avoids_all_at_resolution(const TriadicPath& path, const IntervalFamily& family);

// 3^(-(1 - 1/A'')m + 1) with A'' = log3(aprime) - 5; the distribution of the
// sampled level-m interval is dominated pointwise by this bound.  Requires
// A'' > 2 (domain error otherwise).
double path_probability_bound(int m, double aprime);

// 1 - 1/A'': the dimension lower bound certified by the probability bound.
// Requires A'' > 2 (domain error otherwise).
double dim_lower_bound(double aprime);

struct TreeNodeProb {
    long long index = 0;
    Rat prob;
};

struct TreeReport {
    int levels = 0;
    // level_probs[m] lists the reachable level-m intervals with exact
    // probabilities, sorted by index.
    std::vector<std::vector<TreeNodeProb>> level_probs;
    std::vector<double> level_max_prob;  // convenience: max probability per level
    long long irregular_nodes = 0;       // reachable irregular nodes, levels < `levels`
    bool sums_to_one = true;             // exact per-level mass check
};

// Exhaustive expansion of the sampler's distribution down to `levels`
// (requires levels <= 12; the tree has at most 3^levels leaves).
TreeReport path_tree_probabilities(const IntervalFamily& family, int levels);

struct DoubleBlockWitness {
    TriadicInterval j;
    int first = -1;   // family indices of the two blockers
    int second = -1;
};

// Searches for a triadic interval, satisfying the nesting invariant, that
// has two blocking family intervals.  Returns the first witness in
// deterministic order, or nullopt.  For families passing check_separation
// with aprime > 99 this must come back empty.
std::optional<DoubleBlockWitness> find_double_block(const IntervalFamily& family);

struct DimensionReport {
    double lower_bound = 0.0;   // 1 - 1/A'' when defined, NaN otherwise
    double box_estimate = 0.0;  // least-squares slope of log3(count) over the last half
    int depth = 0;
    std::vector<long long> surviving_counts;  // per level 0..depth
};

// Counts, at each level k <= depth, the closed triadic intervals not
// contained in any family interval (exact integer counting in closed form),
// and fits the growth exponent over the last half of the levels.
// Requires depth <= 20 (resource error above).
DimensionReport box_dimension_estimate(const IntervalFamily& family, int depth);

// The removed middle thirds of the classical Cantor construction, through
// `generations` levels — a control family for the box-counting estimator.
// Closed boxes touching the set only at removed-interval endpoints still
// count, so the survivor counts are 5*2^(k-1) - 2 for 1 <= k <= generations
// (not the naive 2^k), with the same growth exponent log3(2).
IntervalFamily middle_thirds_family(int generations);

}  // namespace geofinlab
