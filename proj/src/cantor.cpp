#include "geofinlab/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "geofinlab/parallel.hpp"
#include "geofinlab/rng.hpp"

namespace geofinlab {

using geo::BoundaryPoint;
using geo::GeodesicLine;
using geo::RealMobius;

namespace {

using bigint = boost::multiprecision::cpp_int;

// Denominator cap for family endpoints.  Keeps every cross-multiplication in
// the hot path (interval stabbing, overlap thresholds against powers of 3 up
// to 3^38) inside the 256-bit comparison headroom of Rat with a wide margin.
const __int128 kMaxEndpointDen = (__int128)1 << 40;

bigint big(__int128 v) {
    bool neg = v < 0;
    unsigned __int128 u = neg ? (unsigned __int128)(-(v + 1)) + 1u : (unsigned __int128)v;
    bigint r = (std::uint64_t)(u >> 64);
    r <<= 64;
    r += (std::uint64_t)u;
    return neg ? bigint(-r) : r;
}

double big_ratio(const bigint& num, const bigint& den) {
    if (den.is_zero()) return std::numeric_limits<double>::infinity();
    return num.convert_to<double>() / den.convert_to<double>();
}

// x(1-y)/(y-x) as an exact fraction; the x_den*y_den factors cancel.
void single_quantity(const Interval& iv, bigint& num, bigint& den) {
    num = big(iv.x.num) * (big(iv.y.den) - big(iv.y.num));
    den = big(iv.y.num) * big(iv.x.den) - big(iv.x.num) * big(iv.y.den);
}

// (a - b) as an exact fraction pair.
void diff(const Rat& a, const Rat& b, bigint& num, bigint& den) {
    num = big(a.num) * big(b.den) - big(b.num) * big(a.den);
    den = big(a.den) * big(b.den);
}

// (x2-y1)(y2-x1) / ((y1-x1)(y2-x2)) for left interval u, right interval w.
void pair_quantity(const Interval& u, const Interval& w, bigint& num, bigint& den) {
    bigint n1, d1, n2, d2, n3, d3, n4, d4;
    diff(w.x, u.y, n1, d1);
    diff(w.y, u.x, n2, d2);
    diff(u.y, u.x, n3, d3);
    diff(w.y, w.x, n4, d4);
    num = n1 * n2 * d3 * d4;
    den = d1 * d2 * n3 * n4;
}

// Exact q >= threshold for positive-denominator fractions.
bool quantity_at_least(const bigint& num, const bigint& den, const Rat& threshold) {
    return num * big(threshold.den) >= big(threshold.num) * den;
}

// Overlap length of the open interval iv with the closed interval [a,b];
// values <= 0 mean the interiors are disjoint.
Rat overlap_length(const Interval& iv, const Rat& a, const Rat& b) {
    return rat_min(iv.y, b) - rat_max(iv.x, a);
}

struct Scan {
    bool nesting_ok = true;  // all overlaps < 3^-(level+1)
    int nesting_idx = -1;
    int blockers[2] = {-1, -1};
    int blocker_count = 0;  // overlaps >= 3^-(level+2)
};

// Classifies the closed triadic interval [index/3^level, (index+1)/3^level]
// against the family.  Intervals are sorted and disjoint, so the ones
// meeting J form a contiguous run located by binary search.
Scan scan_interval(const IntervalFamily& fam, int level, long long index) {
    const Rat a(index, pow3(level));
    const Rat b(index + 1, pow3(level));
    const Rat nest_threshold(1, pow3(level + 1));
    const Rat block_threshold(1, pow3(level + 2));

    auto first = std::partition_point(fam.intervals.begin(), fam.intervals.end(),
                                      [&](const Interval& iv) { return iv.y <= a; });
    Scan s;
    for (auto it = first; it != fam.intervals.end() && it->x < b; ++it) {
        Rat ov = overlap_length(*it, a, b);
        if (!(Rat(0) < ov)) continue;
        int idx = int(it - fam.intervals.begin());
        if (!(ov < nest_threshold)) {
            s.nesting_ok = false;
            s.nesting_idx = idx;
            return s;
        }
        if (!(ov < block_threshold)) {
            if (s.blocker_count < 2) s.blockers[s.blocker_count] = idx;
            ++s.blocker_count;
        }
    }
    return s;
}

// Children of node `index` at `level` whose closure is disjoint from the
// blocking interval.  An overlap of length < 3^-(level+1) cannot meet all
// three child interiors (that would need length > one child), so at least
// one child survives whenever the nesting invariant holds.
int admissible_children(const Interval& blocker, int level, long long index, int out[3]) {
    const long long child_den = pow3(level + 1);
    int n = 0;
    for (int d = 0; d < 3; ++d) {
        const long long m = 3 * index + d;
        Rat ov = overlap_length(blocker, Rat(m, child_den), Rat(m + 1, child_den));
        if (!(Rat(0) < ov)) out[n++] = d;
    }
    return n;
}

void check_root_invariant(const IntervalFamily& family, const char* who) {
    Scan s = scan_interval(family, 0, 0);
    if (!s.nesting_ok)
        throw std::invalid_argument(std::string(who) +
                                    ": family interval " + std::to_string(s.nesting_idx) +
                                    " has length >= 1/3; the nested construction cannot start");
}

std::string level_msg(const char* who, const char* what, int level, long long index) {
    return std::string(who) + ": " + what + " at level " + std::to_string(level) +
           ", interval index " + std::to_string(index);
}

TriadicPath sample_path_impl(const IntervalFamily& family, int depth, Rng& rng) {
    TriadicPath path;
    path.depth = depth;
    path.choices.reserve((size_t)depth);
    path.flags.reserve((size_t)depth);
    long long index = 0;
    for (int level = 0; level < depth; ++level) {
        Scan s = scan_interval(family, level, index);
        if (!s.nesting_ok)
            throw invariant_violation(level_msg("sample_path", "recursive length invariant broken",
                                                level, index));
        if (s.blocker_count >= 2)
            throw invariant_violation(level_msg("sample_path", "two blocking intervals",
                                                level, index));
        int digit;
        if (s.blocker_count == 0) {
            path.flags.push_back({true, -1});
            digit = (int)rng.below(3);
        } else {
            path.flags.push_back({false, (std::int32_t)s.blockers[0]});
            int adm[3];
            int nadm = admissible_children(family.intervals[(size_t)s.blockers[0]], level, index, adm);
            if (nadm == 0)
                throw invariant_violation(level_msg("sample_path", "no admissible child",
                                                    level, index));
            digit = adm[rng.below((std::uint64_t)nadm)];
        }
        path.choices.push_back(char('0' + digit));
        index = 3 * index + digit;
    }
    path.a = Rat(index, pow3(depth));
    return path;
}

void require_samplable(const IntervalFamily& family, const char* who) {
    if (!(family.aprime > 5000.0))
        throw std::invalid_argument(std::string(who) +
                                    ": separation parameter must exceed 5000 for sampling");
    check_root_invariant(family, who);
}

}  // namespace

IntervalFamily make_family(std::vector<Interval> intervals, double aprime) {
    if (!(aprime > 0.0))
        throw std::invalid_argument("make_family: separation parameter must be positive");
    if (!std::isfinite(aprime) && !intervals.empty())
        throw std::invalid_argument("make_family: non-finite separation parameter");
    const Rat zero(0), one(1);
    for (const Interval& iv : intervals) {
        if (!(zero < iv.x) || !(iv.x < iv.y) || !(iv.y < one))
            throw std::invalid_argument("make_family: intervals must satisfy 0 < x < y < 1");
        if (iv.x.den > kMaxEndpointDen || iv.y.den > kMaxEndpointDen)
            throw std::invalid_argument("make_family: endpoint denominator exceeds 2^40");
    }
    std::sort(intervals.begin(), intervals.end(), [](const Interval& u, const Interval& w) {
        if (u.x < w.x) return true;
        if (w.x < u.x) return false;
        return u.y < w.y;
    });
    for (size_t i = 1; i < intervals.size(); ++i) {
        if (!(intervals[i - 1].y <= intervals[i].x))
            throw std::invalid_argument("make_family: intervals " + std::to_string(i - 1) +
                                        " and " + std::to_string(i) + " are not disjoint");
    }
    IntervalFamily fam;
    fam.intervals = std::move(intervals);
    fam.aprime = aprime;
    return fam;
}

SeparationReport check_separation(const IntervalFamily& family) {
    SeparationReport rep;
    const auto& ivs = family.intervals;
    if (ivs.empty()) return rep;
    if (!std::isfinite(family.aprime) || !(family.aprime > 0.0))
        throw std::invalid_argument("check_separation: separation parameter must be positive and finite");
    const Rat threshold = rat_from_double(family.aprime);
    bigint num, den;
    for (size_t i = 0; i < ivs.size(); ++i) {
        single_quantity(ivs[i], num, den);
        if (!quantity_at_least(num, den, threshold))
            rep.violations.push_back({(int)i, -1, big_ratio(num, den)});
    }
    for (size_t i = 0; i + 1 < ivs.size(); ++i) {
        for (size_t j = i + 1; j < ivs.size(); ++j) {
            pair_quantity(ivs[i], ivs[j], num, den);
            if (!quantity_at_least(num, den, threshold))
                rep.violations.push_back({(int)i, (int)j, big_ratio(num, den)});
        }
    }
    rep.ok = rep.violations.empty();
    return rep;
}

IntervalFamily family_from_lines(const std::vector<GeodesicLine>& lines,
                                 std::complex<double> base) {
    if (lines.empty())
        throw std::invalid_argument("family_from_lines: need a reference line");
    if (!(base.imag() > 0.0))
        throw std::invalid_argument("family_from_lines: base point must lie in the upper half plane");

    // Orientation-preserving normalization sending the reference endpoints
    // (a, b) to (1, 0).  Each branch has positive determinant.
    const BoundaryPoint pa = lines[0].x;
    const BoundaryPoint pb = lines[0].y;
    RealMobius t;
    if (!pa.infinite && !pb.infinite) {
        if (pa.v == pb.v)
            throw std::invalid_argument("family_from_lines: reference line is degenerate");
        const double s = pb.v > pa.v ? 1.0 : -1.0;  // det = s(b-a) = |b-a|
        t = {1.0, -pb.v, 1.0 + s, -pb.v - s * pa.v};
    } else if (pa.infinite && pb.infinite) {
        throw std::invalid_argument("family_from_lines: reference line is degenerate");
    } else if (pa.infinite) {
        t = {1.0, -pb.v, 1.0, -(pb.v - 1.0)};
    } else {
        t = {0.0, 1.0, -1.0, pa.v + 1.0};
    }

    // The base must see the reference line as the geodesic over (0,1) from
    // inside the half-disk |z - 1/2| < 1/2.  If it lands outside, conjugate
    // by the half-turn about the geodesic's apex, z -> (1-z)/(1-2z), which
    // fixes {0,1} and swaps the two sides.
    std::complex<double> w = mobius(t, base);
    if (std::abs(w - std::complex<double>(0.5, 0.0)) >= 0.5) {
        const RealMobius half_turn{1.0, -1.0, 2.0, -1.0};
        t = {half_turn.a * t.a + half_turn.b * t.c, half_turn.a * t.b + half_turn.b * t.d,
             half_turn.c * t.a + half_turn.d * t.c, half_turn.c * t.b + half_turn.d * t.d};
        w = mobius(t, base);
        if (std::abs(w - std::complex<double>(0.5, 0.0)) >= 0.5)
            throw std::invalid_argument("family_from_lines: base point lies on the reference line");
    }

    std::vector<Interval> intervals;
    intervals.reserve(lines.size() - 1);
    for (size_t i = 1; i < lines.size(); ++i) {
        const BoundaryPoint u = mobius(t, lines[i].x);
        const BoundaryPoint v = mobius(t, lines[i].y);
        if (u.infinite || v.infinite)
            throw std::invalid_argument("family_from_lines: line " + std::to_string(i) +
                                        " passes through the reference endpoint");
        const double lo = std::min(u.v, v.v);
        const double hi = std::max(u.v, v.v);
        if (!(lo > 0.0) || !(hi < 1.0))
            throw std::invalid_argument("family_from_lines: line " + std::to_string(i) +
                                        " does not face the normalized side");
        // Snap endpoints to the 1e-9 grid so downstream exact arithmetic
        // works with bounded denominators.
        const Rat x((long long)std::llround(lo * 1e9), 1000000000LL);
        const Rat y((long long)std::llround(hi * 1e9), 1000000000LL);
        if (!(x < y) || !(Rat(0) < x) || !(y < Rat(1)))
            throw std::invalid_argument("family_from_lines: line " + std::to_string(i) +
                                        " is degenerate at the supported resolution");
        intervals.push_back({x, y});
    }

    if (intervals.empty()) {
        IntervalFamily fam;
        fam.aprime = std::numeric_limits<double>::infinity();
        return fam;
    }

    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& u, const Interval& w) { return u.x < w.x; });

    // The family's separation parameter is the worst observed quantity.
    double aprime = std::numeric_limits<double>::infinity();
    bigint num, den;
    for (size_t i = 0; i < intervals.size(); ++i) {
        single_quantity(intervals[i], num, den);
        aprime = std::min(aprime, big_ratio(num, den));
        for (size_t j = i + 1; j < intervals.size(); ++j) {
            pair_quantity(intervals[i], intervals[j], num, den);
            aprime = std::min(aprime, big_ratio(num, den));
        }
    }
    if (!(aprime > 0.0))
        throw std::invalid_argument("family_from_lines: lines are not separated");
    return make_family(std::move(intervals), aprime);
}

namespace detail {

IntervalFamily synth_family_with_floor(double aprime, int count, std::uint64_t seed,
                                       double min_aprime) {
    if (!std::isfinite(aprime) || !(aprime > min_aprime))
        throw std::invalid_argument("synth_family: separation parameter must exceed " +
                                    std::to_string(min_aprime));
    if (aprime > 1e6)
        throw std::invalid_argument("synth_family: separation parameter above 1e6 would "
                                    "collapse intervals below the endpoint grid");
    if (count < 1) throw std::invalid_argument("synth_family: count must be >= 1");
    if (count > 500) throw std::length_error("synth_family: count capped at 500");

    Rng rng(seed, 0);

    // Centers on the 1e-6 grid in [0.1, 0.9], at least 1e-3 apart (in micro
    // units: [100000, 900000], spacing >= 1000).
    std::vector<long long> centers;
    centers.reserve((size_t)count);
    int rejections = 0;
    while ((int)centers.size() < count) {
        const long long c = 100000 + (long long)rng.below(800001);
        bool ok = true;
        for (long long e : centers) {
            if (std::llabs(e - c) < 1000) {
                ok = false;
                break;
            }
        }
        if (ok) {
            centers.push_back(c);
        } else if (++rejections > 10000) {
            throw std::runtime_error("synth_family: could not place separated centers");
        }
    }
    std::sort(centers.begin(), centers.end());

    // Half-width h around center c with nearest-neighbor distance g:
    //   h <= c(1-c)/(8A')  makes the single quantity (c-h)(1-c-h)/(2h) ~ 4A',
    //   h <= g/sqrt(8A')   makes every pair quantity >= ~(g^2/4h^2) ~ 2A'.
    // Rounding h down to the 1e-9 grid only enlarges the quantities.
    std::vector<Interval> intervals;
    intervals.reserve((size_t)count);
    for (size_t i = 0; i < centers.size(); ++i) {
        const double c = (double)centers[i] * 1e-6;
        double gap = std::numeric_limits<double>::infinity();
        if (i > 0) gap = std::min(gap, (double)(centers[i] - centers[i - 1]) * 1e-6);
        if (i + 1 < centers.size()) gap = std::min(gap, (double)(centers[i + 1] - centers[i]) * 1e-6);
        double h = c * (1.0 - c) / (8.0 * aprime);
        if (std::isfinite(gap)) h = std::min(h, gap / std::sqrt(8.0 * aprime));
        const long long h_nano = (long long)std::floor(h * 1e9);
        if (h_nano < 1)
            throw std::runtime_error("synth_family: interval collapsed below the endpoint grid");
        const long long c_nano = centers[i] * 1000;
        intervals.push_back({Rat(c_nano - h_nano, 1000000000LL), Rat(c_nano + h_nano, 1000000000LL)});
    }

    IntervalFamily fam = make_family(std::move(intervals), aprime);
    SeparationReport rep = check_separation(fam);
    if (!rep.ok)
        throw std::runtime_error("synth_family: generated family fails the exact separation check");
    return fam;
}

}  // namespace detail

IntervalFamily synth_family(double aprime, int count, std::uint64_t seed) {
    return detail::synth_family_with_floor(aprime, count, seed, 5000.0);
}

Classification classify_interval(const TriadicInterval& j, const IntervalFamily& family) {
    if (j.level < 0 || j.level > 36)
        throw std::invalid_argument("classify_interval: level must be in [0, 36]");
    if (j.index < 0 || j.index >= pow3(j.level))
        throw std::invalid_argument("classify_interval: index out of range for level");
    Scan s = scan_interval(family, j.level, j.index);
    if (!s.nesting_ok)
        throw std::invalid_argument(level_msg("classify_interval",
                                              "overlap breaks the nesting invariant",
                                              j.level, j.index) +
                                    " (family interval " + std::to_string(s.nesting_idx) + ")");
    if (s.blocker_count >= 2)
        throw invariant_violation(level_msg("classify_interval", "two blocking intervals",
                                            j.level, j.index));
    if (s.blocker_count == 1) return {false, s.blockers[0]};
    return {true, -1};
}

TriadicPath sample_path(const IntervalFamily& family, int depth, std::uint64_t seed) {
    require_samplable(family, "sample_path");
    if (depth < 1) throw std::invalid_argument("sample_path: depth must be >= 1");
    if (depth > 30) throw std::length_error("sample_path: depth capped at 30");
    Rng rng(seed, 0);
    return sample_path_impl(family, depth, rng);
}

TriadicPath sample_path_stream(const IntervalFamily& family, int depth,
                               std::uint64_t seed, std::uint64_t stream) {
    require_samplable(family, "sample_path_stream");
    if (depth < 1) throw std::invalid_argument("sample_path_stream: depth must be >= 1");
    if (depth > 30) throw std::length_error("sample_path_stream: depth capped at 30");
    Rng rng(seed, stream);
    return sample_path_impl(family, depth, rng);
}

std::vector<TriadicPath> sample_paths(const IntervalFamily& family, int depth,
                                      long long count, std::uint64_t seed, int threads) {
    require_samplable(family, "sample_paths");
    if (depth < 1) throw std::invalid_argument("sample_paths: depth must be >= 1");
    if (depth > 30) throw std::length_error("sample_paths: depth capped at 30");
    if (count < 0) throw std::invalid_argument("sample_paths: count must be >= 0");
    if (count > 10'000'000) throw std::length_error("sample_paths: count capped at 1e7");
    std::vector<TriadicPath> out((size_t)count);
    parallel_for((size_t)count, threads, [&](size_t i) {
        Rng rng(seed, (std::uint64_t)i);
        out[i] = sample_path_impl(family, depth, rng);
    });
    return out;
}

bool avoids_all_at_resolution(const TriadicPath& path, const IntervalFamily& family) {
    const Rat& a = path.a;
    const Rat b = a + Rat(1, pow3(path.depth));
    for (const Interval& iv : family.intervals) {
        if (iv.x < a && b < iv.y) return false;
    }
    return true;
}

double path_probability_bound(int m, double aprime) {
    if (m < 0) throw std::invalid_argument("path_probability_bound: level must be >= 0");
    if (!std::isfinite(aprime) || !(aprime > 0.0))
        throw std::invalid_argument("path_probability_bound: separation parameter must be positive");
    const double a2 = std::log(aprime) / std::log(3.0) - 5.0;
    if (!(a2 > 2.0))
        throw std::domain_error("path_probability_bound: requires log3(aprime) - 5 > 2");
    return std::pow(3.0, -(1.0 - 1.0 / a2) * (double)m + 1.0);
}

double dim_lower_bound(double aprime) {
    if (!std::isfinite(aprime) || !(aprime > 0.0))
        throw std::invalid_argument("dim_lower_bound: separation parameter must be positive");
    const double a2 = std::log(aprime) / std::log(3.0) - 5.0;
    if (!(a2 > 2.0))
        throw std::domain_error("dim_lower_bound: requires log3(aprime) - 5 > 2");
    return 1.0 - 1.0 / a2;
}

TreeReport path_tree_probabilities(const IntervalFamily& family, int levels) {
    if (levels < 0) throw std::invalid_argument("path_tree_probabilities: levels must be >= 0");
    if (levels > 12) throw std::length_error("path_tree_probabilities: levels capped at 12");
    check_root_invariant(family, "path_tree_probabilities");

    TreeReport rep;
    rep.levels = levels;
    rep.level_probs.push_back({{0, Rat(1)}});
    for (int level = 0; level < levels; ++level) {
        const auto& cur = rep.level_probs.back();
        std::vector<TreeNodeProb> next;
        next.reserve(cur.size() * 3);
        for (const TreeNodeProb& node : cur) {
            Scan s = scan_interval(family, level, node.index);
            if (!s.nesting_ok)
                throw invariant_violation(level_msg("path_tree_probabilities",
                                                    "recursive length invariant broken",
                                                    level, node.index));
            if (s.blocker_count >= 2)
                throw invariant_violation(level_msg("path_tree_probabilities",
                                                    "two blocking intervals",
                                                    level, node.index));
            if (s.blocker_count == 0) {
                const Rat p = node.prob * Rat(1, 3);
                for (int d = 0; d < 3; ++d) next.push_back({3 * node.index + d, p});
            } else {
                ++rep.irregular_nodes;
                int adm[3];
                const int nadm = admissible_children(family.intervals[(size_t)s.blockers[0]],
                                                     level, node.index, adm);
                if (nadm == 0)
                    throw invariant_violation(level_msg("path_tree_probabilities",
                                                        "no admissible child",
                                                        level, node.index));
                const Rat p = node.prob * Rat(1, nadm);
                for (int k = 0; k < nadm; ++k) next.push_back({3 * node.index + adm[k], p});
            }
        }
        rep.level_probs.push_back(std::move(next));
    }
    // Triadic children have unique parents, so each level's entries are
    // distinct and (being generated in index order) already sorted; the mass
    // must sum to exactly 1.
    const Rat one(1);
    for (const auto& lvl : rep.level_probs) {
        Rat sum(0);
        double mx = 0.0;
        for (const TreeNodeProb& n : lvl) {
            sum = sum + n.prob;
            mx = std::max(mx, n.prob.to_double());
        }
        rep.sums_to_one = rep.sums_to_one && (sum == one);
        rep.level_max_prob.push_back(mx);
    }
    return rep;
}

std::optional<DoubleBlockWitness> find_double_block(const IntervalFamily& family) {
    const auto& ivs = family.intervals;
    const int n = (int)ivs.size();
    const double log3 = std::log(3.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            // A doubly blocked triadic interval J at level k must straddle
            // the gap between its two blockers, so 3^-k >= gap, and each
            // blocker needs overlap >= 3^-(k+2), so 3^-(k+2) <= min length.
            // These bracket k up to +-1 of slack; exact scans decide.
            const double len_i = (ivs[(size_t)i].y - ivs[(size_t)i].x).to_double();
            const double len_j = (ivs[(size_t)j].y - ivs[(size_t)j].x).to_double();
            const double min_len = std::min(len_i, len_j);
            const double gap = (ivs[(size_t)j].x - ivs[(size_t)i].y).to_double();
            int k_lo = std::max(0, (int)std::ceil(std::log(1.0 / min_len) / log3) - 3);
            int k_hi = 36;
            if (gap > 0.0)
                k_hi = std::min(36, (int)std::floor(std::log(1.0 / gap) / log3) + 1);
            for (int k = k_lo; k <= k_hi; ++k) {
                const long long w3 = pow3(k);
                const Rat scale(w3);
                // J meets interval i on the left: index < y_i * 3^k;
                // J meets interval j on the right: index > x_j * 3^k - 1.
                long long lo = (long long)rat_floor(ivs[(size_t)j].x * scale) - 1;
                long long hi = (long long)rat_floor(ivs[(size_t)i].y * scale) + 1;
                lo = std::max(lo, 0LL);
                hi = std::min(hi, w3 - 1);
                for (long long idx = lo; idx <= hi; ++idx) {
                    Scan s = scan_interval(family, k, idx);
                    if (!s.nesting_ok) continue;
                    if (s.blocker_count >= 2)
                        return DoubleBlockWitness{{k, idx}, s.blockers[0], s.blockers[1]};
                }
            }
        }
    }
    return std::nullopt;
}

DimensionReport box_dimension_estimate(const IntervalFamily& family, int depth) {
    if (depth < 2) throw std::invalid_argument("box_dimension_estimate: depth must be >= 2");
    if (depth > 20) throw std::length_error("box_dimension_estimate: depth capped at 20");

    DimensionReport rep;
    rep.depth = depth;
    rep.lower_bound = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(family.aprime) && family.aprime > 0.0) {
        const double a2 = std::log(family.aprime) / std::log(3.0) - 5.0;
        if (a2 > 2.0) rep.lower_bound = 1.0 - 1.0 / a2;
    }

    // Level-k triadic intervals contained in the open interval (p/q, r/s):
    // indices j with j > p*3^k/q and j+1 < r*3^k/s.  The family is disjoint,
    // so no triadic interval is counted twice.
    rep.surviving_counts.reserve((size_t)depth + 1);
    for (int k = 0; k <= depth; ++k) {
        const long long w3 = pow3(k);
        __int128 removed = 0;
        for (const Interval& iv : family.intervals) {
            const __int128 lo_num = iv.x.num * (__int128)w3;
            const __int128 jlo = lo_num / iv.x.den + 1;  // endpoints in (0,1): all positive
            const __int128 hi_num = iv.y.num * (__int128)w3;
            const __int128 jhi = (hi_num % iv.y.den == 0) ? hi_num / iv.y.den - 2
                                                          : hi_num / iv.y.den - 1;
            if (jhi >= jlo) removed += jhi - jlo + 1;
        }
        rep.surviving_counts.push_back(w3 - (long long)removed);
    }

    // Least-squares slope of log3(count) against level over the last half of
    // the levels (the early levels see no removals at all for thin families).
    const int k0 = (depth + 1) / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int npts = depth - k0 + 1;
    for (int k = k0; k <= depth; ++k) {
        const long long cnt = rep.surviving_counts[(size_t)k];
        if (cnt <= 0)
            throw std::domain_error("box_dimension_estimate: no surviving intervals at level " +
                                    std::to_string(k));
        const double x = (double)k;
        const double y = std::log((double)cnt) / std::log(3.0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.box_estimate = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
    return rep;
}

IntervalFamily middle_thirds_family(int generations) {
    if (generations < 1)
        throw std::invalid_argument("middle_thirds_family: generations must be >= 1");
    if (generations > 16)
        throw std::length_error("middle_thirds_family: generations capped at 16");
    std::vector<Interval> out;
    out.reserve(((size_t)1 << generations) - 1);
    std::vector<long long> survivors{0};  // indices of closed survivors at the current level
    long long den = 1;
    for (int level = 0; level < generations; ++level) {
        std::vector<long long> next;
        next.reserve(survivors.size() * 2);
        for (long long m : survivors) {
            out.push_back({Rat(3 * m + 1, den * 3), Rat(3 * m + 2, den * 3)});
            next.push_back(3 * m);
            next.push_back(3 * m + 2);
        }
        survivors = std::move(next);
        den *= 3;
    }
    // The separation parameter is a placeholder: this family is a control
    // input for the box-counting estimator, not for the sampler (the first
    // middle third already has quantity 1/3).
    return make_family(std::move(out), 1.0);
}

}  // namespace geofinlab
