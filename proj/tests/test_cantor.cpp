#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "geofinlab/boundary.hpp"
#include "geofinlab/cantor.hpp"
#include "geofinlab/rational.hpp"

using namespace geofinlab;
using geofinlab::geo::GeodesicLine;

namespace {

IntervalFamily tenth_pair(double aprime) {
    // (1/10, 2/10) and (4/10, 7/10): single quantities 0.8 and 0.4, pair
    // quantity (0.4-0.2)(0.7-0.1) / ((0.2-0.1)(0.7-0.4)) = 4.
    return make_family({{Rat(1, 10), Rat(2, 10)}, {Rat(4, 10), Rat(7, 10)}}, aprime);
}

// The two-interval family on the 3^-14 grid whose pair quantity sits just
// above 50: both intervals have length 3^-8 and block the same level-6
// triadic interval [364/729, 365/729].
IntervalFamily tight_pair() {
    const long long d14 = pow3(14);
    return make_family({{Rat::from_parts128(2388494, d14), Rat::from_parts128(2389223, d14)},
                        {Rat::from_parts128(2393701, d14), Rat::from_parts128(2394430, d14)}},
                       50.0);
}

}  // namespace

TEST_CASE("exact rational arithmetic") {
    CHECK(((Rat(1, 3) + Rat(1, 6)) - Rat(1, 2)).is_zero());
    CHECK(Rat(2, 4) == Rat(1, 2));
    CHECK(Rat(1, 3) < Rat(2, 5));
    CHECK(Rat(-1, 2) < Rat(1, 3));
    CHECK((Rat(1, 7) * Rat(7, 3)) == Rat(1, 3));
    CHECK(rat_floor(Rat(7, 3)) == 2);
    CHECK(rat_floor(Rat(6, 3)) == 2);
    CHECK(Rat(3, 4).to_double() == doctest::Approx(0.75));
    // from_parts128 normalizes the sign into the numerator.
    CHECK(Rat::from_parts128(6, -4) == Rat(-3, 2));
    // Doubles are dyadic rationals, so the conversion is exact.
    CHECK(rat_from_double(0.5) == Rat(1, 2));
    CHECK(rat_from_double(0.1).to_double() == 0.1);

    CHECK(pow3(0) == 1);
    CHECK(pow3(3) == 27);
    CHECK(pow3(39) == 4052555153018976267LL);
    CHECK_THROWS_AS(pow3(40), std::domain_error);
    CHECK_THROWS_AS(pow3(-1), std::domain_error);
    CHECK_THROWS_AS(Rat(1, 0), std::domain_error);
}

TEST_CASE("family construction sorts and validates") {
    IntervalFamily fam = make_family({{Rat(1, 2), Rat(3, 5)}, {Rat(1, 10), Rat(1, 5)}}, 7.0);
    CHECK(fam.intervals.size() == 2);
    CHECK(fam.intervals[0].x == Rat(1, 10));  // sorted by left endpoint
    CHECK(fam.aprime == 7.0);

    CHECK_THROWS_AS(make_family({{Rat(1, 2), Rat(1, 2)}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_family({{Rat(0), Rat(1, 2)}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_family({{Rat(1, 2), Rat(3, 2)}}, 1.0), std::invalid_argument);
    // Overlapping intervals.
    CHECK_THROWS_AS(make_family({{Rat(1, 4), Rat(1, 2)}, {Rat(1, 3), Rat(3, 5)}}, 1.0),
                    std::invalid_argument);
    // Endpoint denominators are capped at 2^40.
    CHECK_THROWS_AS(make_family({{Rat(1, 1LL << 41), Rat(1, 2)}}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_family({{Rat(1, 4), Rat(1, 2)}}, -1.0), std::invalid_argument);
}

TEST_CASE("separation quantities are compared exactly") {
    // Single interval (1/4, 1/3): quantity x(1-y)/(y-x) = (1/4)(2/3)/(1/12) = 2.
    IntervalFamily one = make_family({{Rat(1, 4), Rat(1, 3)}}, 2.0);
    CHECK(check_separation(one).ok);  // equality passes: the comparison is exact
    one.aprime = 2.0000001;
    auto rep = check_separation(one);
    REQUIRE_FALSE(rep.ok);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].first == 0);
    CHECK(rep.violations[0].second == -1);
    CHECK(rep.violations[0].quantity == doctest::Approx(2.0));

    // 0.4 as a double is slightly *above* the exact quantity 2/5, so the
    // threshold must be an exactly-representable value below it.
    CHECK(check_separation(tenth_pair(0.375)).ok);
    auto rep1 = check_separation(tenth_pair(0.5));
    REQUIRE(rep1.violations.size() == 1);  // only the 0.4 single fails
    CHECK(rep1.violations[0].first == 1);
    CHECK(rep1.violations[0].quantity == doctest::Approx(0.4));
    CHECK(check_separation(tenth_pair(2.0)).violations.size() == 2);  // both singles
    auto rep5 = check_separation(tenth_pair(5.0));
    CHECK(rep5.violations.size() == 3);  // and the pair
    bool saw_pair = false;
    for (const auto& v : rep5.violations)
        if (v.second >= 0) {
            saw_pair = true;
            CHECK(v.first == 0);
            CHECK(v.second == 1);
            CHECK(v.quantity == doctest::Approx(4.0));
        }
    CHECK(saw_pair);
}

TEST_CASE("family cut out by geodesic lines") {
    // Reference {-1,1} and the far line {-e^10, e^10} seen from 3i.  The
    // normalization z -> (z-1)/(2z) sends +-e^10 to (1 -+ e^-10)/2, so the
    // family is the single interval of half-width e^-10/2 around 1/2, and its
    // separation quantity is sinh^2(d/2) for d = 10 (the two lines are
    // concentric semicircles with log radius ratio 10).
    const double r = std::exp(10.0);
    IntervalFamily fam = family_from_lines({{-1.0, 1.0}, {-r, r}}, {0.0, 3.0});
    REQUIRE(fam.intervals.size() == 1);
    CHECK(fam.intervals[0].x == Rat(499977300, 1000000000));  // snapped to 1e-9
    CHECK(fam.intervals[0].y == Rat(500022700, 1000000000));
    const double sh5 = std::sinh(5.0);
    CHECK(fam.aprime == doctest::Approx(sh5 * sh5).epsilon(1e-5));
    // Cross-check against the line-distance module.
    auto d = geo::line_distance({-1.0, 1.0}, {-r, r});
    double s = std::sinh(d.distance / 2.0);
    CHECK(fam.aprime == doctest::Approx(s * s).epsilon(1e-5));

    // Reversing the reference orientation lands in the half-turn branch but
    // produces the identical family.
    IntervalFamily rev = family_from_lines({{1.0, -1.0}, {-r, r}}, {0.0, 3.0});
    REQUIRE(rev.intervals.size() == 1);
    CHECK(rev.intervals[0].x == fam.intervals[0].x);
    CHECK(rev.intervals[0].y == fam.intervals[0].y);

    // A single line yields the empty family with infinite separation.
    IntervalFamily empty = family_from_lines({{-1.0, 1.0}}, {0.0, 3.0});
    CHECK(empty.intervals.empty());
    CHECK(std::isinf(empty.aprime));

    // Degenerate inputs.
    CHECK_THROWS_AS(family_from_lines({{-1.0, 1.0}, {0.0, 2.0}}, {0.0, 3.0}),
                    std::invalid_argument);  // lines cross
    CHECK_THROWS_AS(family_from_lines({{-1.0, 1.0}, {-r, r}}, {0.0, -3.0}),
                    std::invalid_argument);  // base below the boundary
    CHECK_THROWS_AS(family_from_lines({{-1.0, 1.0}, {-r, r}}, {0.1, 0.1}),
                    std::invalid_argument);  // base inside the unit half-disk
    CHECK_THROWS_AS(family_from_lines({{-1.0, 1.0}, {-r, r}}, {0.0, 1.0}),
                    std::invalid_argument);  // base on the reference line
}

TEST_CASE("triadic classification") {
    const long long d14 = pow3(14);
    IntervalFamily one =
        make_family({{Rat::from_parts128(2388494, d14), Rat::from_parts128(2389223, d14)}},
                    50.0);
    // The interval has length 3^-8 and lies inside [364/729, 365/729], so at
    // level 6 the overlap falls in [3^-8, 3^-7): a blocker.
    auto c6 = classify_interval({6, 364}, one);
    CHECK_FALSE(c6.regular);
    CHECK(c6.blocker == 0);
    // One level up the same overlap is below the 3^-7 blocker threshold.
    auto c5 = classify_interval({5, 121}, one);
    CHECK(c5.regular);
    CHECK(classify_interval({6, 0}, one).regular);

    // Nesting violation: a family interval covering a third of J.
    IntervalFamily wide = make_family({{Rat(3, 10), Rat(2, 5)}}, 1.0);
    CHECK_THROWS_AS(classify_interval({2, 3}, wide), std::invalid_argument);

    CHECK_THROWS_AS(classify_interval({-1, 0}, one), std::invalid_argument);
    CHECK_THROWS_AS(classify_interval({37, 0}, one), std::invalid_argument);
    CHECK_THROWS_AS(classify_interval({2, 9}, one), std::invalid_argument);

    // Two blockers of the same triadic interval: the exclusion invariant.
    CHECK_THROWS_AS(classify_interval({6, 364}, tight_pair()), invariant_violation);
}

TEST_CASE("double block witness and exclusion") {
    IntervalFamily tight = tight_pair();
    CHECK(check_separation(tight).ok);  // pair quantity 26581408/531441 > 50
    auto w = find_double_block(tight);
    REQUIRE(w.has_value());
    CHECK(w->j.level == 6);
    CHECK(w->j.index == 364);
    CHECK(w->first == 0);
    CHECK(w->second == 1);

    const long long d14 = pow3(14);
    IntervalFamily one =
        make_family({{Rat::from_parts128(2388494, d14), Rat::from_parts128(2389223, d14)}},
                    50.0);
    CHECK_FALSE(find_double_block(one).has_value());
    CHECK_FALSE(find_double_block(synth_family(59049.0, 20, 7)).has_value());
}

TEST_CASE("path sampling is reproducible and stream-keyed") {
    IntervalFamily fam = synth_family(59049.0, 8, 3);
    auto paths = sample_paths(fam, 12, 40, 99, 3);
    auto paths1 = sample_paths(fam, 12, 40, 99, 1);
    REQUIRE(paths.size() == 40);
    for (size_t i = 0; i < paths.size(); ++i) {
        CHECK(paths[i].choices == paths1[i].choices);
        CHECK(paths[i].a == paths1[i].a);
        TriadicPath solo = sample_path_stream(fam, 12, 99, i);
        CHECK(solo.choices == paths[i].choices);
        CHECK(solo.a == paths[i].a);
        CHECK((int)paths[i].choices.size() == 12);
        CHECK(paths[i].flags.size() == 12);
        CHECK(avoids_all_at_resolution(paths[i], fam));
        CHECK(Rat(0) <= paths[i].a);
        CHECK(paths[i].a < Rat(1));
    }
    CHECK(sample_path(fam, 12, 99).choices == sample_path_stream(fam, 12, 99, 0).choices);

    CHECK_THROWS_AS(sample_path(fam, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_path(fam, 31, 1), std::length_error);
    CHECK_THROWS_AS(sample_paths(fam, 5, 10'000'001, 1), std::length_error);
    CHECK(sample_paths(fam, 5, 0, 1).empty());
    IntervalFamily low = make_family({{Rat(1, 4), Rat(1, 3)}}, 4000.0);
    CHECK_THROWS_AS(sample_path(low, 5, 1), std::invalid_argument);
}

TEST_CASE("containment detection for finished paths") {
    IntervalFamily fam = make_family({{Rat(1, 5), Rat(4, 5)}}, 1.0);
    TriadicPath inside;
    inside.depth = 2;
    inside.a = Rat(1, 3);  // [3/9, 4/9] within (1/5, 4/5)
    CHECK_FALSE(avoids_all_at_resolution(inside, fam));
    TriadicPath outside;
    outside.depth = 2;
    outside.a = Rat(0);  // [0, 1/9] clear of the interval
    CHECK(avoids_all_at_resolution(outside, fam));
}

TEST_CASE("path probability bound and dimension floor") {
    // A' = 3^10 gives A'' = 5, so the bound is 3^(-(4/5)m + 1).
    CHECK(path_probability_bound(0, 59049.0) == doctest::Approx(3.0));
    CHECK(path_probability_bound(5, 59049.0) ==
          doctest::Approx(std::pow(3.0, -3.0)).epsilon(1e-12));
    CHECK(path_probability_bound(10, 59049.0) ==
          doctest::Approx(std::pow(3.0, -7.0)).epsilon(1e-12));
    CHECK(dim_lower_bound(59049.0) == doctest::Approx(0.8).epsilon(1e-12));
    // A'' = 2 exactly sits outside the certified regime.
    CHECK_THROWS_AS(path_probability_bound(3, 2187.0), std::domain_error);
    CHECK_THROWS_AS(dim_lower_bound(2187.0), std::domain_error);
}

TEST_CASE("exact tree expansion of the sampler") {
    IntervalFamily fam = make_family({{Rat(1, 4), Rat(1, 3)}}, 59049.0);
    TreeReport tree = path_tree_probabilities(fam, 4);
    CHECK(tree.levels == 4);
    REQUIRE(tree.level_probs.size() == 5);
    CHECK(tree.sums_to_one);
    CHECK(tree.level_max_prob[0] == doctest::Approx(1.0));
    // Re-sum the deepest level in exact arithmetic.
    Rat total(0);
    for (const auto& node : tree.level_probs[4]) total = total + node.prob;
    CHECK(total == Rat(1));
    for (int m = 0; m <= 4; ++m) {
        CHECK(tree.level_max_prob[(size_t)m] > 0.0);
        CHECK(tree.level_max_prob[(size_t)m] <= 1.0 + 1e-15);
    }
    CHECK_THROWS_AS(path_tree_probabilities(fam, 13), std::length_error);
    CHECK_THROWS_AS(path_tree_probabilities(fam, -1), std::invalid_argument);
}

TEST_CASE("box counting on a single removed interval") {
    // Strictly-interior counting for (1/4, 1/3): survivors
    // 3^k - #{j : j/3^k > 1/4, (j+1)/3^k < 1/3} = 1,3,9,26,76,224,670.
    IntervalFamily fam = make_family({{Rat(1, 4), Rat(1, 3)}}, 59049.0);
    DimensionReport rep = box_dimension_estimate(fam, 6);
    REQUIRE(rep.surviving_counts.size() == 7);
    const long long expect[] = {1, 3, 9, 26, 76, 224, 670};
    for (int k = 0; k <= 6; ++k) CHECK(rep.surviving_counts[(size_t)k] == expect[k]);
    CHECK(rep.lower_bound == doctest::Approx(0.8));  // A'' = 5
    CHECK(rep.depth == 6);

    CHECK_THROWS_AS(box_dimension_estimate(fam, 1), std::invalid_argument);
    CHECK_THROWS_AS(box_dimension_estimate(fam, 21), std::length_error);
}

TEST_CASE("box counting control: removed middle thirds") {
    IntervalFamily fam = middle_thirds_family(10);
    CHECK(fam.intervals.size() == (1u << 10) - 1);
    DimensionReport rep = box_dimension_estimate(fam, 10);
    CHECK(rep.surviving_counts[0] == 1);
    // Closed boxes touching the set at removed endpoints still count:
    // N_k = 5*2^(k-1) - 2.
    for (int k = 1; k <= 10; ++k)
        CHECK(rep.surviving_counts[(size_t)k] == 5 * (1LL << (k - 1)) - 2);
    CHECK(rep.box_estimate ==
          doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(0.04));
    CHECK(std::isnan(rep.lower_bound));  // placeholder aprime certifies nothing

    IntervalFamily g3 = middle_thirds_family(3);
    CHECK(g3.intervals.size() == 7);
    CHECK(g3.intervals[0].x == Rat(1, 27));  // sorted by left endpoint
    CHECK_THROWS_AS(middle_thirds_family(0), std::invalid_argument);
    CHECK_THROWS_AS(middle_thirds_family(17), std::length_error);
}

TEST_CASE("synthetic families are deterministic and separated") {
    IntervalFamily a = synth_family(59049.0, 12, 5);
    IntervalFamily b = synth_family(59049.0, 12, 5);
    REQUIRE(a.intervals.size() == 12);
    REQUIRE(b.intervals.size() == 12);
    for (size_t i = 0; i < a.intervals.size(); ++i) {
        CHECK(a.intervals[i].x == b.intervals[i].x);
        CHECK(a.intervals[i].y == b.intervals[i].y);
    }
    CHECK(a.aprime == 59049.0);
    CHECK(check_separation(a).ok);
    // A different seed moves the intervals.
    IntervalFamily c = synth_family(59049.0, 12, 6);
    bool different = false;
    for (size_t i = 0; i < a.intervals.size(); ++i)
        if (!(a.intervals[i].x == c.intervals[i].x)) different = true;
    CHECK(different);

    CHECK_THROWS_AS(synth_family(5000.0, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(synth_family(1.1e6, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(synth_family(59049.0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(synth_family(59049.0, 501, 1), std::length_error);

    // The validation floor lets randomized searches probe low thresholds.
    IntervalFamily low = detail::synth_family_with_floor(200.0, 3, 5, 99.0);
    CHECK(low.aprime == 200.0);
    CHECK(check_separation(low).ok);
}
