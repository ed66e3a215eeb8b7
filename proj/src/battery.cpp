#include "geofinlab/battery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "geofinlab/boundary.hpp"
#include "geofinlab/cantor.hpp"
#include "geofinlab/digit_source.hpp"
#include "geofinlab/lattice.hpp"
#include "geofinlab/lorentz.hpp"
#include "geofinlab/margulis.hpp"
#include "geofinlab/mat2.hpp"
#include "geofinlab/parallel.hpp"
#include "geofinlab/rational.hpp"
#include "geofinlab/rng.hpp"

namespace geofinlab {
namespace {

using geo::cplx;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return std::string(buf);
}

// ------------------------------------------------------------ 1. geometry

bool crit_line_distance(int, std::string& detail) {
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
        geo::GeodesicLine l1{-1.0, 1.0};
        geo::GeodesicLine l2{-std::exp(t), std::exp(t)};
        auto r = geo::line_distance(l1, l2);
        if (r.degenerate) {
            detail = fmt("pair at t=%g reported degenerate", t);
            return false;
        }
        worst = std::max(worst, std::abs(r.distance - t));
    }
    detail = fmt("max |distance - t| = %.3g over t in {0.5,1,2,5} (tol 1e-9)", worst);
    return worst <= 1e-9;
}

bool crit_herm_action(int, std::string& detail) {
    Rng rng(9202, 0);
    double worst_drift = 0.0, worst_conv = 0.0;
    for (int i = 0; i < 10000; ++i) {
        geo::Vec4 v;
        for (int j = 0; j < 4; ++j) v[j] = rng.normal();
        geo::Herm a = geo::herm_from_coords(v);
        worst_conv = std::max(worst_conv,
                              std::abs(a.det() - v.q()) / std::max(1.0, std::abs(v.q())));
        geo::Vec4 w = geo::coords_from_herm(a);
        for (int j = 0; j < 4; ++j) worst_conv = std::max(worst_conv, std::abs(w[j] - v[j]));

        cplx ga{rng.normal(), rng.normal()};
        while (std::abs(ga) < 0.5) ga = {rng.normal(), rng.normal()};
        cplx gb = 0.5 * cplx{rng.normal(), rng.normal()};
        cplx gc = 0.5 * cplx{rng.normal(), rng.normal()};
        geo::Mat2c g{ga, gb, gc, (1.0 + gb * gc) / ga};
        geo::Herm b = geo::hermitian_action(g, a);
        worst_drift = std::max(worst_drift,
                               std::abs(b.det() - a.det()) / std::max(1.0, std::abs(a.det())));
    }
    detail = fmt("det drift %.3g (tol 1e-8), basis conversion %.3g (tol 1e-12), 10000 draws",
                 worst_drift, worst_conv);
    return worst_drift <= 1e-8 && worst_conv <= 1e-12;
}

// Numeric minimization of ||g v||^2 over g in SL2(R) through the Iwasawa
// chart g = k a(t) n(s): the rotation drops out of the norm, leaving
// f(t,s) = e^t |x + s y|^2 + e^-t |y|^2 on a 2d grid, then coordinate
// descent with shrinking steps.
double grid_refine_min(cplx x, cplx y) {
    auto f = [&](double t, double s) {
        return std::exp(t) * std::norm(x + s * y) + std::exp(-t) * std::norm(y);
    };
    double bt = 0.0, bs = 0.0, bf = f(0.0, 0.0);
    for (double t = -3.5; t <= 3.5 + 1e-12; t += 0.25)
        for (double s = -21.0; s <= 21.0 + 1e-12; s += 0.25) {
            double val = f(t, s);
            if (val < bf) { bf = val; bt = t; bs = s; }
        }
    double dt = 0.25, ds = 0.25;
    for (int it = 0; it < 240; ++it) {
        bool moved = false;
        const double cands[4][2] = {{bt - dt, bs}, {bt + dt, bs}, {bt, bs - ds}, {bt, bs + ds}};
        for (const auto& c : cands) {
            double val = f(c[0], c[1]);
            if (val < bf) { bf = val; bt = c[0]; bs = c[1]; moved = true; }
        }
        if (!moved) {
            dt *= 0.5;
            ds *= 0.5;
            if (dt < 1e-9) break;
        }
    }
    return bf;
}

bool crit_psi_minimizer(int, std::string& detail) {
    Rng rng(9203, 0);
    double worst_con = 0.0, worst_grid = 0.0;
    for (int i = 0; i < 100; ++i) {
        cplx x, y;
        double psi = 0.0;
        do {
            x = {rng.normal(), rng.normal()};
            y = {rng.normal(), rng.normal()};
            double nn = std::sqrt(std::norm(x) + std::norm(y));
            x /= nn;
            y /= nn;
            psi = geo::psi_form({x, y}, geo::w0_matrix());
        } while (std::abs(psi) < 0.1);
        const double target = std::abs(psi);

        geo::PsiMinimizer pm = geo::psi_constructive_minimizer({x, y});
        cplx gx = pm.g.a * x + pm.g.b * y;
        cplx gy = pm.g.c * x + pm.g.d * y;
        double direct = std::norm(gx) + std::norm(gy);
        worst_con = std::max(worst_con, std::abs(direct - target));
        worst_con = std::max(worst_con, std::abs(pm.min_value - target));

        worst_grid = std::max(worst_grid, std::abs(grid_refine_min(x, y) - target));
    }
    detail = fmt("constructive gap %.3g (tol 1e-6), grid+refine gap %.3g (tol 1e-3), 100 draws",
                 worst_con, worst_grid);
    return worst_con <= 1e-6 && worst_grid <= 1e-3;
}

// ------------------------------------------------------------- 2. lattice

bool crit_mod8(int, std::string& detail) {
    long long worst = 0;
    for (long long a : {17LL, 41LL, 73LL, 89LL})
        worst = std::max(worst, mod8_solubility(DiagonalForm::canonical(a)));
    DiagonalForm control;
    control.coefficients = {1, -1, -1, -1};
    control.a = 1;
    long long ctrl = mod8_solubility(control);
    detail = fmt("max count %lld over a in {17,41,73,89} (want 0); control count %lld (want > 0)",
                 worst, ctrl);
    return worst == 0 && ctrl > 0;
}

bool crit_norm_gap(int, std::string& detail) {
    std::string parts;
    bool ok = true;
    for (long long a : {17LL, 41LL}) {
        auto vecs = enumerate_q_minus_one(a, 3.0 * std::sqrt((double)a));
        bool plus = false, minus = false;
        bool short_ok = true;
        const double gap = std::sqrt((double)a / 7.0);
        for (const auto& v : vecs) {
            double nrm = std::sqrt((double)v.norm_sq);
            if (v.is_plus_minus_w0()) (v.m[3] == 1 ? plus : minus) = true;
            else if (nrm < gap) short_ok = false;
        }
        bool gap_holds = norm_gap_check(a).holds;
        ok = ok && plus && minus && short_ok && gap_holds;
        parts += fmt("%sa=%lld: %zu vectors within 3*sqrt(a), gap %s", parts.empty() ? "" : "; ",
                     a, vecs.size(), gap_holds && short_ok ? "holds" : "FAILS");
    }
    detail = parts;
    return ok;
}

// -------------------------------------------------------------- 3. cantor

bool crit_cantor_sampling(int threads, std::string& detail) {
    // 50-interval family, 1e5 paths to depth 30: the recursive length
    // invariant must hold along every sampled path.
    IntervalFamily fam50 = synth_family(59049.0, 50, 42);
    long long violations = 0;
    try {
        sample_paths(fam50, 30, 100000, 42, threads);
    } catch (const invariant_violation&) {
        violations = 1;  // at least one; the exact count is irrelevant to pass/fail
    }

    // Exact distribution of the sampled interval, eight levels deep, on a
    // smaller family: dominated by the closed-form bound at every level.
    IntervalFamily fam10 = synth_family(59049.0, 10, 42);
    TreeReport tree = path_tree_probabilities(fam10, 8);
    bool dominated = tree.sums_to_one;
    double worst_ratio = 0.0;
    for (int m = 0; m <= tree.levels; ++m) {
        double bound = path_probability_bound(m, 59049.0);
        worst_ratio = std::max(worst_ratio, tree.level_max_prob[(size_t)m] / bound);
        if (tree.level_max_prob[(size_t)m] > bound) dominated = false;
    }

    DimensionReport box = box_dimension_estimate(fam50, 20);

    DimensionReport mt = box_dimension_estimate(middle_thirds_family(12), 12);
    const double log32 = std::log(2.0) / std::log(3.0);

    detail = fmt(
        "violations=%lld/100000; tree max prob/bound %.3f (<=1), exact sums %s; "
        "box %.4f (>=0.75); middle-thirds slope %.4f (log3(2)=%.4f +/- 0.02)",
        violations, worst_ratio, tree.sums_to_one ? "yes" : "NO", box.box_estimate,
        mt.box_estimate, log32);
    return violations == 0 && dominated && box.box_estimate >= 0.75 &&
           std::abs(mt.box_estimate - log32) <= 0.02;
}

bool crit_double_block(int threads, std::string& detail) {
    // Randomized families with separation above 99: no triadic interval may
    // acquire two blockers.
    const int kTrials = 10000;
    std::vector<char> blocked((size_t)kTrials, 0);
    parallel_for((size_t)kTrials, threads, [&](size_t i) {
        Rng rng(9207, (std::uint64_t)i);
        double aprime = std::exp(rng.uniform(std::log(100.5), std::log(59049.0)));
        int count = 2 + (int)rng.below(7);
        IntervalFamily fam =
            geofinlab::detail::synth_family_with_floor(aprime, count, rng.next(), 99.0);
        if (find_double_block(fam).has_value()) blocked[i] = 1;
    });
    long long hits = 0;
    for (char c : blocked) hits += c;

    // At separation 50 the exclusion argument has no force: a hand-built
    // pair of level-8 triadic-aligned intervals blocks one level-6 interval
    // twice while keeping the pair quantity just above 50.
    const long long d14 = pow3(14);
    std::vector<Interval> pair_ivs = {
        {Rat::from_parts128(2388494, d14), Rat::from_parts128(2389223, d14)},
        {Rat::from_parts128(2393701, d14), Rat::from_parts128(2394430, d14)},
    };
    IntervalFamily tight = make_family(pair_ivs, 50.0);
    bool sep_ok = check_separation(tight).ok;
    auto wit = find_double_block(tight);
    bool witness_ok = sep_ok && wit.has_value() && wit->j.level == 6 && wit->j.index == 364 &&
                      wit->first == 0 && wit->second == 1;

    detail = fmt("double blocks above separation 99: %lld/%d (want 0); witness at 50: %s", hits,
                 kTrials, witness_ok ? "level 6, index 364" : "NOT FOUND");
    return hits == 0 && witness_ok;
}

// ------------------------------------------------------------ 4. leafwise

bool crit_entropy(int threads, std::string& detail) {
    const double ln2 = std::log(2.0);
    auto ent2 = [](double p) { return -(p * std::log(p) + (1 - p) * std::log(1 - p)); };

    DigitSource b01 = bernoulli(0.1);
    const double h01 = ent2(0.1);
    EntropyReport rep = run_chain(b01, 64, 100000, 9208, threads);
    double err1 = std::abs(rep.estimate - h01);
    double dim_err = std::abs(source_dimension(b01) - h01 / ln2);

    DigitSource two({{0.9, 0.1}, {0.2, 0.8}}, {{0, 1}, {0, 1}}, {0.5, 0.5});
    const double target2 = (2.0 / 3.0) * ent2(0.9) + (1.0 / 3.0) * ent2(0.2);
    EntropyReport rep2 = run_chain(two, 64, 100000, 9209, threads);
    double err2 = std::abs(rep2.estimate - target2);
    double tgt_err = std::abs(rep2.target - target2);

    detail = fmt(
        "bernoulli(0.1): estimate off by %.2e (tol 5e-3), dimension off by %.2e (tol 1e-12); "
        "2-state: estimate off by %.2e (tol 5e-3), rate off by %.2e (tol 1e-12)",
        err1, dim_err, err2, tgt_err);
    return err1 <= 5e-3 && dim_err <= 1e-12 && err2 <= 5e-3 && tgt_err <= 1e-12;
}

bool crit_l1_convergence(int, std::string& detail) {
    DigitSource b03 = bernoulli(0.3);
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double last = 0.0;
    std::string curve;
    for (int n : {4, 8, 16, 24}) {
        double e = un_l1_error(b03, n);
        decreasing = decreasing && e < prev;
        prev = e;
        last = e;
        curve += fmt("%s%d:%.4f", curve.empty() ? "" : " ", n, e);
    }
    detail = fmt("l1 curve {%s} decreasing: %s; l1(24) = %.6f (tol 0.05)", curve.c_str(),
                 decreasing ? "yes" : "NO", last);
    return decreasing && last <= 0.05;
}

// ------------------------------------------------------------ 5. margulis

std::vector<std::vector<double>> birth_death_kernel(int n, double p_down) {
    std::vector<std::vector<double>> kern((size_t)n, std::vector<double>((size_t)n, 0.0));
    for (int k = 0; k < n; ++k) {
        kern[(size_t)k][(size_t)std::max(k - 1, 0)] += p_down;
        kern[(size_t)k][(size_t)std::min(k + 1, n - 1)] += 1.0 - p_down;
    }
    return kern;
}

bool crit_tail_bounds(int threads, std::string& detail) {
    // Pinned chain: 200 states, 3/4 down, stationary mass ~ 3^-k, unit alpha
    // increments; its drift gap is exact so epsilon must come out zero.
    FiniteChain chain(birth_death_kernel(200, 0.75));
    HeightFunction alpha(200);
    for (int k = 0; k < 200; ++k) alpha[(size_t)k] = k;
    const double t0 = 0.5, t1 = 1.0;
    double eps = bad_set_measure(chain, alpha, t0, t1);
    bool cond_a = check_condition_a(chain, alpha, t1);
    double worst_fixed = 0.0;
    for (int t = 3; t <= 50; ++t)
        worst_fixed = std::max(worst_fixed,
                               empirical_tail(chain, alpha, t) / tail_bound(t, t0, t1, eps));
    TailReport pinned = verify_tail(chain, alpha, t0, t1);

    const int kTrials = 1000;
    std::vector<double> ratios((size_t)kTrials, 0.0);
    std::vector<char> holds((size_t)kTrials, 0);
    parallel_for((size_t)kTrials, threads, [&](size_t i) {
        Rng rng(9210, (std::uint64_t)i);
        int n = 50 + (int)rng.below(151);
        double p = 0.85 + 0.1 * rng.uniform();
        FiniteChain c(birth_death_kernel(n, p));
        HeightFunction a((size_t)n);
        for (int k = 0; k < n; ++k) a[(size_t)k] = k;
        TailReport r = verify_tail(c, a, 0.65, 1.0);
        ratios[i] = r.worst_ratio;
        holds[i] = r.holds ? 1 : 0;
    });
    double worst_rand = 0.0;
    bool all_hold = true;
    for (int i = 0; i < kTrials; ++i) {
        worst_rand = std::max(worst_rand, ratios[(size_t)i]);
        all_hold = all_hold && holds[(size_t)i];
    }

    detail = fmt(
        "pinned chain: epsilon=%g, worst tail/bound %.3g on t in [3,50], report %s; "
        "random chains: %d/%d hold, worst ratio %.3g",
        eps, worst_fixed, pinned.holds ? "holds" : "FAILS", (int)std::count(holds.begin(),
        holds.end(), 1), kTrials, worst_rand);
    return eps == 0.0 && cond_a && worst_fixed <= 1.0 && pinned.holds && all_hold &&
           worst_rand <= 1.0;
}

bool crit_combine(int, std::string& detail) {
    int fails = 0;
    double worst_gap = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(9211, (std::uint64_t)trial);
        int n = 50 + (int)rng.below(151);
        double p = 0.85 + 0.1 * rng.uniform();
        FiniteChain chain(birth_death_kernel(n, p));
        HeightFunction alpha((size_t)n), beta((size_t)n);
        double c = 0.8 + 0.2 * rng.uniform();
        double b0 = 0.5 * rng.uniform();
        for (int k = 0; k < n; ++k) {
            alpha[(size_t)k] = k;
            beta[(size_t)k] = c * k + b0;
        }
        CombineResult res = max_combine(chain, alpha, beta, 0.65, 1.0);
        bool gamma_ok = true;
        for (int k = 0; k < n; ++k) {
            double want = std::max({0.0, alpha[(size_t)k] - 2.0, beta[(size_t)k] - 5.0});
            gamma_ok = gamma_ok && std::abs(res.gamma[(size_t)k] - want) <= 1e-12;
        }
        bool data_ok = std::abs(res.certificate.t0 - 0.3) <= 1e-12 &&
                       std::abs(res.certificate.t1 - 1.0) <= 1e-12;
        if (!(res.certificate.ok() && gamma_ok && data_ok)) ++fails;
        worst_gap = std::max(worst_gap,
                             res.certificate.bad_set_mass - res.certificate.epsilon);
    }
    detail = fmt("recombined certificates: %d/100 valid at (2 eps; 2 t0 - t1, t1), "
                 "worst mass excess %.3g", 100 - fails, worst_gap);
    return fails == 0;
}

// Empirically frozen ceiling for the averaged weight-2 decay deficit over
// the pinned calibration seeds (observed max 3.7283 at seed 1, rounded up);
// the acceptance margin is +0.01 on top.
constexpr double kRepDecayCW = 3.73;

bool crit_rep_decay(int, std::string& detail) {
    double per_seed[5];
    double overall = 0.0;
    for (int s = 0; s < 5; ++s) {
        double w = 0.0;
        for (int m = 1; m <= 12; ++m)
            w = std::max(w, rep_decay_deficit(2, m, 1000, (std::uint64_t)(s + 1)));
        per_seed[s] = w;
        overall = std::max(overall, w);
    }
    double lo = *std::min_element(per_seed, per_seed + 5);
    double hi = *std::max_element(per_seed, per_seed + 5);
    double spread = (hi - lo) / lo;
    detail = fmt("max deficit %.4f (frozen ceiling %.2f + 0.01 margin); seed spread %.1f%% "
                 "(tol 10%%)", overall, kRepDecayCW, 100.0 * spread);
    return overall <= kRepDecayCW + 0.01 && spread <= 0.10;
}

// -------------------------------------------------------------- dispatch

struct CriterionSpec {
    int id;
    const char* area;
    const char* name;
    double budget_ms;
    bool (*body)(int threads, std::string& detail);
};

const CriterionSpec kCriteria[] = {
    {1, "geometry", "closed-form geodesic distances", 1000, crit_line_distance},
    {2, "geometry", "hermitian action determinant drift", 5000, crit_herm_action},
    {3, "geometry", "psi minimizer against grid refinement", 10000, crit_psi_minimizer},
    {4, "lattice", "mod-8 insolubility certificates", 1000, crit_mod8},
    {5, "lattice", "short-vector norm gap", 30000, crit_norm_gap},
    {6, "cantor", "avoidance sampling and box dimension", 60000, crit_cantor_sampling},
    {7, "cantor", "double-block exclusion and witness", 30000, crit_double_block},
    {8, "leafwise", "entropy rate and pointwise dimension", 20000, crit_entropy},
    {9, "leafwise", "normalized surprisal L1 convergence", 30000, crit_l1_convergence},
    {10, "margulis", "drift-chain tail bounds", 60000, crit_tail_bounds},
    {11, "margulis", "combined-height certificates", 30000, crit_combine},
    {12, "margulis", "weight-2 averaged decay", 30000, crit_rep_decay},
};

}  // namespace

std::vector<int> battery_criteria(const std::string& area) {
    if (area == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<int> out;
    for (const auto& c : kCriteria)
        if (area == c.area) out.push_back(c.id);
    if (out.empty()) throw std::invalid_argument("battery_criteria: unknown area '" + area + "'");
    return out;
}

CriterionResult run_criterion(int id, int threads) {
    if (id < 1 || id > 12) throw std::invalid_argument("run_criterion: id must be in 1..12");
    const CriterionSpec& spec = kCriteria[id - 1];
    CriterionResult r;
    r.id = spec.id;
    r.area = spec.area;
    r.name = spec.name;
    r.budget_ms = spec.budget_ms;
    auto start = std::chrono::steady_clock::now();
    try {
        r.pass = spec.body(threads, r.detail);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start).count();
    if (r.wall_ms > r.budget_ms) {
        r.pass = false;
        r.detail += fmt(" [over budget: %.0f ms > %.0f ms]", r.wall_ms, r.budget_ms);
    }
    return r;
}

std::vector<CriterionResult> run_battery(const std::string& area, int threads) {
    std::vector<CriterionResult> out;
    for (int id : battery_criteria(area)) out.push_back(run_criterion(id, threads));
    return out;
}

}  // namespace geofinlab
