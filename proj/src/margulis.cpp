#include "geofinlab/margulis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

#include "geofinlab/rng.hpp"
#include "geofinlab/stationary.hpp"

namespace geofinlab {

namespace {

void validate_height(const FiniteChain& chain, const HeightFunction& alpha, const char* who) {
    if ((int)alpha.size() != chain.num_states())
        throw std::invalid_argument(std::string(who) + ": height vector has wrong length");
    for (double v : alpha)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(who) + ": heights must be finite");
}

void validate_thresholds(double t0, double t1, const char* who) {
    if (!(t1 > 0.0) || !std::isfinite(t1))
        throw std::invalid_argument(std::string(who) + ": requires T1 > 0");
    if (!(t0 > 0.0) || !std::isfinite(t0))
        throw std::invalid_argument(std::string(who) + ": requires T0 > 0");
}

double expected_height(const std::vector<double>& row, const HeightFunction& alpha) {
    double e = 0.0;
    for (size_t y = 0; y < row.size(); ++y) e += row[y] * alpha[y];
    return e;
}

}  // namespace

FiniteChain::FiniteChain(std::vector<std::vector<double>> kernel) : kernel_(std::move(kernel)) {
    mu_ = stationary_distribution(kernel_);  // validates stochasticity
    double residual = 0.0;
    for (size_t j = 0; j < kernel_.size(); ++j) {
        double v = -mu_[j];
        for (size_t i = 0; i < kernel_.size(); ++i) v += mu_[i] * kernel_[i][j];
        residual += std::abs(v);
    }
    if (residual > 1e-10)
        throw std::runtime_error("FiniteChain: stationary solve residual " +
                                 std::to_string(residual) + " exceeds 1e-10");
}

bool check_condition_a(const FiniteChain& chain, const HeightFunction& alpha, double t1) {
    validate_height(chain, alpha, "check_condition_a");
    if (!(t1 > 0.0) || !std::isfinite(t1))
        throw std::invalid_argument("check_condition_a: requires T1 > 0");
    const auto& mu = chain.mu();
    for (size_t x = 0; x < alpha.size(); ++x) {
        if (!(mu[x] > 0.0)) continue;
        const auto& row = chain.kernel()[x];
        for (size_t y = 0; y < alpha.size(); ++y)
            if (row[y] > 0.0 && std::abs(alpha[y] - alpha[x]) > t1) return false;
    }
    return true;
}

double bad_set_measure(const FiniteChain& chain, const HeightFunction& alpha,
                       double t0, double t1) {
    validate_height(chain, alpha, "bad_set_measure");
    validate_thresholds(t0, t1, "bad_set_measure");
    double mass = 0.0;
    for (size_t x = 0; x < alpha.size(); ++x) {
        if (alpha[x] < t1) continue;
        if (expected_height(chain.kernel()[x], alpha) > alpha[x] - t0) mass += chain.mu()[x];
    }
    return mass;
}

double empirical_tail(const FiniteChain& chain, const HeightFunction& alpha, double t) {
    validate_height(chain, alpha, "empirical_tail");
    double mass = 0.0;
    for (size_t x = 0; x < alpha.size(); ++x)
        if (alpha[x] >= t) mass += chain.mu()[x];
    return mass;
}

double tail_bound(double t, double t0, double t1, double epsilon) {
    validate_thresholds(t0, t1, "tail_bound");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("tail_bound: requires epsilon >= 0");
    if (!(t >= 3.0 * t1))
        throw std::domain_error("tail_bound: defined only for t >= 3 T1");
    // floor(t/T1) >= 3, so the log exceeds 1 and the lead term is positive.
    const double steps = std::floor(t / t1);
    return 1.0 / (std::log(steps) - 1.0) + epsilon * (t0 + t1) / t0;
}

TailReport verify_tail(const FiniteChain& chain, const HeightFunction& alpha,
                       double t0, double t1) {
    validate_height(chain, alpha, "verify_tail");
    validate_thresholds(t0, t1, "verify_tail");
    TailReport rep;
    rep.condition_a_ok = check_condition_a(chain, alpha, t1);
    rep.epsilon = bad_set_measure(chain, alpha, t0, t1);

    // The empirical tail only steps down at values of alpha; the bound only
    // steps down at integer multiples of T1.  The ratio's maximum over
    // t >= 3 T1 is attained at one of those points.
    std::set<double> candidates;
    double max_alpha = 0.0;
    for (double v : alpha) {
        max_alpha = std::max(max_alpha, v);
        if (v >= 3.0 * t1) candidates.insert(v);
    }
    for (long long k = 3; (double)k * t1 <= max_alpha + t1; ++k)
        candidates.insert((double)k * t1);

    for (double t : candidates) {
        const double ratio = empirical_tail(chain, alpha, t) / tail_bound(t, t0, t1, rep.epsilon);
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    }
    rep.holds = rep.condition_a_ok && rep.worst_ratio <= 1.0;
    return rep;
}

CombineResult max_combine(const FiniteChain& chain, const HeightFunction& alpha,
                          const HeightFunction& beta, double t0, double t1) {
    validate_height(chain, alpha, "max_combine");
    validate_height(chain, beta, "max_combine");
    validate_thresholds(t0, t1, "max_combine");
    if (!(t0 > 0.5 * t1))
        throw std::invalid_argument("max_combine: requires T0 > T1/2");
    if (!check_condition_a(chain, alpha, t1))
        throw std::invalid_argument("max_combine: alpha violates the bounded-step condition");
    if (!check_condition_a(chain, beta, t1))
        throw std::invalid_argument("max_combine: beta violates the bounded-step condition");

    const double eps_alpha = bad_set_measure(chain, alpha, t0, t1);

    // Where beta clears alpha by a full step, beta must drift on its own:
    // mass of {alpha + T1 <= beta, E[beta|x] > beta - T0}.
    double eps_semi = 0.0;
    for (size_t x = 0; x < alpha.size(); ++x) {
        if (!(alpha[x] + t1 <= beta[x])) continue;
        if (expected_height(chain.kernel()[x], beta) > beta[x] - t0)
            eps_semi += chain.mu()[x];
    }
    const double eps = std::max(eps_alpha, eps_semi);

    CombineResult res;
    res.gamma.resize(alpha.size());
    for (size_t x = 0; x < alpha.size(); ++x)
        res.gamma[x] = std::max({0.0, alpha[x] - 2.0 * t1, beta[x] - 5.0 * t1});

    // Re-validate the merged height from scratch against the degraded data.
    MargulisCertificate cert;
    cert.t0 = 2.0 * t0 - t1;
    cert.t1 = t1;
    cert.epsilon = 2.0 * eps;
    cert.condition_a_ok = check_condition_a(chain, res.gamma, t1);
    cert.bad_set_mass = bad_set_measure(chain, res.gamma, cert.t0, cert.t1);
    res.certificate = cert;
    return res;
}

double rep_decay_deficit(int n_weight, int m, int trials, std::uint64_t seed) {
    if (n_weight != 2)
        throw std::invalid_argument("rep_decay_deficit: only the weight-2 symmetric block is implemented");
    if (m < 1 || m > 12)
        throw std::invalid_argument("rep_decay_deficit: m must be in [1, 12] (2^m integers stay exact)");
    if (trials < 1) throw std::invalid_argument("rep_decay_deficit: trials must be >= 1");
    if (trials > 1000000) throw std::length_error("rep_decay_deficit: trials capped at 1e6");

    const double ln2 = 0.6931471805599453;
    const long long count = 1LL << m;
    const double scale_up = std::ldexp(1.0, m);     // 2^m
    const double scale_down = std::ldexp(1.0, -m);  // 2^-m

    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(seed, (std::uint64_t)trial);
        double w0, w1, w2, norm;
        do {
            w0 = rng.normal();
            w1 = rng.normal();
            w2 = rng.normal();
            norm = std::sqrt(w0 * w0 + w1 * w1 + w2 * w2);
        } while (!(norm > 1e-12));
        w0 /= norm;
        w1 /= norm;
        w2 /= norm;

        // a w in the basis (e1^2, e1 e2, e2^2), then u(i):
        //   u(i) (v0, v1, v2) = (v0 + i v1 + i^2 v2, v1 + 2 i v2, v2).
        const double v0 = scale_up * w0;
        const double v1 = w1;
        const double v2 = scale_down * w2;
        double sum = 0.0;
        for (long long i = 0; i < count; ++i) {
            const double x = (double)i;
            const double a = v0 + x * v1 + x * x * v2;
            const double b = v1 + 2.0 * x * v2;
            sum += 0.5 * std::log(a * a + b * b + v2 * v2);
        }
        const double avg = sum / (double)count;
        worst = std::max(worst, (double)m * ln2 - avg);  // ln||w|| = 0
    }
    return worst;
}

}  // namespace geofinlab
