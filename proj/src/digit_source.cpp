#include "geofinlab/digit_source.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "geofinlab/parallel.hpp"
#include "geofinlab/rng.hpp"
#include "geofinlab/stationary.hpp"

namespace geofinlab {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Fixed logical block size for parallel reductions.  Partial sums are
// produced per block and merged in block order, so results do not depend on
// the thread count.
constexpr long long kBlock = 4096;

double row_entropy(double p0, double p1) {
    double h = 0.0;
    if (p0 > 0.0) h -= p0 * std::log(p0);
    if (p1 > 0.0) h -= p1 * std::log(p1);
    return h;
}

int draw_from(const std::vector<double>& dist, double u) {
    double acc = 0.0;
    for (size_t i = 0; i + 1 < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return (int)i;
    }
    return (int)dist.size() - 1;
}

std::vector<double> normalized(std::vector<double> v, const char* what) {
    double sum = 0.0;
    for (double p : v) {
        if (!std::isfinite(p) || p < 0.0)
            throw std::invalid_argument(std::string(what) + ": entries must be finite and >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(what) + ": entries must sum to 1");
    for (double& p : v) p /= sum;
    return v;
}

}  // namespace

DigitSource::DigitSource(std::vector<std::array<double, 2>> digit_prob,
                         std::vector<std::array<int, 2>> next,
                         std::vector<double> initial)
    : digit_prob_(std::move(digit_prob)), next_(std::move(next)), initial_(std::move(initial)) {
    const size_t n = digit_prob_.size();
    if (n == 0) throw std::invalid_argument("DigitSource: need at least one state");
    if (n > 4096) throw std::length_error("DigitSource: states capped at 4096");
    if (next_.size() != n || initial_.size() != n)
        throw std::invalid_argument("DigitSource: digit_prob, next and initial sizes disagree");
    for (size_t s = 0; s < n; ++s) {
        for (int d = 0; d < 2; ++d) {
            const double p = digit_prob_[s][(size_t)d];
            if (!std::isfinite(p) || p < 0.0)
                throw std::invalid_argument("DigitSource: digit probabilities must be >= 0");
            const int t = next_[s][(size_t)d];
            if (t < 0 || (size_t)t >= n)
                throw std::invalid_argument("DigitSource: next-state index out of range");
        }
        const double sum = digit_prob_[s][0] + digit_prob_[s][1];
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("DigitSource: digit probabilities of state " +
                                        std::to_string(s) + " must sum to 1");
        digit_prob_[s][0] /= sum;
        digit_prob_[s][1] /= sum;
    }
    initial_ = normalized(std::move(initial_), "DigitSource initial distribution");

    const auto t = transition_matrix();
    irreducible_ = is_irreducible(t);
    try {
        pi_ = stationary_distribution(t);
    } catch (...) {
        pi_ = initial_;  // defensive; the solver handles every validated kernel
        irreducible_ = false;
    }
}

std::vector<std::vector<double>> DigitSource::transition_matrix() const {
    const size_t n = digit_prob_.size();
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    for (size_t s = 0; s < n; ++s)
        for (int d = 0; d < 2; ++d)
            t[s][(size_t)next_[s][(size_t)d]] += digit_prob_[s][(size_t)d];
    return t;
}

DigitSource bernoulli(double q) {
    if (!std::isfinite(q) || q < 0.0 || q > 1.0)
        throw std::invalid_argument("bernoulli: q must lie in [0,1]");
    return DigitSource({{q, 1.0 - q}}, {{0, 0}}, {1.0});
}

DigitSource digit_source_from_json(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("digit_source_from_json: ") + e.what());
    }
    try {
        const int states = doc.at("states").get<int>();
        if (states < 1) throw std::invalid_argument("digit_source_from_json: states must be >= 1");
        const size_t n = (size_t)states;
        std::vector<double> initial = doc.at("initial").get<std::vector<double>>();
        if (initial.size() != n)
            throw std::invalid_argument("digit_source_from_json: initial has wrong length");

        if (doc.contains("digit_prob")) {
            auto dp = doc.at("digit_prob").get<std::vector<std::vector<double>>>();
            auto nx = doc.at("next").get<std::vector<std::vector<int>>>();
            if (dp.size() != n || nx.size() != n)
                throw std::invalid_argument("digit_source_from_json: digit_prob/next have wrong length");
            std::vector<std::array<double, 2>> digit_prob(n);
            std::vector<std::array<int, 2>> next(n);
            for (size_t s = 0; s < n; ++s) {
                if (dp[s].size() != 2 || nx[s].size() != 2)
                    throw std::invalid_argument("digit_source_from_json: rows must have two digits");
                digit_prob[s] = {dp[s][0], dp[s][1]};
                next[s] = {nx[s][0], nx[s][1]};
            }
            return DigitSource(std::move(digit_prob), std::move(next), std::move(initial));
        }

        // Edge-labeled form: fold the digit written on each positive edge
        // into the per-(state,digit) tables; unifilarity means no digit
        // label repeats among a state's positive edges.
        auto tr = doc.at("transition").get<std::vector<std::vector<double>>>();
        auto em = doc.at("emission").get<std::vector<std::vector<int>>>();
        if (tr.size() != n || em.size() != n)
            throw std::invalid_argument("digit_source_from_json: transition/emission have wrong length");
        std::vector<std::array<double, 2>> digit_prob(n, {0.0, 0.0});
        std::vector<std::array<int, 2>> next(n);
        for (size_t s = 0; s < n; ++s) next[s] = {(int)s, (int)s};
        for (size_t s = 0; s < n; ++s) {
            if (tr[s].size() != n || em[s].size() != n)
                throw std::invalid_argument("digit_source_from_json: transition/emission rows have wrong length");
            for (size_t t = 0; t < n; ++t) {
                if (!(tr[s][t] > 0.0)) continue;
                const int d = em[s][t];
                if (d != 0 && d != 1)
                    throw std::invalid_argument("digit_source_from_json: emission digits must be 0 or 1");
                if (digit_prob[s][(size_t)d] > 0.0)
                    throw std::invalid_argument(
                        "digit_source_from_json: not unifilar (state " + std::to_string(s) +
                        " has two positive edges emitting digit " + std::to_string(d) + ")");
                digit_prob[s][(size_t)d] = tr[s][t];
                next[s][(size_t)d] = (int)t;
            }
        }
        return DigitSource(std::move(digit_prob), std::move(next), std::move(initial));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("digit_source_from_json: ") + e.what());
    }
}

double transition_prob(const DigitSource& src, int state) {
    if (state < 0 || state >= src.num_states())
        throw std::invalid_argument("transition_prob: state out of range");
    return src.digit_prob()[(size_t)state][0];
}

double leafwise_mass(const DigitSource& src, int k, long long j) {
    if (k < 0 || k > 62) throw std::invalid_argument("leafwise_mass: depth must be in [0, 62]");
    if (j < 0 || (k < 63 && j >= (1LL << k)))
        throw std::invalid_argument("leafwise_mass: leaf index out of range");
    return detail::word_mass<double>(src.digit_prob(), src.next(), src.initial(), k, j);
}

std::vector<double> iterate_chain(const DigitSource& src, int levels, int start_state) {
    if (levels < 0) throw std::invalid_argument("iterate_chain: levels must be >= 0");
    if (levels > 20) throw std::length_error("iterate_chain: levels capped at 20");
    if (start_state < -1 || start_state >= src.num_states())
        throw std::invalid_argument("iterate_chain: start state out of range");
    const size_t n = (size_t)src.num_states();
    std::vector<double> f(n, 0.0);
    if (start_state < 0)
        f = src.initial();
    else
        f[(size_t)start_state] = 1.0;

    std::vector<double> out;
    out.reserve((size_t)1 << levels);
    // Depth-first in digit order yields the masses already sorted by
    // MSB-first word index.
    std::vector<std::vector<double>> buf((size_t)levels + 1, std::vector<double>(n, 0.0));
    buf[0] = f;
    const auto& dp = src.digit_prob();
    const auto& nx = src.next();
    auto rec = [&](auto&& self, int depth) -> void {
        if (depth == levels) {
            double mass = 0.0;
            for (double v : buf[(size_t)depth]) mass += v;
            out.push_back(mass);
            return;
        }
        for (int d = 0; d < 2; ++d) {
            auto& cur = buf[(size_t)depth];
            auto& child = buf[(size_t)depth + 1];
            std::fill(child.begin(), child.end(), 0.0);
            for (size_t s = 0; s < n; ++s)
                child[(size_t)nx[s][(size_t)d]] += cur[s] * dp[s][(size_t)d];
            self(self, depth + 1);
        }
    };
    rec(rec, 0);
    return out;
}

UniformityGap uniformity_gap(const std::vector<double>& probs) {
    if (probs.empty()) throw std::invalid_argument("uniformity_gap: empty vector");
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0)
            throw std::invalid_argument("uniformity_gap: entries must be finite and >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("uniformity_gap: entries must sum to 1");
    const double n = (double)probs.size();
    UniformityGap g;
    double h = 0.0;
    for (double p : probs) {
        g.max_gap = std::max(g.max_gap, std::abs(p - 1.0 / n));
        if (p > 0.0) h -= p * std::log(p);
    }
    g.entropy_deficit = std::log(n) - h;
    return g;
}

double accumulated_entropy(const DigitSource& src, int n) {
    if (n < 0) throw std::invalid_argument("accumulated_entropy: n must be >= 0");
    if (n > 1000000) throw std::length_error("accumulated_entropy: n capped at 1e6");
    const size_t states = (size_t)src.num_states();
    std::vector<double> h(states);
    for (size_t s = 0; s < states; ++s)
        h[s] = row_entropy(src.digit_prob()[s][0], src.digit_prob()[s][1]);
    std::vector<double> d = src.initial(), nxt(states);
    double total = 0.0;
    for (int step = 0; step < n; ++step) {
        for (size_t s = 0; s < states; ++s) total += d[s] * h[s];
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (size_t s = 0; s < states; ++s)
            for (int dg = 0; dg < 2; ++dg)
                nxt[(size_t)src.next()[s][(size_t)dg]] += d[s] * src.digit_prob()[s][(size_t)dg];
        d.swap(nxt);
    }
    return total;
}

double source_dimension(const DigitSource& src) {
    if (!src.irreducible())
        throw std::domain_error("source_dimension: reducible state chain has no unique rate");
    double rate = 0.0;
    for (size_t s = 0; s < (size_t)src.num_states(); ++s)
        rate += src.pi()[s] * row_entropy(src.digit_prob()[s][0], src.digit_prob()[s][1]);
    return rate / kLn2;
}

double un_l1_error(const DigitSource& src, int n) {
    if (n < 1) throw std::invalid_argument("un_l1_error: n must be >= 1");
    if (n > 24) throw std::length_error("un_l1_error: depth capped at 24 (exact word enumeration)");
    const double h = source_dimension(src) * kLn2;  // rate in nats

    if (src.num_states() == 1) {
        // Word mass depends only on the digit count: binomial closed form.
        const double p0 = src.digit_prob()[0][0];
        const double p1 = src.digit_prob()[0][1];
        if (p0 == 0.0 || p1 == 0.0) return 0.0;  // one word of mass 1, surprisal 0 = rate
        std::vector<unsigned long long> binom((size_t)n + 1, 0);
        binom[0] = 1;
        for (int row = 1; row <= n; ++row)
            for (int k = row; k >= 1; --k) binom[(size_t)k] += binom[(size_t)k - 1];
        double err = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double mass = (double)binom[(size_t)k] * std::pow(p0, k) * std::pow(p1, n - k);
            const double surprisal = -((double)k * std::log(p0) + (double)(n - k) * std::log(p1)) / n;
            err += mass * std::abs(surprisal - h);
        }
        return err;
    }

    if (src.num_states() > 64)
        throw std::length_error("un_l1_error: word enumeration capped at 64 states");
    const size_t states = (size_t)src.num_states();
    const auto& dp = src.digit_prob();
    const auto& nx = src.next();
    std::vector<std::vector<double>> buf((size_t)n + 1, std::vector<double>(states, 0.0));
    buf[0] = src.initial();
    double err = 0.0;
    auto rec = [&](auto&& self, int depth) -> void {
        if (depth == n) {
            double mass = 0.0;
            for (double v : buf[(size_t)depth]) mass += v;
            if (mass > 0.0) err += mass * std::abs(-std::log(mass) / n - h);
            return;
        }
        for (int d = 0; d < 2; ++d) {
            auto& cur = buf[(size_t)depth];
            auto& child = buf[(size_t)depth + 1];
            std::fill(child.begin(), child.end(), 0.0);
            double branch = 0.0;
            for (size_t s = 0; s < states; ++s) {
                const double w = cur[s] * dp[s][(size_t)d];
                child[(size_t)nx[s][(size_t)d]] += w;
                branch += w;
            }
            if (branch > 0.0) self(self, depth + 1);
        }
    };
    rec(rec, 0);
    return err;
}

EntropyReport run_chain(const DigitSource& src, int steps, long long samples,
                        std::uint64_t seed, int threads) {
    if (steps < 1) throw std::invalid_argument("run_chain: steps must be >= 1");
    if (samples < 1) throw std::invalid_argument("run_chain: samples must be >= 1");
    if ((long long)steps * samples > 1'000'000'000LL)
        throw std::length_error("run_chain: steps * samples capped at 1e9");
    if (!src.irreducible())
        throw std::domain_error("run_chain: reducible state chain has no stationary start");

    const auto& dp = src.digit_prob();
    const auto& nx = src.next();
    const std::vector<double>& pi = src.pi();

    const long long nblocks = (samples + kBlock - 1) / kBlock;
    std::vector<double> block_sum((size_t)nblocks, 0.0);
    std::vector<double> block_sum_sq((size_t)nblocks, 0.0);
    std::vector<double> block_step((size_t)nblocks * (size_t)steps, 0.0);

    parallel_for((size_t)nblocks, threads, [&](size_t b) {
        const long long lo = (long long)b * kBlock;
        const long long hi = std::min(samples, lo + kBlock);
        double* step_sums = &block_step[b * (size_t)steps];
        for (long long i = lo; i < hi; ++i) {
            Rng rng(seed, (std::uint64_t)i);
            int s = draw_from(pi, rng.uniform());
            double total = 0.0;
            for (int t = 0; t < steps; ++t) {
                const double p0 = dp[(size_t)s][0];
                const int d = rng.uniform() < p0 ? 0 : 1;
                const double surprisal = -std::log(dp[(size_t)s][(size_t)d]);
                total += surprisal;
                step_sums[t] += surprisal;
                s = nx[(size_t)s][(size_t)d];
            }
            const double x = total / steps;
            block_sum[b] += x;
            block_sum_sq[b] += x * x;
        }
    });

    EntropyReport rep;
    double sx = 0.0, sxx = 0.0;
    for (long long b = 0; b < nblocks; ++b) {
        sx += block_sum[(size_t)b];
        sxx += block_sum_sq[(size_t)b];
    }
    rep.estimate = sx / (double)samples;
    const double var = samples > 1
                           ? std::max(0.0, (sxx - (double)samples * rep.estimate * rep.estimate) /
                                               (double)(samples - 1))
                           : 0.0;
    rep.std_error = std::sqrt(var / (double)samples);
    rep.dimension = rep.estimate / kLn2;
    rep.per_step.assign((size_t)steps, 0.0);
    for (long long b = 0; b < nblocks; ++b)
        for (int t = 0; t < steps; ++t)
            rep.per_step[(size_t)t] += block_step[(size_t)b * (size_t)steps + (size_t)t];
    for (double& v : rep.per_step) v /= (double)samples;
    double rate = 0.0;
    for (size_t s = 0; s < (size_t)src.num_states(); ++s)
        rate += pi[s] * row_entropy(dp[s][0], dp[s][1]);
    rep.target = rate;
    return rep;
}

StationarityReport stationarity_check(const DigitSource& src, int steps, long long samples,
                                      std::uint64_t seed, std::vector<double> start,
                                      int threads) {
    if (steps < 0) throw std::invalid_argument("stationarity_check: steps must be >= 0");
    if (samples < 1) throw std::invalid_argument("stationarity_check: samples must be >= 1");
    if ((long long)(steps + 1) * samples > 1'000'000'000LL)
        throw std::length_error("stationarity_check: steps * samples capped at 1e9");
    const size_t states = (size_t)src.num_states();
    if (start.empty()) {
        if (!src.irreducible())
            throw std::domain_error(
                "stationarity_check: reducible state chain has no stationary start");
        start = src.pi();
    } else {
        if (start.size() != states)
            throw std::invalid_argument("stationarity_check: start distribution has wrong length");
        start = normalized(std::move(start), "stationarity_check start distribution");
    }

    const auto& dp = src.digit_prob();
    const auto& nx = src.next();
    const long long nblocks = (samples + kBlock - 1) / kBlock;
    std::vector<long long> before((size_t)nblocks * states, 0);
    std::vector<long long> after((size_t)nblocks * states, 0);

    parallel_for((size_t)nblocks, threads, [&](size_t b) {
        const long long lo = (long long)b * kBlock;
        const long long hi = std::min(samples, lo + kBlock);
        long long* cb = &before[b * states];
        long long* ca = &after[b * states];
        for (long long i = lo; i < hi; ++i) {
            Rng rng(seed, (std::uint64_t)i);
            int s = draw_from(start, rng.uniform());
            for (int t = 0; t < steps; ++t)
                s = nx[(size_t)s][rng.uniform() < dp[(size_t)s][0] ? 0u : 1u];
            ++cb[s];
            s = nx[(size_t)s][rng.uniform() < dp[(size_t)s][0] ? 0u : 1u];
            ++ca[s];
        }
    });

    StationarityReport rep;
    rep.dist_before.assign(states, 0.0);
    rep.dist_after.assign(states, 0.0);
    for (long long b = 0; b < nblocks; ++b)
        for (size_t s = 0; s < states; ++s) {
            rep.dist_before[s] += (double)before[(size_t)b * states + s];
            rep.dist_after[s] += (double)after[(size_t)b * states + s];
        }
    for (size_t s = 0; s < states; ++s) {
        rep.dist_before[s] /= (double)samples;
        rep.dist_after[s] /= (double)samples;
        rep.tv_distance += std::abs(rep.dist_before[s] - rep.dist_after[s]);
    }
    rep.tv_distance *= 0.5;
    rep.threshold = 3.0 / std::sqrt((double)samples);
    rep.ok = rep.tv_distance <= rep.threshold;
    return rep;
}

}  // namespace geofinlab
