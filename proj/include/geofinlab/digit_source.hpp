#pragma once

// Stationary binary digit sources (unifilar hidden-Markov emitters), the
// masses they assign to dyadic leaf intervals, and entropy/dimension
// estimates for the associated measures on [0,1].
//
// A source walks a finite state chain; in state s it emits digit d with
// probability digit_prob[s][d] and moves to next[s][d] (unifilar: the state
// path is determined by the digit path).  The measure of the dyadic
// interval of depth k indexed by the digit word w is the probability of
// emitting w.  The exact pointwise dimension of that measure is
//
//     dim = (sum_i pi_i H(digit_prob[i])) / ln 2,
//
// the stationary entropy rate in bits per digit.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace geofinlab {

class DigitSource {
  public:
    // digit_prob[s] = {P(emit 0 | s), P(emit 1 | s)} (rows sum to 1);
    // next[s] = {state after 0, state after 1}; initial = start distribution.
    DigitSource(std::vector<std::array<double, 2>> digit_prob,
                std::vector<std::array<int, 2>> next,
                std::vector<double> initial);

    int num_states() const { return (int)digit_prob_.size(); }
    const std::vector<std::array<double, 2>>& digit_prob() const { return digit_prob_; }
    const std::vector<std::array<int, 2>>& next() const { return next_; }
    const std::vector<double>& initial() const { return initial_; }

    // Induced state-transition kernel T[i][j] = sum over digits leading i->j.
    std::vector<std::vector<double>> transition_matrix() const;

    // Cached stationary distribution of the induced kernel and whether the
    // kernel is irreducible (both computed at construction).  For reducible
    // kernels pi() is one stationary distribution among several.
    const std::vector<double>& pi() const { return pi_; }
    bool irreducible() const { return irreducible_; }

  private:
    std::vector<std::array<double, 2>> digit_prob_;
    std::vector<std::array<int, 2>> next_;
    std::vector<double> initial_;
    std::vector<double> pi_;
    bool irreducible_ = false;
};

// Single-state source with P(digit 0) = q.
DigitSource bernoulli(double q);

// Parses a source from JSON text.  Two accepted shapes:
//   {"states": S, "digit_prob": S x 2, "next": S x 2, "initial": S}
// or the edge-labeled form
//   {"states": S, "transition": S x S, "emission": S x S of digits,
//    "initial": S}
// which must be unifilar: for each (state, digit) at most one positive
// outgoing edge carries that digit (std::invalid_argument otherwise).
DigitSource digit_source_from_json(const std::string& text);

// P(first digit is 0 | state) — the chance of descending left.
double transition_prob(const DigitSource& src, int state);

namespace detail {

// Forward-algorithm mass of the depth-k word encoded by j (most significant
// bit = first digit), over any scalar ring (double for production, exact
// rationals in validation).  Scalar needs 0/1 construction, +, *.
template <class Scalar>
Scalar word_mass(const std::vector<std::array<Scalar, 2>>& digit_prob,
                 const std::vector<std::array<int, 2>>& next,
                 const std::vector<Scalar>& initial, int k, long long j) {
    const size_t n = initial.size();
    std::vector<Scalar> f = initial;
    std::vector<Scalar> g(n, Scalar(0));
    for (int t = 0; t < k; ++t) {
        const int d = (int)((j >> (k - 1 - t)) & 1);
        for (size_t s = 0; s < n; ++s) g[s] = Scalar(0);
        for (size_t s = 0; s < n; ++s)
            g[(size_t)next[s][(size_t)d]] = g[(size_t)next[s][(size_t)d]] +
                                            f[s] * digit_prob[s][(size_t)d];
        f.swap(g);
    }
    Scalar total(0);
    for (const Scalar& v : f) total = total + v;
    return total;
}

}  // namespace detail

// Measure of the depth-k dyadic interval [j/2^k, (j+1)/2^k) under the
// source started from its initial distribution.  Requires 0 <= k <= 62 and
// 0 <= j < 2^k.
double leafwise_mass(const DigitSource& src, int k, long long j);

// All 2^levels leaf masses at the given depth, in word order (index read
// MSB-first as the digit string).  start_state = -1 uses the initial
// distribution.  Requires levels <= 20.
std::vector<double> iterate_chain(const DigitSource& src, int levels, int start_state = -1);

// Diagnostics for a should-be-uniform leaf vector.
struct UniformityGap {
    double max_gap = 0.0;          // max |p_i - 1/n|
    double entropy_deficit = 0.0;  // ln n - H(p), >= 0, ~ (n/2) sum dp^2 near uniform
};
UniformityGap uniformity_gap(const std::vector<double>& probs);

// Expected total surprisal (nats) of the first n digits from the initial
// distribution: sum over steps of the H-weighted state distribution.
double accumulated_entropy(const DigitSource& src, int n);

// Exact L1 distance between the normalized word surprisal and the entropy
// rate at depth n:  E_mu | -(1/n) ln mu(w) - h |.  Decreases like n^{-1/2}.
// Requires an irreducible source and n <= 24 (the general path enumerates
// all words).
double un_l1_error(const DigitSource& src, int n);

// Stationary entropy rate in bits per digit (the measure's pointwise
// dimension).  Requires an irreducible source.
double source_dimension(const DigitSource& src);

struct EntropyReport {
    std::vector<double> per_step;  // mean surprisal (nats) at each position
    double estimate = 0.0;         // mean per-digit surprisal (nats)
    double std_error = 0.0;        // standard error of the estimate
    double dimension = 0.0;        // estimate / ln 2
    double target = 0.0;           // exact stationary rate (nats)
};

// Monte Carlo entropy-rate estimate: `samples` digit streams of length
// `steps`, each started from the stationary distribution on an independent
// random stream keyed by (seed, sample).  Results are byte-identical for
// any thread count.  Requires an irreducible source.
EntropyReport run_chain(const DigitSource& src, int steps, long long samples,
                        std::uint64_t seed, int threads = 0);

struct StationarityReport {
    std::vector<double> dist_before;  // empirical state distribution after `steps`
    std::vector<double> dist_after;   // ... after one more step
    double tv_distance = 0.0;
    double threshold = 0.0;  // 3 / sqrt(samples)
    bool ok = false;
};

// Empirical check that the state distribution has stopped moving: total
// variation between steps and steps+1 under `samples` simulated chains.
// `start` empty means the stationary distribution (requires irreducibility);
// otherwise it is the start distribution to stress-test.
StationarityReport stationarity_check(const DigitSource& src, int steps, long long samples,
                                      std::uint64_t seed,
                                      std::vector<double> start = {}, int threads = 0);

}  // namespace geofinlab
