#pragma once

// Drift inequalities for finite Markov chains and the tail bounds they
// certify, plus the pointwise-maximum construction that merges two height
// functions into one, and an averaged-decay probe for the weight-2
// symmetric-power representation.
//
// A height function alpha is useful with data (T0, T1) when
//   (a) one step never moves it by more than T1:
//           nu_x(y) > 0  ==>  |alpha(y) - alpha(x)| <= T1, and
//   (b) above height T1 it drifts down in expectation:
//           alpha(x) >= T1  ==>  E[alpha | x] <= alpha(x) - T0,
// up to an exceptional set of stationary mass epsilon (the "bad set").
// Those data alone pin the stationary tail:
//   mu{alpha >= t} <= 1/(ln floor(t/T1) - 1) + epsilon (T0 + T1)/T0
// for t >= 3 T1.

#include <cstdint>
#include <vector>

namespace geofinlab {

using HeightFunction = std::vector<double>;

// Row-stochastic kernel with its stationary distribution solved and
// verified at construction (||mu - mu P||_1 <= 1e-10, else the constructor
// refuses).
class FiniteChain {
  public:
    explicit FiniteChain(std::vector<std::vector<double>> kernel);

    int num_states() const { return (int)kernel_.size(); }
    const std::vector<std::vector<double>>& kernel() const { return kernel_; }
    const std::vector<double>& mu() const { return mu_; }

  private:
    std::vector<std::vector<double>> kernel_;
    std::vector<double> mu_;
};

// Condition (a): every positive-probability step moves alpha by at most t1.
bool check_condition_a(const FiniteChain& chain, const HeightFunction& alpha, double t1);

// Stationary mass of the bad set {alpha >= t1 and E[alpha|x] > alpha - t0}.
double bad_set_measure(const FiniteChain& chain, const HeightFunction& alpha,
                       double t0, double t1);

// Stationary mass of {alpha >= t}.
double empirical_tail(const FiniteChain& chain, const HeightFunction& alpha, double t);

// The certified tail bound at height t >= 3 t1 (std::domain_error below).
double tail_bound(double t, double t0, double t1, double epsilon);

struct TailReport {
    double epsilon = 0.0;        // measured bad-set mass
    bool condition_a_ok = false;
    double worst_ratio = 0.0;    // max over checked t of tail / bound
    bool holds = false;          // condition (a) and worst_ratio <= 1
};

// Measures epsilon, then compares the empirical tail against the bound at
// every candidate maximum of the ratio: both sides are step functions, so
// it suffices to check the distinct alpha values >= 3 t1 together with the
// integer multiples of t1 where the bound's floor steps.
TailReport verify_tail(const FiniteChain& chain, const HeightFunction& alpha,
                       double t0, double t1);

struct MargulisCertificate {
    double t0 = 0.0;
    double t1 = 0.0;
    double epsilon = 0.0;        // claimed bad-set budget
    bool condition_a_ok = false;
    double bad_set_mass = 0.0;   // re-measured from scratch
    bool ok() const { return condition_a_ok && bad_set_mass <= epsilon; }
};

struct CombineResult {
    HeightFunction gamma;
    MargulisCertificate certificate;
};

// Merges two height functions into gamma = max(0, alpha - 2 t1, beta - 5 t1).
// Preconditions (std::invalid_argument): t0 > t1/2 > 0, and both inputs
// satisfy condition (a) at t1.  The combined budget is
//   epsilon = max( bad-set mass of alpha,
//                  mass of {alpha + t1 <= beta and E[beta|x] > beta - t0} ),
// and the returned certificate re-validates gamma from scratch against the
// degraded data (2 epsilon; 2 t0 - t1, t1).
CombineResult max_combine(const FiniteChain& chain, const HeightFunction& alpha,
                          const HeightFunction& beta, double t0, double t1);

// Averaged expansion deficit of the weight-2 symmetric power: for a unit
// w in span{e1^2, e1 e2, e2^2} and the diagonal flow a = diag(2^m, 1, 2^-m),
//   deficit(w) = m ln 2 - ( 2^-m sum_{i<2^m} ln||u(i) a w|| - ln||w|| ),
// where u(i) acts by [[1, i, i^2], [0, 1, 2i], [0, 0, 1]].  The highest
// weight vector e1^2 has deficit exactly 0; the deficit is bounded above
// uniformly in m.  Returns the maximum over `trials` Gaussian unit vectors
// drawn from streams keyed by (seed, trial).  Requires n_weight == 2 and
// m <= 12 (all integers i < 2^12 stay exact in double).
double rep_decay_deficit(int n_weight, int m, int trials, std::uint64_t seed);

}  // namespace geofinlab
