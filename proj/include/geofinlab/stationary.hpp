#pragma once

// Stationary distributions of finite row-stochastic kernels, shared by the
// symbolic-digit and drift modules.

#include <vector>

namespace geofinlab {

// True iff the directed graph of positive-probability transitions is
// strongly connected.  Expects a square matrix (rows[i][j] = P(i -> j)).
bool is_irreducible(const std::vector<std::vector<double>>& rows);

// A probability vector mu with mu = mu P, computed by a direct solve of the
// rank-completed balance equations (Eigen LU) for small chains, with a
// damped power iteration as fallback and for large chains.  The damping
// (mu <- mu (I + P)/2) removes periodicity without changing the stationary
// set.  Validates stochasticity: square matrix, entries >= 0, row sums
// within 1e-9 of 1.  For reducible kernels the returned vector is *a*
// stationary distribution, not necessarily the unique one; callers needing
// uniqueness should consult is_irreducible.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& rows);

}  // namespace geofinlab
