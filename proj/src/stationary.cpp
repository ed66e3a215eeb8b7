#include "geofinlab/stationary.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace geofinlab {

namespace {

void validate_kernel(const std::vector<std::vector<double>>& rows) {
    const size_t n = rows.size();
    if (n == 0) throw std::invalid_argument("stationary: empty kernel");
    if (n > 20000) throw std::length_error("stationary: kernel capped at 20000 states");
    for (size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n)
            throw std::invalid_argument("stationary: kernel row " + std::to_string(i) +
                                        " has wrong length");
        double sum = 0.0;
        for (double p : rows[i]) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw std::invalid_argument("stationary: kernel entries must be finite and >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("stationary: kernel row " + std::to_string(i) +
                                        " sums to " + std::to_string(sum));
    }
}

double residual_l1(const std::vector<std::vector<double>>& rows, const std::vector<double>& mu) {
    const size_t n = rows.size();
    double res = 0.0;
    for (size_t j = 0; j < n; ++j) {
        double v = -mu[j];
        for (size_t i = 0; i < n; ++i) v += mu[i] * rows[i][j];
        res += std::abs(v);
    }
    return res;
}

std::vector<double> damped_power_iteration(const std::vector<std::vector<double>>& rows) {
    const size_t n = rows.size();
    std::vector<double> mu(n, 1.0 / (double)n), next(n);
    for (int iter = 0; iter < 1000000; ++iter) {
        double delta = 0.0;
        for (size_t j = 0; j < n; ++j) next[j] = 0.5 * mu[j];
        for (size_t i = 0; i < n; ++i) {
            const double w = 0.5 * mu[i];
            if (w == 0.0) continue;
            const auto& row = rows[i];
            for (size_t j = 0; j < n; ++j) next[j] += w * row[j];
        }
        double sum = 0.0;
        for (size_t j = 0; j < n; ++j) sum += next[j];
        for (size_t j = 0; j < n; ++j) next[j] /= sum;
        for (size_t j = 0; j < n; ++j) delta += std::abs(next[j] - mu[j]);
        mu.swap(next);
        if (delta < 1e-15) break;
    }
    return mu;
}

void clamp_and_normalize(std::vector<double>& mu) {
    double sum = 0.0;
    for (double& v : mu) {
        if (v < 0.0) v = 0.0;
        sum += v;
    }
    if (sum <= 0.0) throw std::runtime_error("stationary: solver produced a zero vector");
    for (double& v : mu) v /= sum;
}

}  // namespace

bool is_irreducible(const std::vector<std::vector<double>>& rows) {
    validate_kernel(rows);
    const size_t n = rows.size();
    // Strong connectivity == everything reachable from state 0 forward and
    // backward.
    auto reach = [&](bool transpose) {
        std::vector<char> seen(n, 0);
        std::vector<size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const size_t u = stack.back();
            stack.pop_back();
            for (size_t v = 0; v < n; ++v) {
                const double p = transpose ? rows[v][u] : rows[u][v];
                if (p > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        for (char c : seen)
            if (!c) return false;
        return true;
    };
    return reach(false) && reach(true);
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& rows) {
    validate_kernel(rows);
    const size_t n = rows.size();
    if (n == 1) return {1.0};

    if (n <= 1000) {
        // Balance equations (P^T - I) mu = 0 with the last equation replaced
        // by the normalization sum(mu) = 1.
        Eigen::MatrixXd a(n, n);
        for (size_t j = 0; j < n; ++j)
            for (size_t i = 0; i < n; ++i)
                a((Eigen::Index)j, (Eigen::Index)i) = rows[i][j] - (i == j ? 1.0 : 0.0);
        for (size_t i = 0; i < n; ++i) a((Eigen::Index)(n - 1), (Eigen::Index)i) = 1.0;
        Eigen::VectorXd b = Eigen::VectorXd::Zero((Eigen::Index)n);
        b((Eigen::Index)(n - 1)) = 1.0;
        Eigen::VectorXd x = a.fullPivLu().solve(b);
        std::vector<double> mu(n);
        bool sane = true;
        for (size_t i = 0; i < n; ++i) {
            mu[i] = x((Eigen::Index)i);
            if (!std::isfinite(mu[i]) || mu[i] < -1e-10) sane = false;
        }
        if (sane && residual_l1(rows, mu) <= 1e-10) {
            clamp_and_normalize(mu);
            return mu;
        }
        // Singular or ill-conditioned (e.g. reducible kernel): fall through.
    }

    std::vector<double> mu = damped_power_iteration(rows);
    clamp_and_normalize(mu);
    return mu;
}

}  // namespace geofinlab
