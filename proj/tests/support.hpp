#pragma once

// Test-only helpers: random generators and oracles that recompute results by an
// independent route (literal loops, brute-force sorting, term-by-term likelihoods).

#include "risk/garch.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace risk::testing {

inline std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, sd);
    std::vector<double> x(n);
    for (auto& v : x)
        v = d(rng);
    return x;
}

/// Student-t with `nu` degrees of freedom rescaled to unit variance.
struct UnitStudentT {
    double nu;
    std::student_t_distribution<double> dist{nu};
    template <class Rng>
    double operator()(Rng& rng) {
        return dist(rng) * std::sqrt((nu - 2.0) / nu);
    }
};

/// k-th smallest by full sort, k = ceil(p*n) computed in exact integer arithmetic
/// when p is a ratio of small integers (numerator/denominator).
inline double sorted_pick(std::vector<double> xs, std::size_t k) {
    std::sort(xs.begin(), xs.end());
    return xs.at(k - 1);
}

/// Literal re-implementation of the variance recursion and Gaussian log-likelihood.
struct RecursionOracle {
    std::vector<double> var;
    double loglik = 0.0;

    RecursionOracle(const std::vector<double>& r, double omega, double alpha, double beta) {
        const std::size_t n = r.size();
        double m = 0.0;
        for (double x : r)
            m += x;
        m /= static_cast<double>(n);
        double s2 = 0.0;
        for (double x : r)
            s2 += (x - m) * (x - m);
        s2 /= static_cast<double>(n - 1);
        var.resize(n);
        // pre-sample r_0^2 = sigma_0^2 = s2
        double prev_r2 = s2, prev_v = s2;
        for (std::size_t t = 0; t < n; ++t) {
            var[t] = omega + alpha * prev_r2 + beta * prev_v;
            prev_r2 = r[t] * r[t];
            prev_v = var[t];
            loglik += -0.5 * std::log(2.0 * M_PI) - 0.5 * std::log(var[t]) - r[t] * r[t] / (2.0 * var[t]);
        }
    }
};

/// Christoffersen LR_ind from the likelihood of each observed transition, without
/// going through transition counts. nullopt when a state never has a successor.
inline std::optional<double> brute_force_lr_ind(const std::vector<int>& I) {
    std::size_t from0 = 0, from1 = 0, zero_to_one = 0, one_to_one = 0, ones = 0;
    for (std::size_t t = 1; t < I.size(); ++t) {
        if (I[t - 1] == 0) {
            ++from0;
            zero_to_one += I[t];
        } else {
            ++from1;
            one_to_one += I[t];
        }
        ones += I[t];
    }
    if (from0 == 0 || from1 == 0)
        return std::nullopt;
    const double n = static_cast<double>(I.size() - 1);
    const double p = static_cast<double>(ones) / n;
    const double pi0 = static_cast<double>(zero_to_one) / static_cast<double>(from0);
    const double pi1 = static_cast<double>(one_to_one) / static_cast<double>(from1);
    double ln_l0 = 0.0, ln_l1 = 0.0;
    for (std::size_t t = 1; t < I.size(); ++t) {
        ln_l0 += std::log(I[t] ? p : 1.0 - p);
        const double pi = I[t - 1] ? pi1 : pi0;
        ln_l1 += std::log(I[t] ? pi : 1.0 - pi);
    }
    return -2.0 * (ln_l0 - ln_l1);
}

using Mat = std::vector<std::vector<double>>;

inline Mat mat_mul(const Mat& a, const Mat& b) {
    const std::size_t n = a.size(), m = b[0].size(), k = b.size();
    Mat c(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t l = 0; l < k; ++l)
                c[i][j] += a[i][l] * b[l][j];
    return c;
}

inline Mat identity(std::size_t n) {
    Mat I(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        I[i][i] = 1.0;
    return I;
}

/// GFEVD of a VAR(1) with Psi_h = Phi^h built by repeated multiplication; every
/// quadratic form is summed with explicit loops.
inline Mat gfevd_var1_oracle(const Mat& phi, const Mat& sigma, std::size_t H) {
    const std::size_t N = phi.size();
    Mat theta(N, std::vector<double>(N, 0.0));
    std::vector<Mat> psi{identity(N)};
    for (std::size_t h = 1; h < H; ++h)
        psi.push_back(mat_mul(phi, psi.back()));
    for (std::size_t j = 0; j < N; ++j) {
        double den = 0.0;
        for (std::size_t h = 0; h < H; ++h)
            for (std::size_t a = 0; a < N; ++a)
                for (std::size_t b = 0; b < N; ++b)
                    den += psi[h][j][a] * sigma[a][b] * psi[h][j][b];
        for (std::size_t k = 0; k < N; ++k) {
            double num = 0.0;
            for (std::size_t h = 0; h < H; ++h) {
                double e = 0.0;
                for (std::size_t a = 0; a < N; ++a)
                    e += psi[h][j][a] * sigma[a][k];
                num += e * e;
            }
            theta[j][k] = num / sigma[k][k] / den;
        }
    }
    return theta;
}

} // namespace risk::testing
