#pragma once

#include "risk/data.hpp"
#include "risk/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace risk::connect {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// y_t = c + sum_i Phi_i y_{t-i} + eps_t, eps_t ~ (0, Sigma).
struct VarModel {
    std::size_t order = 1;
    std::vector<Matrix> coefficients; // Phi_1 .. Phi_p, each N x N
    Matrix sigma;                     // residual covariance, divisor T - p
    Vector intercept;

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(sigma.rows()); }
};

struct ConnectednessTable {
    Matrix theta_tilde;
    double tci = 0.0;
    Vector to_others;
    Vector from_others;
    Vector net;
    std::size_t horizon = 0;
};

/// Equation-by-equation OLS with intercept. All equations share the regressor matrix,
/// so one QR solve handles the whole system.
inline VarModel fit_var(const MultiSeries& data, std::size_t p) {
    data.validate();
    const auto N = data.cols();
    const auto T = data.rows();
    if (N < 1)
        throw DataError("VAR needs at least one series");
    if (p < 1)
        throw ConfigError("VAR order must be at least 1");
    if (T <= p || T - p < 10 * N * p)
        throw DataError("VAR(" + std::to_string(p) + ") on " + std::to_string(N) + " series needs at least " +
                        std::to_string(10 * N * p + p) + " observations, got " + std::to_string(T));

    const auto rows = static_cast<Eigen::Index>(T - p);
    const auto k = static_cast<Eigen::Index>(1 + N * p);
    Matrix X(rows, k);
    Matrix Y(rows, static_cast<Eigen::Index>(N));
    for (std::size_t t = p; t < T; ++t) {
        const auto r = static_cast<Eigen::Index>(t - p);
        X(r, 0) = 1.0;
        for (std::size_t lag = 1; lag <= p; ++lag)
            for (std::size_t j = 0; j < N; ++j)
                X(r, static_cast<Eigen::Index>(1 + (lag - 1) * N + j)) = data.columns[j][t - lag];
        for (std::size_t j = 0; j < N; ++j)
            Y(r, static_cast<Eigen::Index>(j)) = data.columns[j][t];
    }

    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    if (qr.rank() < k)
        throw EstimationError("VAR regressor matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(k) + ")");
    const Matrix B = qr.solve(Y); // k x N; column j holds equation j

    VarModel m;
    m.order = p;
    m.intercept = B.row(0).transpose();
    for (std::size_t lag = 1; lag <= p; ++lag)
        m.coefficients.push_back(
            B.middleRows(static_cast<Eigen::Index>(1 + (lag - 1) * N), static_cast<Eigen::Index>(N)).transpose());
    const Matrix E = Y - X * B;
    m.sigma = (E.transpose() * E) / static_cast<double>(rows);
    m.sigma = 0.5 * (m.sigma + m.sigma.transpose());
    return m;
}

/// Psi_0 = I, Psi_h = sum_{i=1}^{min(h,p)} Phi_i Psi_{h-i}.
inline std::vector<Matrix> ma_coefficients(const VarModel& model, std::size_t H) {
    if (H < 1)
        throw ConfigError("MA horizon must be at least 1");
    const auto N = static_cast<Eigen::Index>(model.dim());
    std::vector<Matrix> psi;
    psi.reserve(H);
    psi.push_back(Matrix::Identity(N, N));
    for (std::size_t h = 1; h < H; ++h) {
        Matrix acc = Matrix::Zero(N, N);
        for (std::size_t i = 1; i <= std::min(h, model.coefficients.size()); ++i)
            acc += model.coefficients[i - 1] * psi[h - i];
        psi.push_back(std::move(acc));
    }
    return psi;
}

/// Generalized FEVD over horizons 0..H-1 (unnormalized).
inline Matrix gfevd(const VarModel& model, std::size_t H) {
    const auto N = static_cast<Eigen::Index>(model.dim());
    for (Eigen::Index k = 0; k < N; ++k)
        if (!(model.sigma(k, k) > 0.0))
            throw DomainError("gfevd: residual variance of series " + std::to_string(k) + " is not positive");
    const auto psi = ma_coefficients(model, H);

    Matrix num = Matrix::Zero(N, N);
    Vector den = Vector::Zero(N);
    for (const auto& P : psi) {
        const Matrix PS = P * model.sigma;          // (j,k) = e_j' Psi_h Sigma e_k
        num += PS.cwiseAbs2();
        den += (PS * P.transpose()).diagonal();     // e_j' Psi_h Sigma Psi_h' e_j
    }
    Matrix theta(N, N);
    for (Eigen::Index j = 0; j < N; ++j)
        for (Eigen::Index k = 0; k < N; ++k)
            theta(j, k) = num(j, k) / model.sigma(k, k) / den(j);
    return theta;
}

inline Matrix normalize_rows(const Matrix& theta) {
    Matrix out = theta;
    for (Eigen::Index j = 0; j < theta.rows(); ++j) {
        const double s = theta.row(j).sum();
        if (!(s > 0.0))
            throw DomainError("normalize_rows: row " + std::to_string(j) + " sums to zero");
        out.row(j) /= s;
    }
    return out;
}

/// Total, directional and net connectedness from a row-normalized table.
/// "to" is the off-diagonal column sum, "from" the off-diagonal row sum.
inline ConnectednessTable indices(const Matrix& theta_tilde) {
    const auto N = theta_tilde.rows();
    if (N != theta_tilde.cols() || N < 1)
        throw DomainError("indices: table must be square and nonempty");
    for (Eigen::Index j = 0; j < N; ++j)
        if (std::abs(theta_tilde.row(j).sum() - 1.0) > 1e-8)
            throw DomainError("indices: row " + std::to_string(j) + " does not sum to 1");

    ConnectednessTable t;
    t.theta_tilde = theta_tilde;
    const Vector diag = theta_tilde.diagonal();
    t.from_others = 100.0 * (theta_tilde.rowwise().sum() - diag);
    t.to_others = 100.0 * (theta_tilde.colwise().sum().transpose() - diag);
    t.net = t.to_others - t.from_others;
    t.tci = t.from_others.sum() / static_cast<double>(N);
    return t;
}

inline ConnectednessTable connectedness(const VarModel& model, std::size_t H) {
    auto t = indices(normalize_rows(gfevd(model, H)));
    t.horizon = H;
    return t;
}

} // namespace risk::connect
