#include "sw/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "sw/error.hpp"

namespace sw {

namespace {

// Orthonormal Hermite recurrence at x; returns (p_n(x), p_n'(x)) for weight exp(-x^2).
std::pair<double, double> hermite_orthonormal(int n, double x) {
    double p_prev = 0.0;
    double p = 1.0 / std::pow(std::numbers::pi, 0.25);
    for (int j = 0; j < n; ++j) {
        const double p_next =
            x * std::sqrt(2.0 / (j + 1)) * p - std::sqrt(static_cast<double>(j) / (j + 1)) * p_prev;
        p_prev = p;
        p = p_next;
    }
    return {p, std::sqrt(2.0 * n) * p_prev};
}

}  // namespace

GaussHermiteRule::GaussHermiteRule(QuadratureSpec spec) {
    const int n = spec.nodes;
    if (n < 1 || n > 400) throw Error(ErrorCode::BadDimension, "Gauss-Hermite node count");

    // Golub-Welsch: Jacobi matrix of the physicists' Hermite polynomials.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        jac(k, k - 1) = std::sqrt(k / 2.0);
        jac(k - 1, k) = jac(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
    const Eigen::VectorXd& t = eig.eigenvalues();

    nodes_.resize(n);
    weights_.resize(n);
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        // Newton polish; eigenvector weights lose relative accuracy in the tails.
        double x = t(k);
        double dp = 1.0;
        for (int it = 0; it < 8; ++it) {
            auto [p, d] = hermite_orthonormal(n, x);
            dp = d;
            const double step = p / d;
            x -= step;
            if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
        }
        dp = hermite_orthonormal(n, x).second;
        nodes_[k] = std::numbers::sqrt2 * x;
        weights_[k] = 2.0 / (dp * dp) / std::sqrt(std::numbers::pi);
        total += weights_[k];
    }
    for (double& w : weights_) w /= total;
}

}  // namespace sw
