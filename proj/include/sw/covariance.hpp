#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "sw/prior.hpp"
#include "sw/quadrature.hpp"
#include "sw/scalar_channel.hpp"

namespace sw {

/// The three distinct limiting covariances of the rescaled overlaps:
/// A = Var(xi_ab), B = Cov(xi_ab, xi_ac), C = Cov(xi_ab, xi_cd).
struct CovarianceResult {
    double A = 0.0, B = 0.0, C = 0.0;
    double mu1 = 0.0, mu2 = 0.0;
    bool invertible = true;
    int n = 0;                        // replica count of the general-n solve, 0 for closed form
    double condition = 1.0;           // condition estimate of 1 - lambda B (general-n only)
    double symmetry_residual = 0.0;   // max spread within an index-overlap class
};

double mu1(double a1, double a2, double a3, double lambda);
double mu2(double a1, double a2, double a3, double lambda);

/// Closed-form covariances. Throws Error{Critical} when |1 - mu1| or |1 - mu2| < 1e-12.
CovarianceResult covariance_closed_form(double a1, double a2, double a3, double lambda);

/// Same, but reports a pole as invertible=false with NaN entries instead of throwing.
CovarianceResult covariance_closed_form_or_nan(double a1, double a2, double a3, double lambda);

/// 3x3 matrix of the single-overlap cavity system, acting on (phi', psi, zeta).
Eigen::Matrix3d build_M(double a1, double a2, double a3);

using ReplicaPair = std::pair<int, int>;

/// Which (n+1,n+2)/(n+1,n+2) entry of the cavity B matrix to use. `derived` keeps the
/// a1 contribution produced by the cavity expansion; `displayed` drops it.
enum class CavityConvention { derived, displayed };

/// Cavity linear system for n real replicas. Rows: pairs (r,r') within 1..n in
/// lexicographic order, then (r,n+1) for r=1..n, then (n+1,n+2). Columns of Amat:
/// the first n(n-1)/2 rows' pairs.
struct CavitySystem {
    int n = 0;
    std::vector<ReplicaPair> rows;
    std::vector<ReplicaPair> cols;
    Eigen::MatrixXd Amat;
    Eigen::MatrixXd Bmat;
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;
    CavityConvention convention = CavityConvention::derived;
};

/// a1 if {r,s}={a,b}, a2 if exactly one index shared, a3 if disjoint.
double overlap_coefficient(ReplicaPair rs, ReplicaPair ab, double a1, double a2, double a3);

/// Throws Error{BadDimension} for n < 2.
CavitySystem build_cavity_system(int n, double a1, double a2, double a3,
                                 CavityConvention convention = CavityConvention::derived);

/// Solves (1 - lambda B)^{-1} A, with the entries re-evaluated in long double from
/// (a1, a2, a3), and reads A, B, C off the column of pair (1,2):
/// row (1,2), row (1,n+1) and row (n+1,n+2). Throws Error{Singular} when the
/// condition estimate exceeds 1e12.
CovarianceResult solve_covariance_general_n(const CavitySystem& sys, double lambda);

/// Full (1 - lambda B)^{-1} A, for inspection.
Eigen::MatrixXd cavity_solution(const CavitySystem& sys, double lambda);

struct TrajectoryPoint {
    double lambda_prime = 0.0;
    double h = 0.0;
    double q = 0.0;
};

/// Point lambda' in [0, lambda] of the constant-overlap path h(lambda') = h0 - lambda' F(h0),
/// h0 = lambda qbar(lambda), together with the overlap solved at (lambda', h(lambda')).
/// Propagates Error{NoConvergence}; Error{BadDimension} if lambda' is outside [0, lambda].
TrajectoryPoint constant_overlap_trajectory(const Prior& p, double lambda, double lambda_prime,
                                            const GaussHermiteRule& rule,
                                            const SolverOptions& opt = {});

}  // namespace sw
