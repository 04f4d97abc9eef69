#pragma once

#include <span>
#include <vector>

#include "sw/prior.hpp"
#include "sw/quadrature.hpp"

namespace sw {

/// Scalar Gaussian channel y = sqrt(r) x* + z at effective SNR r = lambda q + h.
struct ScalarBracketParams {
    double r = 0.0;
    double z = 0.0;
    double xstar = 0.0;
};

/// <x^k> under weights w(s) exp((sqrt(r) z + r x*) s - r s^2 / 2), one entry per power.
std::vector<double> bracket_moment(const Prior& p, const ScalarBracketParams& params,
                                   std::span<const unsigned> powers);

/// Quenched scalar-channel averages at SNR r (quadrature over z, exact sum over x*).
struct ChannelAverages {
    double overlap_star = 0.0;    // E x* <x>  (= F(r))
    double overlap_self = 0.0;    // E <x>^2
    double var_sq = 0.0;          // E (<x^2> - <x>^2)^2  (= F'(r))
    double m2_sq = 0.0;           // E <x^2>^2
    double m2_m1sq = 0.0;         // E <x^2> <x>^2
    double m1_4 = 0.0;            // E <x>^4
    double log_partition = 0.0;   // E log Z(r)
};

ChannelAverages channel_averages(const Prior& p, double r, const GaussHermiteRule& rule);

double F(const Prior& p, double r, const GaussHermiteRule& rule);
double F_prime(const Prior& p, double r, const GaussHermiteRule& rule);

/// -lambda q^2 / 4 + E log Z(lambda q + h), the function maximized by qbar.
double rs_potential(const Prior& p, double lambda, double h, double q, const GaussHermiteRule& rule);

struct ScalarTheory {
    double lambda = 0.0;
    double h = 0.0;
    double qbar = 0.0;
    double pressure = 0.0;
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;
    double mu1 = 0.0, mu2 = 0.0;
    double residual = 0.0;
    std::vector<double> roots;   // every fixed point found, ascending
    bool critical = false;       // |1 - mu1| small or tied potential maxima
};

struct SolverOptions {
    double tol = 1e-10;
    double damping = 0.5;
    int max_iterations = 20000;
    int scan_points = 200;
    double critical_margin = 1e-3;
};

/// Throws Error{NoConvergence} when neither damped iteration nor bracketing finds a root.
ScalarTheory solve_fixed_point(const Prior& p, double lambda, double h, const GaussHermiteRule& rule,
                               const SolverOptions& opt = {});

inline constexpr double kZeroOverlapThreshold = 1e-6;

/// Largest grid lambda whose qbar stays below kZeroOverlapThreshold; 0 when the
/// smallest grid point already has qbar above it.
double estimate_lambda_c(const Prior& p, std::span<const double> lambda_grid,
                         const GaussHermiteRule& rule, const SolverOptions& opt = {});

}  // namespace sw
