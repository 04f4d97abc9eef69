#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sw/exact.hpp"
#include "sw/model.hpp"
#include "sw/prior.hpp"
#include "sw/sampler.hpp"

namespace sw {

/// Overlaps among the ground truth (index 0) and replicas 1..n of one Gibbs sample.
struct OverlapArray {
    int n_replicas = 0;
    int N = 0;
    std::vector<double> q;      // dense (n+1) x (n+1)
    std::vector<double> last;   // x_N of each index, last[0] = x*_N

    int dim() const { return n_replicas + 1; }
    double at(int a, int b) const { return q[static_cast<std::size_t>(a) * dim() + b]; }
};

OverlapArray overlap_array(const Instance& inst, const GibbsSample& s);

/// xi = sqrt(N)(q - qbar) for every pair, and the variant without the cavity site.
struct OverlapSample {
    int N = 0;
    int n_replicas = 0;
    double qbar_used = 0.0;
    std::vector<double> q;
    std::vector<double> xi;
    std::vector<double> xi_minus;

    int dim() const { return n_replicas + 1; }
    double q_at(int a, int b) const { return q[static_cast<std::size_t>(a) * dim() + b]; }
    double xi_at(int a, int b) const { return xi[static_cast<std::size_t>(a) * dim() + b]; }
};

double rescale(double q, double qbar, int N);
double unscale(double xi, double qbar, int N);
OverlapSample rescale(const OverlapArray& q, double qbar);

/// Samples grouped by disorder instance.
using SamplesByInstance = std::vector<std::vector<OverlapSample>>;

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

inline constexpr int kBatchCount = 20;

/// Mean and batch-means standard error of per-instance values (contiguous batches).
Estimate batch_mean(std::span<const double> per_instance, int batches = kBatchCount);

struct CovarianceEstimate {
    int n_instances = 0;
    int n_samples = 0;
    Estimate mean_xi_real;   // average xi over replica pairs
    Estimate mean_xi_star;   // average xi over (*, a) pairs
    // pooled over every index pair of the same overlap type; * counts as a replica
    Estimate A, B, C;
    // real replicas only
    Estimate var12, cov12_13, cov12_23;
};

/// Throws Error{InsufficientData} with fewer than 2 samples or fewer than 2 replicas.
CovarianceEstimate empirical_covariance(const SamplesByInstance& samples);

struct NishimoriResult {
    double mean_replica = 0.0;   // E<q_ab> over replica pairs
    double mean_star = 0.0;      // E<q_a*>
    double gap = 0.0;            // mean_replica - mean_star
    double se = 0.0;
    bool squared = false;
    int n_instances = 0;
};

/// Throws Error{InsufficientData} with fewer than 2 instances or fewer than 2 replicas.
NishimoriResult nishimori_check(const SamplesByInstance& samples, bool squared = false);

struct NormalityResult {
    int n = 0;
    bool degenerate = false;
    double ks_stat = 0.0;
    double ks_p = 0.0;
    double skew = 0.0, skew_se = 0.0;
    double exkurt = 0.0, exkurt_se = 0.0;
};

/// Kolmogorov survival function Q(x) = P(sqrt(n) D > x) in the large-n limit.
double kolmogorov_q(double x);
double normal_cdf(double x);

/// KS against N(0, sigma2) plus skewness and excess kurtosis with jackknife SEs.
/// Throws Error{InsufficientData} below 100 samples.
NormalityResult normality_test(std::span<const double> xs, double sigma2);

struct ConcentrationFit {
    double slope2 = 0.0, intercept2 = 0.0;
    double slope4 = 0.0, intercept4 = 0.0;
};

/// Least-squares slopes of log(moment) against log N. Throws Error{InsufficientData}
/// with fewer than 3 distinct N.
ConcentrationFit concentration_fit(std::span<const double> Ns, std::span<const double> m2,
                                   std::span<const double> m4);

/// Normalized autocorrelation for lags 0..max_lag.
std::vector<double> autocorrelation(std::span<const double> xs, int max_lag);
/// 1 + 2 sum rho(k), summed until the lag exceeds 6 tau (self-consistent window).
double integrated_autocorrelation_time(std::span<const double> xs);

enum class CavityVariant {
    general,   // f of replicas only
    full,      // f may involve the ground truth
};

enum class CavityObservable { q12, q1star };

struct CavityCheckSpec {
    int N = 6;
    double lambda = 1.0;
    double q_cav = 0.0;
    double t0 = 0.5;
    double eps = 1e-3;
    int n_instances = 500;
    CavityObservable f = CavityObservable::q12;
    CavityVariant variant = CavityVariant::general;
    std::uint64_t seed = 1;
    bool parallel = true;
};

struct CavityCheckResult {
    double fd = 0.0;       // centered finite difference of nu_t(f) at t0
    double rhs = 0.0;      // identity's right-hand side at t0
    double se = 0.0;       // SE of the paired difference fd - rhs
    double se_fd = 0.0;
    double se_rhs = 0.0;
    int n_instances = 0;
};

/// <f>_t for one instance.
double cavity_observable(const ExactGibbs& g, CavityObservable f);
/// Per-instance right-hand side of the derivative identity with the cavity channel at q.
double cavity_rhs(const ExactGibbs& g, double lambda, double q, CavityObservable f, CavityVariant v);

/// Throws Error{BadF} for schemes outside {general: q12, full: q1*}, Error{TooLarge} from
/// enumeration, Error{BadDimension} when t0 +- eps leaves [0,1].
CavityCheckResult cavity_derivative_check(const Prior& p, const CavityCheckSpec& spec);

/// |fd - rhs| <= 3 se, with an absolute floor of 1e-12 for cases that vanish identically.
bool cavity_check_passes(const CavityCheckResult& r);

}  // namespace sw
