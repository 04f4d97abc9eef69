#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sw/model.hpp"
#include "sw/prior.hpp"
#include "sw/rng.hpp"

namespace sw {

enum class InitMode {
    planted,   // start at x*, an exact posterior draw
    prior,     // i.i.d. prior draw
};

struct ChainSpec {
    int n_replicas = 1;
    int sweeps_burnin = 2000;
    int sweeps_between_samples = 10;
    int n_samples = 1;
    std::uint64_t seed = 0;
    InitMode init = InitMode::planted;
};

/// Throws Error{BadDimension} when a count is out of range or n_replicas > 8.
void validate(const ChainSpec& spec);

struct GibbsSample {
    std::vector<Configuration> configs;
    long sweep_index = 0;
};

enum class Kernel {
    cached,      // incremental local fields, periodic full refresh
    reference,   // direct dot product per site
};

/// Dense per-instance coupling data shared by every replica.
class Couplings {
public:
    explicit Couplings(const Instance& inst);

    int N() const { return n_; }
    /// theta_i = sum_j J_ij x_j + theta0_i
    const double* row(int i) const { return J_.data() + static_cast<std::size_t>(i) * n_; }
    double theta0(int i) const { return theta0_[i]; }
    /// b_i from the running sum of x_j^2 over the non-cavity sites, the cavity site's
    /// x^2 and x_i^2.
    double b(int i, double bulk_sq, double cav_sq, double xi_sq) const;

private:
    int n_;
    std::vector<double> J_;
    std::vector<double> theta0_;
    std::vector<double> b0_;
    double bulk_;
    double edge_;
};

/// One chain on a fixed instance. Sites are visited in index order each sweep and
/// resampled from the exact conditional w(s) exp(theta s - b s^2/2) / Z.
class HeatBath {
public:
    HeatBath(const Couplings& c, const Prior& p, Configuration init, Stream rng,
             Kernel kernel = Kernel::cached);

    void sweep();
    const Configuration& state() const { return cfg_; }
    long sweeps_done() const { return sweeps_; }
    /// Largest |cached - recomputed| field seen at a refresh.
    double max_drift() const { return max_drift_; }

    static constexpr int kRefreshEvery = 100;
    static constexpr double kDriftTolerance = 1e-8;

private:
    void refresh();
    double draw(double theta, double b);

    const Couplings& c_;
    const Prior& p_;
    Configuration cfg_;
    Stream rng_;
    Kernel kernel_;
    std::vector<double> theta_;
    std::vector<double> logits_;
    double bulk_sq_ = 0.0;
    long sweeps_ = 0;
    double max_drift_ = 0.0;
};

/// Stream for replica r of a chain; depends on both the instance seed and the chain seed.
Stream chain_stream(const Instance& inst, const ChainSpec& spec, int replica);

Configuration initial_configuration(const Instance& inst, const Prior& p, const ChainSpec& spec,
                                    int replica);

struct ChainDiagnostics {
    double max_drift = 0.0;
};

/// Calls `emit` for each of the spec.n_samples samples, in sweep order.
ChainDiagnostics run_chain(const Instance& inst, const Prior& p, const ChainSpec& spec,
                           const std::function<void(const GibbsSample&)>& emit,
                           Kernel kernel = Kernel::cached);

std::vector<GibbsSample> run_chain(const Instance& inst, const Prior& p, const ChainSpec& spec,
                                   Kernel kernel = Kernel::cached);

/// Runs body(k) for k in [0, n). With `parallel` the indices are split across OpenMP
/// threads; bodies must write only to slot k of their outputs.
void for_each_instance(int n, const std::function<void(int)>& body, bool parallel = true);

}  // namespace sw
