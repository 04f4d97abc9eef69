#include "sw/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#include "sw/error.hpp"

namespace sw {

void validate(const ChainSpec& spec) {
    if (spec.n_replicas < 1 || spec.n_replicas > 8)
        throw Error(ErrorCode::BadDimension, "n_replicas must be in 1..8");
    if (spec.sweeps_burnin < 0 || spec.sweeps_between_samples < 1 || spec.n_samples < 1)
        throw Error(ErrorCode::BadDimension, "chain sweep counts");
}

Couplings::Couplings(const Instance& inst) : n_(inst.N) {
    const int N = n_;
    const double lam_n = inst.lambda / N;
    bulk_ = lam_n;
    edge_ = lam_n * inst.t;
    J_.assign(static_cast<std::size_t>(N) * N, 0.0);
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            const double s = inst.pair_scale(i, j);
            const double v = std::sqrt(lam_n * s) * inst.z(i, j) + lam_n * s * inst.xstar[i] * inst.xstar[j];
            J_[static_cast<std::size_t>(i) * N + j] = v;
            J_[static_cast<std::size_t>(j) * N + i] = v;
        }
    }
    theta0_.assign(N, 0.0);
    b0_.assign(N, 0.0);
    if (inst.t < 1.0) {
        const double r = inst.lambda * (1.0 - inst.t) * inst.q_cav;
        theta0_[N - 1] += std::sqrt(r) * inst.z_cav + r * inst.xstar[N - 1];
        b0_[N - 1] += r;
    }
    if (inst.h > 0.0) {
        for (int i = 0; i < N; ++i) {
            theta0_[i] += std::sqrt(inst.h) * inst.hnoise[i] + inst.h * inst.xstar[i];
            b0_[i] += inst.h;
        }
    }
}

double Couplings::b(int i, double bulk_sq, double cav_sq, double xi_sq) const {
    if (i == n_ - 1) return edge_ * bulk_sq + b0_[i];
    return bulk_ * (bulk_sq - xi_sq) + edge_ * cav_sq + b0_[i];
}

HeatBath::HeatBath(const Couplings& c, const Prior& p, Configuration init, Stream rng, Kernel kernel)
    : c_(c), p_(p), cfg_(std::move(init)), rng_(rng), kernel_(kernel), logits_(p.size()) {
    if (static_cast<int>(cfg_.x.size()) != c.N())
        throw Error(ErrorCode::BadDimension, "initial configuration size");
    refresh();
}

void HeatBath::refresh() {
    const int N = c_.N();
    const auto& x = cfg_.x;
    double drift = 0.0;
    const bool have_cache = theta_.size() == static_cast<std::size_t>(N);
    std::vector<double> fresh(N);
    for (int i = 0; i < N; ++i) {
        const double* r = c_.row(i);
        double acc = c_.theta0(i);
        for (int j = 0; j < N; ++j) acc += r[j] * x[j];
        fresh[i] = acc;
        if (have_cache) drift = std::max(drift, std::abs(acc - theta_[i]));
    }
    theta_ = std::move(fresh);
    bulk_sq_ = 0.0;
    for (int j = 0; j + 1 < N; ++j) bulk_sq_ += x[j] * x[j];
    max_drift_ = std::max(max_drift_, drift);
}

double HeatBath::draw(double theta, double b) {
    const auto& s = p_.atoms();
    const auto& lw = p_.log_weights();
    const std::size_t K = s.size();
    double mx = -INFINITY;
    for (std::size_t k = 0; k < K; ++k) {
        logits_[k] = lw[k] + theta * s[k] - 0.5 * b * s[k] * s[k];
        mx = std::max(mx, logits_[k]);
    }
    double z = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        logits_[k] = std::exp(logits_[k] - mx);
        z += logits_[k];
    }
    const double u = rng_.uniform() * z;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
        acc += logits_[k];
        if (u < acc) return s[k];
    }
    return s[K - 1];
}

void HeatBath::sweep() {
    const int N = c_.N();
    auto& x = cfg_.x;
    if (kernel_ == Kernel::reference) {
        for (int i = 0; i < N; ++i) {
            const double* r = c_.row(i);
            double theta = c_.theta0(i);
            for (int j = 0; j < N; ++j) theta += r[j] * x[j];
            double bulk_sq = 0.0;
            for (int j = 0; j + 1 < N; ++j) bulk_sq += x[j] * x[j];
            const double b = c_.b(i, bulk_sq, x[N - 1] * x[N - 1], x[i] * x[i]);
            x[i] = draw(theta, b);
        }
        ++sweeps_;
        return;
    }

    for (int i = 0; i < N; ++i) {
        const double xi = x[i];
        const double b = c_.b(i, bulk_sq_, x[N - 1] * x[N - 1], xi * xi);
        const double next = draw(theta_[i], b);
        if (next != xi) {
            const double d = next - xi;
            const double* r = c_.row(i);
            for (int j = 0; j < N; ++j) theta_[j] += r[j] * d;
            if (i + 1 < N) bulk_sq_ += next * next - xi * xi;
            x[i] = next;
        }
    }
    ++sweeps_;
    if (sweeps_ % kRefreshEvery == 0) refresh();
}

Stream chain_stream(const Instance& inst, const ChainSpec& spec, int replica) {
    const std::uint64_t key = spec.seed ^ (inst.seed * 0x9E3779B97F4A7C15ull);
    return Stream(key, stream_id(streams::chain, static_cast<std::uint32_t>(replica)));
}

Configuration initial_configuration(const Instance& inst, const Prior& p, const ChainSpec& spec,
                                    int replica) {
    Configuration cfg;
    if (spec.init == InitMode::planted) {
        cfg.x = inst.xstar;
        return cfg;
    }
    const std::uint64_t key = spec.seed ^ (inst.seed * 0x9E3779B97F4A7C15ull);
    Stream s(key, stream_id(streams::init, static_cast<std::uint32_t>(replica)));
    cfg.x.resize(inst.N);
    for (double& v : cfg.x) v = p.atoms()[p.sample_index(s.uniform())];
    return cfg;
}

ChainDiagnostics run_chain(const Instance& inst, const Prior& p, const ChainSpec& spec,
                           const std::function<void(const GibbsSample&)>& emit, Kernel kernel) {
    validate(spec);
    const Couplings c(inst);
    std::vector<HeatBath> chains;
    chains.reserve(spec.n_replicas);
    for (int r = 0; r < spec.n_replicas; ++r)
        chains.emplace_back(c, p, initial_configuration(inst, p, spec, r), chain_stream(inst, spec, r),
                            kernel);

    for (auto& ch : chains)
        for (int s = 0; s < spec.sweeps_burnin; ++s) ch.sweep();

    GibbsSample sample;
    sample.configs.resize(spec.n_replicas);
    for (int k = 0; k < spec.n_samples; ++k) {
        if (k > 0)
            for (auto& ch : chains)
                for (int s = 0; s < spec.sweeps_between_samples; ++s) ch.sweep();
        for (int r = 0; r < spec.n_replicas; ++r) sample.configs[r] = chains[r].state();
        sample.sweep_index = chains[0].sweeps_done();
        emit(sample);
    }

    ChainDiagnostics d;
    for (const auto& ch : chains) d.max_drift = std::max(d.max_drift, ch.max_drift());
    return d;
}

std::vector<GibbsSample> run_chain(const Instance& inst, const Prior& p, const ChainSpec& spec,
                                   Kernel kernel) {
    std::vector<GibbsSample> out;
    run_chain(inst, p, spec, [&](const GibbsSample& s) { out.push_back(s); }, kernel);
    return out;
}

void for_each_instance(int n, const std::function<void(int)>& body, bool parallel) {
    if (!parallel) {
        for (int k = 0; k < n; ++k) body(k);
        return;
    }
    std::exception_ptr failure;
    std::mutex m;
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n; ++k) {
        try {
            body(k);
        } catch (...) {
            std::lock_guard<std::mutex> lock(m);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace sw
