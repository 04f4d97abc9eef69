#include "sw/model.hpp"

#include <cmath>
#include "json.hpp"

#include "sw/error.hpp"
#include "sw/rng.hpp"

namespace sw {

std::size_t packed_index(int N, int i, int j) {
    // rows 0..i-1 hold (N-1) + (N-2) + ... + (N-i) entries
    const auto n = static_cast<std::size_t>(N);
    const auto a = static_cast<std::size_t>(i);
    return a * (2 * n - a - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

double Instance::z(int i, int j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    return z_upper[packed_index(N, i, j)];
}

namespace {

void fill_noise(Instance& inst, std::uint64_t seed) {
    const int N = inst.N;
    Stream zs(seed, stream_id(streams::z, 0));
    inst.z_upper.resize(static_cast<std::size_t>(N) * (N - 1) / 2);
    for (double& v : inst.z_upper) v = zs.normal();
    Stream hs(seed, stream_id(streams::hnoise, 0));
    inst.hnoise.resize(N);
    for (double& v : inst.hnoise) v = hs.normal();
    Stream cs(seed, stream_id(streams::z_cav, 0));
    inst.z_cav = cs.normal();
}

}  // namespace

Instance sample_instance(const Prior& p, int N, double lambda, double h, double t, double q_cav,
                         std::uint64_t seed) {
    if (N < 2) throw Error(ErrorCode::BadDimension, "N must be at least 2");
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::BadDimension, "t must lie in [0,1]");
    if (lambda < 0.0 || h < 0.0 || q_cav < 0.0)
        throw Error(ErrorCode::BadDimension, "lambda, h and q_cav must be nonnegative");
    Instance inst;
    inst.N = N;
    inst.lambda = lambda;
    inst.h = h;
    inst.t = t;
    inst.q_cav = q_cav;
    inst.seed = seed;
    Stream xs(seed, stream_id(streams::xstar, 0));
    inst.xstar.resize(N);
    for (double& v : inst.xstar) v = p.atoms()[p.sample_index(xs.uniform())];
    fill_noise(inst, seed);
    return inst;
}

Instance resample_noise(const Instance& inst, std::uint64_t seed) {
    Instance out = inst;
    out.seed = seed;
    fill_noise(out, seed);
    return out;
}

double energy(const Instance& inst, const Configuration& cfg) {
    const int N = inst.N;
    if (static_cast<int>(cfg.x.size()) != N) throw Error(ErrorCode::BadDimension, "configuration size");
    const auto& x = cfg.x;
    const auto& xs = inst.xstar;
    const double lam_n = inst.lambda / N;
    const double c = std::sqrt(lam_n);
    const double ct = std::sqrt(lam_n * inst.t);

    double bulk = 0.0;
    std::size_t k = 0;
    for (int i = 0; i < N - 1; ++i) {
        for (int j = i + 1; j < N - 1; ++j, ++k) {
            bulk += c * inst.z_upper[k] * x[i] * x[j] + lam_n * x[i] * xs[i] * x[j] * xs[j] -
                    0.5 * lam_n * x[i] * x[i] * x[j] * x[j];
        }
        const int j = N - 1;
        bulk += ct * inst.z_upper[k] * x[i] * x[j] +
                inst.t * (lam_n * x[i] * xs[i] * x[j] * xs[j] - 0.5 * lam_n * x[i] * x[i] * x[j] * x[j]);
        ++k;
    }

    if (inst.t < 1.0) {
        const double r = inst.lambda * (1.0 - inst.t) * inst.q_cav;
        const double xn = x[N - 1];
        bulk += std::sqrt(r) * inst.z_cav * xn + r * xn * xs[N - 1] - 0.5 * r * xn * xn;
    }
    if (inst.h > 0.0) {
        const double sh = std::sqrt(inst.h);
        for (int i = 0; i < N; ++i)
            bulk += sh * inst.hnoise[i] * x[i] + inst.h * xs[i] * x[i] - 0.5 * inst.h * x[i] * x[i];
    }
    return bulk;
}

LocalField local_field(const Instance& inst, const Configuration& cfg, int i) {
    const int N = inst.N;
    if (static_cast<int>(cfg.x.size()) != N || i < 0 || i >= N)
        throw Error(ErrorCode::BadDimension, "site index or configuration size");
    const auto& x = cfg.x;
    const auto& xs = inst.xstar;
    const double lam_n = inst.lambda / N;
    LocalField f;
    for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const double s = inst.pair_scale(i, j);
        f.theta += std::sqrt(lam_n * s) * inst.z(i, j) * x[j] + lam_n * s * xs[i] * xs[j] * x[j];
        f.b += lam_n * s * x[j] * x[j];
    }
    if (i == N - 1 && inst.t < 1.0) {
        const double r = inst.lambda * (1.0 - inst.t) * inst.q_cav;
        f.theta += std::sqrt(r) * inst.z_cav + r * xs[i];
        f.b += r;
    }
    if (inst.h > 0.0) {
        f.theta += std::sqrt(inst.h) * inst.hnoise[i] + inst.h * xs[i];
        f.b += inst.h;
    }
    return f;
}

double overlap(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::BadDimension, "overlap lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}

double overlap_minus(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw Error(ErrorCode::BadDimension, "overlap lengths");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}

std::string save_snapshot(const Prior& p, const Instance& inst) {
    nlohmann::json j;
    j["prior"] = {{"label", p.label()}, {"atoms", p.atoms()}, {"weights", p.weights()}};
    j["N"] = inst.N;
    j["lambda"] = inst.lambda;
    j["h"] = inst.h;
    j["t"] = inst.t;
    j["q_cav"] = inst.q_cav;
    j["seed"] = inst.seed;
    j["rng"] = kRngVersion;
    return j.dump(2);
}

InstanceSnapshot load_snapshot(const std::string& text) {
    InstanceSnapshot s;
    try {
        const auto j = nlohmann::json::parse(text);
        s.prior_label = j.at("prior").at("label").get<std::string>();
        s.atoms = j.at("prior").at("atoms").get<std::vector<double>>();
        s.weights = j.at("prior").at("weights").get<std::vector<double>>();
        s.N = j.at("N").get<int>();
        s.lambda = j.at("lambda").get<double>();
        s.h = j.at("h").get<double>();
        s.t = j.at("t").get<double>();
        s.q_cav = j.at("q_cav").get<double>();
        s.seed = j.at("seed").get<std::uint64_t>();
        if (j.at("rng").get<std::string>() != kRngVersion)
            throw Error(ErrorCode::ConfigError, "snapshot written by a different generator version");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("bad snapshot: ") + e.what());
    }
    return s;
}

Instance replay(const InstanceSnapshot& snap) {
    const Prior p = make_prior(snap.atoms, snap.weights, snap.prior_label);
    return sample_instance(p, snap.N, snap.lambda, snap.h, snap.t, snap.q_cav, snap.seed);
}

}  // namespace sw
