#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sw/prior.hpp"

namespace sw {

/// One disorder realization. Site N (index N-1) is the cavity site: its couplings to the
/// rest are scaled by t, and for t < 1 it also sees a scalar channel at SNR lambda (1-t) q_cav.
struct Instance {
    int N = 0;
    double lambda = 0.0;
    double h = 0.0;
    double t = 1.0;
    double q_cav = 0.0;
    std::vector<double> xstar;
    std::vector<double> z_upper;   // packed strict upper triangle, row-major
    std::vector<double> hnoise;
    double z_cav = 0.0;
    std::uint64_t seed = 0;

    double z(int i, int j) const;   // symmetric, 0 on the diagonal
    /// Fraction of the pair interaction kept: t for pairs touching site N-1, else 1.
    double pair_scale(int i, int j) const { return (i == N - 1 || j == N - 1) ? t : 1.0; }
};

struct Configuration {
    std::vector<double> x;
};

std::size_t packed_index(int N, int i, int j);   // requires i < j

/// Throws Error{BadDimension} for N < 2, t outside [0,1], or negative lambda, h, q_cav.
Instance sample_instance(const Prior& p, int N, double lambda, double h, double t, double q_cav,
                         std::uint64_t seed);

/// Same x*, fresh z, hnoise and z_cav drawn from `seed`.
Instance resample_noise(const Instance& inst, std::uint64_t seed);

/// -H of the configuration.
double energy(const Instance& inst, const Configuration& cfg);

struct LocalField {
    double theta = 0.0;
    double b = 0.0;
};

/// Conditional weight of x_i = s is w(s) exp(theta s - b s^2 / 2).
LocalField local_field(const Instance& inst, const Configuration& cfg, int i);

/// (1/N) sum_i x_i y_i.
double overlap(std::span<const double> a, std::span<const double> b);
/// Same sum without the cavity site, still normalized by N.
double overlap_minus(std::span<const double> a, std::span<const double> b);

inline double overlap(const Configuration& a, const Configuration& b) { return overlap(a.x, b.x); }
inline double overlap_minus(const Configuration& a, const Configuration& b) {
    return overlap_minus(a.x, b.x);
}

/// Snapshot holding the prior and generation parameters; replaying it regenerates the
/// instance bit for bit.
struct InstanceSnapshot {
    std::vector<double> atoms;
    std::vector<double> weights;
    std::string prior_label;
    int N = 0;
    double lambda = 0.0, h = 0.0, t = 1.0, q_cav = 0.0;
    std::uint64_t seed = 0;
};

std::string save_snapshot(const Prior& p, const Instance& inst);
InstanceSnapshot load_snapshot(const std::string& text);
Instance replay(const InstanceSnapshot& snap);

}  // namespace sw
