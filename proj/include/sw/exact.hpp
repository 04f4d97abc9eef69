#pragma once

#include <cstddef>
#include <vector>

#include "sw/model.hpp"
#include "sw/prior.hpp"

namespace sw {

inline constexpr std::size_t kMaxExactStates = std::size_t{1} << 24;

/// Exact Gibbs measure of one instance by full enumeration. State index k encodes
/// site i in base-|atoms| digit i (site 0 least significant).
class ExactGibbs {
public:
    /// Throws Error{TooLarge} beyond kMaxExactStates states.
    ExactGibbs(const Instance& inst, const Prior& p);

    std::size_t n_states() const { return prob_.size(); }
    const std::vector<double>& probabilities() const { return prob_; }
    double log_partition() const { return log_z_; }
    Configuration state(std::size_t index) const;

    int N() const { return n_; }
    const std::vector<double>& xstar() const { return xstar_; }

    /// <x_i>
    const std::vector<double>& m1() const { return m1_; }
    /// <x_i x_j>, row-major N x N
    const std::vector<double>& m2() const;
    /// <x_i x_j x_N> with x_N the cavity site, row-major N x N
    const std::vector<double>& m3() const;

    double m2(int i, int j) const { return m2()[static_cast<std::size_t>(i) * n_ + j]; }
    double m3(int i, int j) const { return m3()[static_cast<std::size_t>(i) * n_ + j]; }

    /// Two-replica brackets assembled from single-replica moments.
    double q12() const;
    double q1star() const;
    double q12_sq() const;
    double q1star_sq() const;

private:
    void pair_moments() const;

    int n_;
    std::vector<double> atoms_;
    std::vector<double> xstar_;
    std::vector<double> prob_;
    std::vector<double> m1_;
    mutable std::vector<double> m2_;
    mutable std::vector<double> m3_;
    double log_z_ = 0.0;
};

enum class Observable { q12, q1star, q12_sq, q1star_sq };

double enumerate_exact(const Instance& inst, const Prior& p, Observable obs);

}  // namespace sw
