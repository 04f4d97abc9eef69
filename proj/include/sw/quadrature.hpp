#pragma once

#include <vector>

namespace sw {

struct QuadratureSpec {
    int nodes = 61;
};

/// Gauss-Hermite rule rescaled for a standard normal: E f(z) ~ sum_k w_k f(z_k),
/// with z_k = sqrt(2) t_k and weights summing to one.
class GaussHermiteRule {
public:
    explicit GaussHermiteRule(QuadratureSpec spec = {});

    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    int size() const noexcept { return static_cast<int>(nodes_.size()); }

    template <class Fn>
    double expect(Fn&& f) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes_.size(); ++k) acc += weights_[k] * f(nodes_[k]);
        return acc;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

}  // namespace sw
