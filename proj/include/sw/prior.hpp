#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sw {

/// Finite discrete spin distribution: sorted distinct atoms with positive
/// weights summing to one. Immutable once built.
class Prior {
public:
    const std::vector<double>& atoms() const noexcept { return atoms_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& log_weights() const noexcept { return log_weights_; }
    const std::string& label() const noexcept { return label_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    /// max |s_k|
    double bound() const noexcept { return bound_; }

    /// Index of the atom hit by inverse-CDF lookup of u in [0,1).
    std::size_t sample_index(double u) const noexcept;

    /// Index of `value` among the atoms, or size() if it is not an atom.
    std::size_t index_of(double value) const noexcept;

    friend Prior make_prior(std::span<const double>, std::span<const double>, std::string);

private:
    Prior() = default;

    std::vector<double> atoms_;
    std::vector<double> weights_;
    std::vector<double> log_weights_;
    std::vector<double> cdf_;
    std::string label_;
    double bound_ = 0.0;
};

/// Throws Error{EmptySupport | NegativeWeight | DuplicateAtom | BadWeights | BadDimension}.
/// Weights within 1e-12 of unit mass are renormalized, anything further off is rejected.
Prior make_prior(std::span<const double> atoms, std::span<const double> weights,
                 std::string label = "custom");

Prior rademacher();
Prior bernoulli(double p);

/// Parses "rademacher" or "bernoulli(p)".
Prior prior_by_name(std::string_view name);

double moment(const Prior& p, unsigned k);
double mean(const Prior& p);
bool is_symmetric(const Prior& p);

}  // namespace sw
