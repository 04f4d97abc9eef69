#include "sw/prior.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "sw/error.hpp"

namespace sw {

namespace {
constexpr double kNormTol = 1e-12;
constexpr double kSymTol = 1e-12;
}  // namespace

Prior make_prior(std::span<const double> atoms, std::span<const double> weights,
                 std::string label) {
    if (atoms.empty()) throw Error(ErrorCode::EmptySupport, "prior needs at least one atom");
    if (atoms.size() != weights.size())
        throw Error(ErrorCode::BadDimension, "atoms and weights differ in length");

    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (!std::isfinite(atoms[k])) throw Error(ErrorCode::BadWeights, "non-finite atom");
        if (!(weights[k] > 0.0) || !std::isfinite(weights[k]))
            throw Error(ErrorCode::NegativeWeight, "weights must be positive");
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return atoms[a] < atoms[b]; });
    for (std::size_t k = 1; k < order.size(); ++k)
        if (atoms[order[k]] == atoms[order[k - 1]])
            throw Error(ErrorCode::DuplicateAtom, "atom " + std::to_string(atoms[order[k]]));

    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > kNormTol)
        throw Error(ErrorCode::BadWeights, "weights sum to " + std::to_string(total));

    Prior p;
    p.label_ = std::move(label);
    for (auto k : order) {
        p.atoms_.push_back(atoms[k]);
        p.weights_.push_back(weights[k] / total);
    }
    double acc = 0.0;
    for (double w : p.weights_) {
        p.log_weights_.push_back(std::log(w));
        acc += w;
        p.cdf_.push_back(acc);
    }
    p.cdf_.back() = 1.0;
    for (double s : p.atoms_) p.bound_ = std::max(p.bound_, std::abs(s));
    return p;
}

std::size_t Prior::sample_index(double u) const noexcept {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
}

std::size_t Prior::index_of(double value) const noexcept {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), value);
    if (it != atoms_.end() && *it == value) return static_cast<std::size_t>(it - atoms_.begin());
    return atoms_.size();
}

Prior rademacher() {
    const double a[] = {-1.0, 1.0};
    const double w[] = {0.5, 0.5};
    return make_prior(a, w, "rademacher");
}

Prior bernoulli(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::BadWeights, "bernoulli(p) needs 0<p<1");
    const double a[] = {0.0, 1.0};
    const double w[] = {1.0 - p, p};
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, p);
    return make_prior(a, w, "bernoulli(" + std::string(buf, res.ptr) + ")");
}

Prior prior_by_name(std::string_view name) {
    if (name == "rademacher") return rademacher();
    constexpr std::string_view head = "bernoulli(";
    if (name.starts_with(head) && name.ends_with(")")) {
        std::string arg(name.substr(head.size(), name.size() - head.size() - 1));
        std::size_t used = 0;
        double p = 0.0;
        try {
            p = std::stod(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != arg.size() || arg.empty())
            throw Error(ErrorCode::ConfigError, "bad bernoulli parameter '" + arg + "'");
        return bernoulli(p);
    }
    throw Error(ErrorCode::ConfigError, "unknown prior '" + std::string(name) + "'");
}

double moment(const Prior& p, unsigned k) {
    double m = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double pw = 1.0;
        for (unsigned e = 0; e < k; ++e) pw *= p.atoms()[i];
        m += p.weights()[i] * pw;
    }
    return m;
}

double mean(const Prior& p) { return moment(p, 1); }

bool is_symmetric(const Prior& p) {
    const auto& s = p.atoms();
    const auto& w = p.weights();
    const std::size_t n = s.size();
    // atoms are sorted, so the mirror of atom k is atom n-1-k
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(s[k] + s[n - 1 - k]) > kSymTol) return false;
        if (std::abs(w[k] - w[n - 1 - k]) > kSymTol) return false;
    }
    return true;
}

}  // namespace sw
