#include "sw/exact.hpp"

#include <algorithm>
#include <cmath>

#include "sw/error.hpp"
#include "sw/sampler.hpp"

namespace sw {

ExactGibbs::ExactGibbs(const Instance& inst, const Prior& p)
    : n_(inst.N), atoms_(p.atoms()), xstar_(inst.xstar) {
    const std::size_t K = p.size();
    std::size_t states = 1;
    for (int i = 0; i < n_; ++i) {
        if (states > kMaxExactStates / K)
            throw Error(ErrorCode::TooLarge, "more than 2^24 states to enumerate");
        states *= K;
    }

    const Couplings c(inst);
    const auto& lw = p.log_weights();
    std::vector<std::size_t> digit(n_, 0);
    Configuration cfg;
    cfg.x.assign(n_, atoms_[0]);
    double e = energy(inst, cfg);
    double prior_lw = n_ * lw[0];
    double bulk_sq = (n_ - 1) * atoms_[0] * atoms_[0];

    auto set_site = [&](int i, std::size_t d) {
        const double old = cfg.x[i];
        const double nv = atoms_[d];
        const double* r = c.row(i);
        double theta = c.theta0(i);
        for (int j = 0; j < n_; ++j) theta += r[j] * cfg.x[j];
        const double b = c.b(i, bulk_sq, cfg.x[n_ - 1] * cfg.x[n_ - 1], old * old);
        e += theta * (nv - old) - 0.5 * b * (nv * nv - old * old);
        prior_lw += lw[d] - lw[digit[i]];
        if (i + 1 < n_) bulk_sq += nv * nv - old * old;
        cfg.x[i] = nv;
        digit[i] = d;
    };

    std::vector<double> logw(states);
    for (std::size_t k = 0; k < states; ++k) {
        logw[k] = e + prior_lw;
        for (int i = 0; i < n_; ++i) {
            if (digit[i] + 1 < K) {
                set_site(i, digit[i] + 1);
                break;
            }
            set_site(i, 0);
        }
    }

    const double mx = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    for (double v : logw) z += std::exp(v - mx);
    log_z_ = mx + std::log(z);
    prob_.resize(states);
    for (std::size_t k = 0; k < states; ++k) prob_[k] = std::exp(logw[k] - log_z_);

    m1_.assign(n_, 0.0);
    std::fill(digit.begin(), digit.end(), 0);
    for (std::size_t k = 0; k < states; ++k) {
        for (int i = 0; i < n_; ++i) m1_[i] += prob_[k] * atoms_[digit[i]];
        for (int i = 0; i < n_; ++i) {
            if (++digit[i] < K) break;
            digit[i] = 0;
        }
    }
}

Configuration ExactGibbs::state(std::size_t index) const {
    const std::size_t K = atoms_.size();
    Configuration cfg;
    cfg.x.resize(n_);
    for (int i = 0; i < n_; ++i) {
        cfg.x[i] = atoms_[index % K];
        index /= K;
    }
    return cfg;
}

void ExactGibbs::pair_moments() const {
    if (!m2_.empty()) return;
    const std::size_t K = atoms_.size();
    const auto nn = static_cast<std::size_t>(n_) * n_;
    m2_.assign(nn, 0.0);
    m3_.assign(nn, 0.0);
    std::vector<std::size_t> digit(n_, 0);
    std::vector<double> x(n_, atoms_[0]);
    for (std::size_t k = 0; k < prob_.size(); ++k) {
        const double pk = prob_[k];
        const double pe = pk * x[n_ - 1];
        for (int i = 0; i < n_; ++i) {
            const double a = pk * x[i];
            const double ae = pe * x[i];
            double* r2 = m2_.data() + static_cast<std::size_t>(i) * n_;
            double* r3 = m3_.data() + static_cast<std::size_t>(i) * n_;
            for (int j = 0; j < n_; ++j) {
                r2[j] += a * x[j];
                r3[j] += ae * x[j];
            }
        }
        for (int i = 0; i < n_; ++i) {
            if (++digit[i] < K) {
                x[i] = atoms_[digit[i]];
                break;
            }
            digit[i] = 0;
            x[i] = atoms_[0];
        }
    }
}

const std::vector<double>& ExactGibbs::m2() const {
    pair_moments();
    return m2_;
}

const std::vector<double>& ExactGibbs::m3() const {
    pair_moments();
    return m3_;
}

double ExactGibbs::q12() const {
    double s = 0.0;
    for (double v : m1_) s += v * v;
    return s / n_;
}

double ExactGibbs::q1star() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += xstar_[i] * m1_[i];
    return s / n_;
}

double ExactGibbs::q12_sq() const {
    double s = 0.0;
    for (double v : m2()) s += v * v;
    return s / (static_cast<double>(n_) * n_);
}

double ExactGibbs::q1star_sq() const {
    const auto& m = m2();
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) s += xstar_[i] * xstar_[j] * m[static_cast<std::size_t>(i) * n_ + j];
    return s / (static_cast<double>(n_) * n_);
}

double enumerate_exact(const Instance& inst, const Prior& p, Observable obs) {
    const ExactGibbs g(inst, p);
    switch (obs) {
        case Observable::q12: return g.q12();
        case Observable::q1star: return g.q1star();
        case Observable::q12_sq: return g.q12_sq();
        case Observable::q1star_sq: return g.q1star_sq();
    }
    return 0.0;
}

}  // namespace sw
