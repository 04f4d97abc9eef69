#include "sw/scalar_channel.hpp"

#include <algorithm>
#include <cmath>

#include "sw/error.hpp"

namespace sw {

namespace {

struct LocalBracket {
    double m1 = 0.0;
    double m2 = 0.0;
    double log_z = 0.0;
};

// Shifted log-sum-exp over the atoms; the shift keeps large r finite.
LocalBracket local_bracket(const Prior& p, double r, double z, double xstar) {
    const auto& s = p.atoms();
    const auto& lw = p.log_weights();
    const double field = std::sqrt(r) * z + r * xstar;
    double mx = -INFINITY;
    double expo[64];
    std::vector<double> spill;
    double* e = expo;
    if (s.size() > 64) {
        spill.resize(s.size());
        e = spill.data();
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
        e[k] = lw[k] + field * s[k] - 0.5 * r * s[k] * s[k];
        mx = std::max(mx, e[k]);
    }
    double zsum = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double wk = std::exp(e[k] - mx);
        zsum += wk;
        m1 += wk * s[k];
        m2 += wk * s[k] * s[k];
    }
    return {m1 / zsum, m2 / zsum, mx + std::log(zsum)};
}

}  // namespace

std::vector<double> bracket_moment(const Prior& p, const ScalarBracketParams& params,
                                   std::span<const unsigned> powers) {
    if (params.r < 0.0) throw Error(ErrorCode::BadDimension, "r must be nonnegative");
    const auto& s = p.atoms();
    const auto& lw = p.log_weights();
    const double field = std::sqrt(params.r) * params.z + params.r * params.xstar;
    std::vector<double> e(s.size());
    double mx = -INFINITY;
    for (std::size_t k = 0; k < s.size(); ++k) {
        e[k] = lw[k] + field * s[k] - 0.5 * params.r * s[k] * s[k];
        mx = std::max(mx, e[k]);
    }
    double zsum = 0.0;
    for (double& v : e) {
        v = std::exp(v - mx);
        zsum += v;
    }
    if (!(zsum > 0.0)) throw Error(ErrorCode::DegenerateWeight, "scalar bracket normalization");
    std::vector<double> out;
    out.reserve(powers.size());
    for (unsigned k : powers) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) acc += e[i] * std::pow(s[i], k);
        out.push_back(acc / zsum);
    }
    return out;
}

ChannelAverages channel_averages(const Prior& p, double r, const GaussHermiteRule& rule) {
    ChannelAverages out;
    const auto& nodes = rule.nodes();
    const auto& wz = rule.weights();
    for (std::size_t a = 0; a < p.size(); ++a) {
        const double xs = p.atoms()[a];
        const double wx = p.weights()[a];
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const auto b = local_bracket(p, r, nodes[k], xs);
            const double w = wx * wz[k];
            const double var = b.m2 - b.m1 * b.m1;
            out.overlap_star += w * xs * b.m1;
            out.overlap_self += w * b.m1 * b.m1;
            out.var_sq += w * var * var;
            out.m2_sq += w * b.m2 * b.m2;
            out.m2_m1sq += w * b.m2 * b.m1 * b.m1;
            out.m1_4 += w * b.m1 * b.m1 * b.m1 * b.m1;
            out.log_partition += w * b.log_z;
        }
    }
    return out;
}

double F(const Prior& p, double r, const GaussHermiteRule& rule) {
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        const double xs = p.atoms()[a];
        acc += p.weights()[a] *
               rule.expect([&](double z) { return xs * local_bracket(p, r, z, xs).m1; });
    }
    return acc;
}

double F_prime(const Prior& p, double r, const GaussHermiteRule& rule) {
    return channel_averages(p, r, rule).var_sq;
}

double rs_potential(const Prior& p, double lambda, double h, double q, const GaussHermiteRule& rule) {
    const double r = lambda * q + h;
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        const double xs = p.atoms()[a];
        acc += p.weights()[a] *
               rule.expect([&](double z) { return local_bracket(p, r, z, xs).log_z; });
    }
    return -lambda * q * q / 4.0 + acc;
}

ScalarTheory solve_fixed_point(const Prior& p, double lambda, double h, const GaussHermiteRule& rule,
                               const SolverOptions& opt) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::BadDimension, "lambda must be positive");
    if (h < 0.0) throw Error(ErrorCode::BadDimension, "h must be nonnegative");

    const double qmax = p.bound() * p.bound();
    auto g = [&](double q) { return q - F(p, lambda * q + h, rule); };

    struct Root {
        double q;
        double res;
    };
    std::vector<Root> found;

    // Damped iteration from the three standard starting points.
    for (double q : {std::min(1e-6, qmax), 0.5 * qmax, qmax}) {
        for (int it = 0; it < opt.max_iterations; ++it) {
            const double gq = g(q);
            if (std::abs(gq) < 0.1 * opt.tol) {
                found.push_back({q, std::abs(gq)});
                break;
            }
            q = std::clamp(q - opt.damping * gq, 0.0, qmax);
        }
    }

    // Bracketing fallback: sign changes of g on a uniform grid, each refined by bisection.
    const int n = std::max(opt.scan_points, 2);
    double q_lo = 0.0, g_lo = g(0.0);
    if (g_lo == 0.0 || std::abs(g_lo) < 0.1 * opt.tol) found.push_back({0.0, std::abs(g_lo)});
    for (int k = 1; k <= n; ++k) {
        const double q_hi = qmax * k / n;
        const double g_hi = g(q_hi);
        if (g_hi == 0.0) found.push_back({q_hi, 0.0});
        if ((g_lo < 0.0 && g_hi > 0.0) || (g_lo > 0.0 && g_hi < 0.0)) {
            double a = q_lo, b = q_hi, ga = g_lo;
            for (int it = 0; it < 200 && b - a > 1e-16 * std::max(1.0, b); ++it) {
                const double m = 0.5 * (a + b);
                const double gm = g(m);
                if (gm == 0.0) {
                    a = b = m;
                    break;
                }
                if ((gm < 0.0) == (ga < 0.0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            const double root = 0.5 * (a + b);
            found.push_back({root, std::abs(g(root))});
        }
        q_lo = q_hi;
        g_lo = g_hi;
    }

    std::erase_if(found, [&](const Root& r) { return !(r.res < opt.tol); });
    if (found.empty())
        throw Error(ErrorCode::NoConvergence, "no fixed point at lambda=" + std::to_string(lambda));

    std::sort(found.begin(), found.end(), [](const Root& a, const Root& b) { return a.q < b.q; });
    // near a critical point g is flat, so candidates far apart in q can be one root
    auto same_root = [&](double a, double b) {
        if (std::abs(b - a) < 1e-7) return true;
        for (int k = 1; k < 8; ++k)
            if (!(std::abs(g(a + (b - a) * k / 8.0)) < opt.tol)) return false;
        return true;
    };
    std::vector<Root> roots;
    for (const auto& r : found) {
        if (!roots.empty() && same_root(roots.back().q, r.q)) {
            if (r.res < roots.back().res) roots.back() = r;
        } else {
            roots.push_back(r);
        }
    }

    ScalarTheory th;
    th.lambda = lambda;
    th.h = h;
    double best = -INFINITY, second = -INFINITY;
    for (const auto& r : roots) {
        th.roots.push_back(r.q);
        const double phi = rs_potential(p, lambda, h, r.q, rule);
        if (phi > best) {
            second = best;
            best = phi;
            th.qbar = r.q;
            th.residual = r.res;
        } else if (phi > second) {
            second = phi;
        }
    }
    th.pressure = best;

    const auto avg = channel_averages(p, lambda * th.qbar + h, rule);
    const double q2 = th.qbar * th.qbar;
    th.a1 = avg.m2_sq - q2;
    th.a2 = avg.m2_m1sq - q2;
    th.a3 = avg.m1_4 - q2;
    th.mu1 = lambda * (th.a1 - 2.0 * th.a2 + th.a3);
    th.mu2 = lambda * (th.a1 - 3.0 * th.a2 + 2.0 * th.a3);
    th.critical = std::abs(1.0 - th.mu1) < opt.critical_margin ||
                  std::abs(1.0 - th.mu2) < opt.critical_margin || (best - second) < 1e-10;
    return th;
}

double estimate_lambda_c(const Prior& p, std::span<const double> lambda_grid,
                         const GaussHermiteRule& rule, const SolverOptions& opt) {
    double estimate = 0.0;
    for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
        const auto th = solve_fixed_point(p, lambda_grid[k], 0.0, rule, opt);
        if (th.qbar <= kZeroOverlapThreshold) {
            estimate = lambda_grid[k];
        } else if (k == 0) {
            return 0.0;
        }
    }
    return estimate;
}

}  // namespace sw
