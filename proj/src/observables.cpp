#include "sw/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include "sw/error.hpp"
#include "sw/rng.hpp"

namespace sw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PairIndex {
    int a, b;
};

std::vector<PairIndex> pairs_of(int dim, int first) {
    std::vector<PairIndex> out;
    for (int a = first; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b) out.push_back({a, b});
    return out;
}

int shared(const PairIndex& x, const PairIndex& y) {
    return (x.a == y.a || x.a == y.b) + (x.b == y.a || x.b == y.b);
}

}  // namespace

OverlapArray overlap_array(const Instance& inst, const GibbsSample& s) {
    OverlapArray out;
    out.n_replicas = static_cast<int>(s.configs.size());
    out.N = inst.N;
    const int d = out.dim();
    std::vector<const std::vector<double>*> rows{&inst.xstar};
    for (const auto& c : s.configs) rows.push_back(&c.x);
    out.q.assign(static_cast<std::size_t>(d) * d, 0.0);
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            const double v = overlap(*rows[a], *rows[b]);
            out.q[static_cast<std::size_t>(a) * d + b] = v;
            out.q[static_cast<std::size_t>(b) * d + a] = v;
        }
    for (int a = 0; a < d; ++a) out.last.push_back(rows[a]->back());
    return out;
}

double rescale(double q, double qbar, int N) { return std::sqrt(static_cast<double>(N)) * (q - qbar); }
double unscale(double xi, double qbar, int N) { return qbar + xi / std::sqrt(static_cast<double>(N)); }

OverlapSample rescale(const OverlapArray& q, double qbar) {
    OverlapSample s;
    s.N = q.N;
    s.n_replicas = q.n_replicas;
    s.qbar_used = qbar;
    s.q = q.q;
    const int d = q.dim();
    const double root = std::sqrt(static_cast<double>(q.N));
    s.xi.resize(q.q.size());
    s.xi_minus.resize(q.q.size());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const auto k = static_cast<std::size_t>(a) * d + b;
            s.xi[k] = rescale(q.q[k], qbar, q.N);
            s.xi_minus[k] = s.xi[k] - q.last[a] * q.last[b] / root;
        }
    return s;
}

Estimate batch_mean(std::span<const double> v, int batches) {
    Estimate e;
    const int n = static_cast<int>(v.size());
    if (n == 0) return {kNaN, kNaN};
    e.value = std::accumulate(v.begin(), v.end(), 0.0) / n;
    const int B = std::min(batches, n);
    if (B < 2) {
        e.se = kNaN;
        return e;
    }
    std::vector<double> means(B, 0.0);
    for (int b = 0; b < B; ++b) {
        const int lo = static_cast<int>(static_cast<long>(n) * b / B);
        const int hi = static_cast<int>(static_cast<long>(n) * (b + 1) / B);
        for (int k = lo; k < hi; ++k) means[b] += v[k];
        means[b] /= (hi - lo);
    }
    const double mb = std::accumulate(means.begin(), means.end(), 0.0) / B;
    double ss = 0.0;
    for (double m : means) ss += (m - mb) * (m - mb);
    e.se = std::sqrt(ss / (B - 1) / B);
    return e;
}

CovarianceEstimate empirical_covariance(const SamplesByInstance& samples) {
    CovarianceEstimate out;
    int count = 0, nrep = -1;
    for (const auto& inst : samples)
        for (const auto& s : inst) {
            ++count;
            if (nrep < 0) nrep = s.n_replicas;
            if (s.n_replicas != nrep) throw Error(ErrorCode::BadDimension, "mixed replica counts");
        }
    if (count < 2 || nrep < 2) throw Error(ErrorCode::InsufficientData, "need >= 2 samples and >= 2 replicas");
    const int d = nrep + 1;
    const auto all = pairs_of(d, 0);

    // shifted by the first sample so constant input centers to exactly zero
    const OverlapSample* ref = nullptr;
    for (const auto& inst : samples)
        if (!inst.empty() && !ref) ref = &inst.front();
    std::vector<double> mean(static_cast<std::size_t>(d) * d, 0.0);
    for (const auto& inst : samples)
        for (const auto& s : inst)
            for (const auto& p : all) mean[p.a * d + p.b] += s.xi_at(p.a, p.b) - ref->xi_at(p.a, p.b);
    for (double& m : mean) m /= count;

    // per-instance accumulators
    std::vector<double> vA, vB, vC, v12, v1213, v1223, mr, ms;
    for (const auto& inst : samples) {
        if (inst.empty()) continue;
        double sA = 0, sB = 0, sC = 0, s12 = 0, s1213 = 0, s1223 = 0, sr = 0, sst = 0;
        for (const auto& s : inst) {
            auto c = [&](const PairIndex& p) {
                return (s.xi_at(p.a, p.b) - ref->xi_at(p.a, p.b)) - mean[p.a * d + p.b];
            };
            double a = 0, b = 0, cc = 0;
            int na = 0, nb = 0, nc = 0;
            for (const auto& p : all)
                for (const auto& r : all) {
                    const double prod = c(p) * c(r);
                    switch (shared(p, r)) {
                        case 2: a += prod; ++na; break;
                        case 1: b += prod; ++nb; break;
                        default: cc += prod; ++nc; break;
                    }
                }
            sA += a / na;
            sB += b / nb;
            sC += nc > 0 ? cc / nc : kNaN;
            const double c12 = c({1, 2});
            s12 += c12 * c12;
            s1213 += nrep >= 3 ? c12 * c({1, 3}) : kNaN;
            s1223 += nrep >= 3 ? c12 * c({2, 3}) : kNaN;
            double r = 0, st = 0;
            int nr = 0;
            for (const auto& p : all) {
                if (p.a == 0) st += s.xi_at(p.a, p.b);
                else {
                    r += s.xi_at(p.a, p.b);
                    ++nr;
                }
            }
            sr += r / nr;
            sst += st / nrep;
        }
        const double m = static_cast<double>(inst.size());
        vA.push_back(sA / m);
        vB.push_back(sB / m);
        vC.push_back(sC / m);
        v12.push_back(s12 / m);
        v1213.push_back(s1213 / m);
        v1223.push_back(s1223 / m);
        mr.push_back(sr / m);
        ms.push_back(sst / m);
    }
    out.n_instances = static_cast<int>(vA.size());
    out.n_samples = count;
    out.A = batch_mean(vA);
    out.B = batch_mean(vB);
    out.C = batch_mean(vC);
    out.var12 = batch_mean(v12);
    out.cov12_13 = batch_mean(v1213);
    out.cov12_23 = batch_mean(v1223);
    out.mean_xi_real = batch_mean(mr);
    out.mean_xi_star = batch_mean(ms);
    return out;
}

NishimoriResult nishimori_check(const SamplesByInstance& samples, bool squared) {
    if (samples.size() < 2) throw Error(ErrorCode::InsufficientData, "need >= 2 instances");
    NishimoriResult out;
    out.squared = squared;
    std::vector<double> diff, rep, star;
    for (const auto& inst : samples) {
        if (inst.empty()) continue;
        double r = 0.0, st = 0.0;
        for (const auto& s : inst) {
            if (s.n_replicas < 2) throw Error(ErrorCode::InsufficientData, "need >= 2 replicas");
            const int d = s.dim();
            double sr = 0.0, ss = 0.0;
            int nr = 0;
            for (int a = 1; a < d; ++a) {
                const double qs = s.q_at(0, a);
                ss += squared ? qs * qs : qs;
                for (int b = a + 1; b < d; ++b) {
                    const double q = s.q_at(a, b);
                    sr += squared ? q * q : q;
                    ++nr;
                }
            }
            r += sr / nr;
            st += ss / s.n_replicas;
        }
        const double m = static_cast<double>(inst.size());
        rep.push_back(r / m);
        star.push_back(st / m);
        diff.push_back((r - st) / m);
    }
    out.n_instances = static_cast<int>(diff.size());
    out.mean_replica = std::accumulate(rep.begin(), rep.end(), 0.0) / rep.size();
    out.mean_star = std::accumulate(star.begin(), star.end(), 0.0) / star.size();
    const auto g = batch_mean(diff);
    out.gap = g.value;
    out.se = g.se;
    return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_q(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.18) {
        // Jacobi theta form converges fast for small x
        const double f = -std::numbers::pi * std::numbers::pi / (8.0 * x * x);
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) s += std::exp(f * (2 * k - 1) * (2 * k - 1));
        return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s;
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 == 1) ? term : -term;
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

namespace {

struct Shape {
    double skew, exkurt;
};

// Skewness and excess kurtosis from power sums of mean-shifted data.
Shape shape_from_sums(double n, double s1, double s2, double s3, double s4) {
    const double m = s1 / n;
    const double m2 = s2 / n - m * m;
    const double m3 = s3 / n - 3 * m * s2 / n + 2 * m * m * m;
    const double m4 = s4 / n - 4 * m * s3 / n + 6 * m * m * s2 / n - 3 * m * m * m * m;
    return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

}  // namespace

NormalityResult normality_test(std::span<const double> xs, double sigma2) {
    const int n = static_cast<int>(xs.size());
    if (n < 100) throw Error(ErrorCode::InsufficientData, "normality test needs >= 100 samples");
    NormalityResult r;
    r.n = n;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double spread = 0.0;
    for (double x : xs) spread = std::max(spread, std::abs(x - mean));
    if (spread == 0.0 || !(sigma2 > 0.0)) {
        r.degenerate = true;
        r.ks_stat = r.ks_p = r.skew = r.skew_se = r.exkurt = r.exkurt_se = kNaN;
        return r;
    }

    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double sd = std::sqrt(sigma2);
    double D = 0.0;
    for (int i = 0; i < n; ++i) {
        const double F = normal_cdf(sorted[i] / sd);
        D = std::max({D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    r.ks_stat = D;
    r.ks_p = kolmogorov_q(std::sqrt(static_cast<double>(n)) * D);

    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (double x : xs) {
        const double y = x - mean;
        s1 += y;
        s2 += y * y;
        s3 += y * y * y;
        s4 += y * y * y * y;
    }
    const Shape full = shape_from_sums(n, s1, s2, s3, s4);
    r.skew = full.skew;
    r.exkurt = full.exkurt;

    std::vector<double> js(n), jk(n);
    for (int i = 0; i < n; ++i) {
        const double y = xs[i] - mean;
        const Shape loo = shape_from_sums(n - 1, s1 - y, s2 - y * y, s3 - y * y * y, s4 - y * y * y * y);
        js[i] = loo.skew;
        jk[i] = loo.exkurt;
    }
    auto jack_se = [n](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::sqrt(ss * (n - 1) / n);
    };
    r.skew_se = jack_se(js);
    r.exkurt_se = jack_se(jk);
    return r;
}

ConcentrationFit concentration_fit(std::span<const double> Ns, std::span<const double> m2,
                                   std::span<const double> m4) {
    if (Ns.size() != m2.size() || Ns.size() != m4.size())
        throw Error(ErrorCode::BadDimension, "concentration inputs differ in length");
    if (std::set<double>(Ns.begin(), Ns.end()).size() < 3)
        throw Error(ErrorCode::InsufficientData, "need >= 3 distinct N");
    auto fit = [&](std::span<const double> y, double& slope, double& icept) {
        const std::size_t n = Ns.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (!(y[k] > 0.0)) throw Error(ErrorCode::InsufficientData, "nonpositive moment in log fit");
            const double lx = std::log(Ns[k]), ly = std::log(y[k]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        icept = (sy - slope * sx) / n;
    };
    ConcentrationFit out;
    fit(m2, out.slope2, out.intercept2);
    fit(m4, out.slope4, out.intercept4);
    return out;
}

std::vector<double> autocorrelation(std::span<const double> xs, int max_lag) {
    const int n = static_cast<int>(xs.size());
    if (n < 2) throw Error(ErrorCode::InsufficientData, "autocorrelation needs >= 2 points");
    max_lag = std::min(max_lag, n - 1);
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double c0 = 0.0;
    for (double x : xs) c0 += (x - m) * (x - m);
    std::vector<double> rho(max_lag + 1, 0.0);
    rho[0] = 1.0;
    if (c0 == 0.0) return rho;
    for (int k = 1; k <= max_lag; ++k) {
        double c = 0.0;
        for (int i = 0; i + k < n; ++i) c += (xs[i] - m) * (xs[i + k] - m);
        rho[k] = c / c0;
    }
    return rho;
}

double integrated_autocorrelation_time(std::span<const double> xs) {
    const auto rho = autocorrelation(xs, static_cast<int>(xs.size()) / 2);
    double tau = 1.0;
    for (std::size_t k = 1; k < rho.size(); ++k) {
        tau += 2.0 * rho[k];
        if (static_cast<double>(k) >= 6.0 * tau) break;
    }
    return std::max(tau, 1.0);
}

double cavity_observable(const ExactGibbs& g, CavityObservable f) {
    return f == CavityObservable::q12 ? g.q12() : g.q1star();
}

double cavity_rhs(const ExactGibbs& g, double lambda, double q, CavityObservable f, CavityVariant v) {
    const int N = g.N();
    const int c = N - 1;
    const double n = N;
    const auto& m1 = g.m1();
    const auto& xs = g.xstar();

    // (1/N) sum_{i<N} <x_i x_N>^2 - q <x_N>^2 : the (q^- - q) eps eps factor of two fresh replicas
    double fresh = 0.0;
    for (int i = 0; i < c; ++i) fresh += g.m2(i, c) * g.m2(i, c);
    fresh = fresh / n - q * m1[c] * m1[c];

    if (v == CavityVariant::general && f == CavityObservable::q12) {
        double t1 = 0.0, t2 = 0.0, q12 = 0.0;
        for (int i = 0; i < c; ++i)
            for (int j = 0; j < N; ++j) {
                t1 += g.m3(i, j) * g.m3(i, j);
                t2 += g.m3(i, j) * g.m2(i, c) * m1[j];
            }
        double last2 = 0.0, last21 = 0.0;
        for (int j = 0; j < N; ++j) {
            last2 += g.m2(c, j) * g.m2(c, j);
            last21 += g.m2(c, j) * m1[j];
            q12 += m1[j] * m1[j];
        }
        t1 = t1 / (n * n) - q / n * last2;
        t2 = t2 / (n * n) - q / n * m1[c] * last21;
        const double t3 = q12 / n * fresh;
        return lambda * t1 - 2.0 * lambda * t2 + lambda * t3;
    }

    if (v == CavityVariant::full && f == CavityObservable::q1star) {
        const double es = xs[c];
        double u2 = 0.0, us = 0.0;
        for (int i = 0; i < c; ++i)
            for (int j = 0; j < N; ++j) {
                u2 += g.m3(i, j) * xs[j] * g.m2(i, c);
                us += xs[i] * xs[j] * g.m3(i, j);
            }
        double lastx = 0.0, q1s = 0.0;
        for (int j = 0; j < N; ++j) {
            lastx += g.m2(c, j) * xs[j];
            q1s += xs[j] * m1[j];
        }
        q1s /= n;
        u2 = u2 / (n * n) - q / n * lastx * m1[c];
        us = es * (us / (n * n) - q / n * lastx);
        double star_fresh = 0.0;
        for (int i = 0; i < c; ++i) star_fresh += xs[i] * g.m2(i, c);
        const double u2s = es * (star_fresh / n - q * m1[c]) * q1s;
        const double u3 = fresh * q1s;
        return -lambda * u2 + lambda * us - lambda * u2s + lambda * u3;
    }

    throw Error(ErrorCode::BadF, "supported schemes: general with q12, full with q1*");
}

CavityCheckResult cavity_derivative_check(const Prior& p, const CavityCheckSpec& spec) {
    if ((spec.variant == CavityVariant::general) != (spec.f == CavityObservable::q12))
        throw Error(ErrorCode::BadF, "supported schemes: general with q12, full with q1*");
    if (!(spec.eps > 0.0) || spec.t0 - spec.eps < 0.0 || spec.t0 + spec.eps > 1.0)
        throw Error(ErrorCode::BadDimension, "t0 +- eps must lie in [0,1]");
    if (spec.n_instances < 2) throw Error(ErrorCode::InsufficientData, "need >= 2 instances");

    std::size_t states = 1;
    for (int i = 0; i < spec.N; ++i) {
        states *= p.size();
        if (states > kMaxExactStates) throw Error(ErrorCode::TooLarge, "cavity check system too large");
    }

    const int n = spec.n_instances;
    std::vector<double> fd(n), rhs(n), diff(n);
    for_each_instance(
        n,
        [&](int k) {
            const std::uint64_t seed = derive_seed(spec.seed, 0, static_cast<std::uint32_t>(k));
            auto at = [&](double t) {
                return ExactGibbs(sample_instance(p, spec.N, spec.lambda, 0.0, t, spec.q_cav, seed), p);
            };
            const double fp = cavity_observable(at(spec.t0 + spec.eps), spec.f);
            const double fm = cavity_observable(at(spec.t0 - spec.eps), spec.f);
            fd[k] = (fp - fm) / (2.0 * spec.eps);
            rhs[k] = cavity_rhs(at(spec.t0), spec.lambda, spec.q_cav, spec.f, spec.variant);
            diff[k] = fd[k] - rhs[k];
        },
        spec.parallel);

    auto mean_se = [n](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return Estimate{m, std::sqrt(ss / (n - 1) / n)};
    };
    CavityCheckResult r;
    r.n_instances = n;
    const auto efd = mean_se(fd), erhs = mean_se(rhs), ed = mean_se(diff);
    r.fd = efd.value;
    r.se_fd = efd.se;
    r.rhs = erhs.value;
    r.se_rhs = erhs.se;
    r.se = ed.se;
    return r;
}

bool cavity_check_passes(const CavityCheckResult& r) {
    return std::abs(r.fd - r.rhs) <= 3.0 * r.se + 1e-12;
}

}  // namespace sw
