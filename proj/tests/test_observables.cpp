#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "sw/error.hpp"
#include "sw/exact.hpp"
#include "sw/observables.hpp"
#include "sw/sampler.hpp"

using namespace sw;

namespace {

// OverlapSample with xi given directly (qbar = 0, N = 1 so q = xi).
OverlapSample synthetic(const std::vector<double>& xi_dense, int n_replicas) {
    OverlapSample s;
    s.N = 1;
    s.n_replicas = n_replicas;
    s.q = xi_dense;
    s.xi = xi_dense;
    s.xi_minus = xi_dense;
    return s;
}

}  // namespace

TEST_CASE("rescale arithmetic") {
    CHECK(rescale(0.5, 0.2, 100) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(rescale(0.2, 0.2, 100) == 0.0);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double q = u(gen), qbar = 0.5 * u(gen) + 0.5;
        const int N = 10 + k;
        CHECK(std::abs(unscale(rescale(q, qbar, N), qbar, N) - q) < 1e-14);
    }
}

TEST_CASE("overlap array and minus variant") {
    const Prior p = rademacher();
    const Instance inst = sample_instance(p, 16, 1.0, 0.0, 1.0, 0.0, 2);
    ChainSpec spec;
    spec.n_replicas = 2;
    spec.sweeps_burnin = 5;
    spec.init = InitMode::prior;
    const auto g = run_chain(inst, p, spec).front();
    const auto arr = overlap_array(inst, g);
    CHECK(arr.dim() == 3);
    CHECK(arr.at(0, 0) == doctest::Approx(1.0));
    CHECK(arr.at(1, 2) == overlap(g.configs[0], g.configs[1]));
    CHECK(arr.at(0, 2) == overlap(inst.xstar, g.configs[1].x));
    const auto s = rescale(arr, 0.1);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double xi = s.xi_at(a, b);
            CHECK(xi == std::sqrt(16.0) * (arr.at(a, b) - 0.1));
            CHECK(s.xi_minus[a * 3 + b] == xi - arr.last[a] * arr.last[b] / 4.0);
        }
}

TEST_CASE("batch means") {
    const std::vector<double> c(40, 2.5);
    const auto e = batch_mean(c);
    CHECK(e.value == 2.5);
    CHECK(e.se == 0.0);
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd;
    std::vector<double> v(20000);
    for (double& x : v) x = nd(gen);
    const auto r = batch_mean(v);
    CHECK(r.se == doctest::Approx(1.0 / std::sqrt(20000.0)).epsilon(0.4));
}

TEST_CASE("covariance of injected gaussian overlaps") {
    // xi_ab = g_a + g_b + e_ab over 4 indices with independent unit g, e:
    // Var = 3, share-one Cov = 1, disjoint Cov = 0.
    std::mt19937_64 gen(77);
    std::normal_distribution<double> nd;
    const int d = 4;
    SamplesByInstance all;
    for (int k = 0; k < 4000; ++k) {
        std::vector<double> g(d);
        for (double& x : g) x = nd(gen);
        std::vector<double> xi(d * d, 0.0);
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b) xi[a * d + b] = xi[b * d + a] = g[a] + g[b] + nd(gen);
        all.push_back({synthetic(xi, d - 1)});
    }
    const auto r = empirical_covariance(all);
    CHECK(r.n_instances == 4000);
    CHECK(std::abs(r.A.value - 3.0) < 3 * r.A.se);
    CHECK(std::abs(r.B.value - 1.0) < 3 * r.B.se);
    CHECK(std::abs(r.C.value) < 3 * r.C.se);
    CHECK(std::abs(r.var12.value - 3.0) < 3 * r.var12.se);
    CHECK(std::abs(r.cov12_13.value - 1.0) < 3 * r.cov12_13.se);
    CHECK(std::abs(r.cov12_13.value - r.cov12_23.value) <
          3 * std::hypot(r.cov12_13.se, r.cov12_23.se));
    CHECK(r.A.se > 0.0);
}

TEST_CASE("constant overlaps have zero variance") {
    std::vector<double> xi(9, 0.7);
    SamplesByInstance one{{synthetic(xi, 2), synthetic(xi, 2), synthetic(xi, 2)}};
    const auto r = empirical_covariance(one);
    CHECK(r.A.value == 0.0);
    CHECK(r.var12.value == 0.0);
    SamplesByInstance many(30, std::vector<OverlapSample>{synthetic(xi, 2)});
    const auto m = empirical_covariance(many);
    CHECK(m.A.value == 0.0);
    CHECK(m.A.se == 0.0);
    CHECK_THROWS_AS(empirical_covariance(SamplesByInstance{{synthetic(xi, 2)}}), Error);
}

TEST_CASE("kolmogorov distribution") {
    // both series branches agree near the switch and match known quantiles
    CHECK(kolmogorov_q(1.3580986) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(kolmogorov_q(1.6276236) == doctest::Approx(0.01).epsilon(1e-5));
    CHECK(kolmogorov_q(0.8275735) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(kolmogorov_q(0.0) == 1.0);
    CHECK(kolmogorov_q(10.0) < 1e-80);
    double prev = 1.0;
    for (double x = 0.05; x < 3.0; x += 0.01) {
        const double q = kolmogorov_q(x);
        CHECK(q <= prev + 1e-14);
        prev = q;
    }
}

TEST_CASE("normality test calibration under the null") {
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> nd(0.0, std::sqrt(2.0));
    int reject = 0;
    const int reps = 400;
    std::vector<double> xs(1000);
    for (int r = 0; r < reps; ++r) {
        for (double& x : xs) x = nd(gen);
        const auto t = normality_test(xs, 2.0);
        if (t.ks_p < 0.01) ++reject;
    }
    // binomial(400, 0.01): mean 4, sd ~2
    CHECK(reject <= 12);

    std::vector<double> big(100000);
    for (double& x : big) x = nd(gen);
    const auto t = normality_test(big, 2.0);
    CHECK(t.ks_p > 0.01);
    CHECK(std::abs(t.skew) < 3 * t.skew_se);
    CHECK(std::abs(t.exkurt) < 3 * t.exkurt_se);
    CHECK(t.skew_se == doctest::Approx(std::sqrt(6.0 / 100000)).epsilon(0.15));
}

TEST_CASE("normality test rejects a shifted exponential") {
    std::mt19937_64 gen(5);
    std::exponential_distribution<double> ed(1.0);
    std::vector<double> xs(5000);
    for (double& x : xs) x = ed(gen) - 1.0;
    const auto t = normality_test(xs, 1.0);
    CHECK(t.ks_p < 1e-6);
    CHECK(t.skew > 3 * t.skew_se);

    const std::vector<double> flat(200, 1.0);
    CHECK(normality_test(flat, 1.0).degenerate);
    CHECK_THROWS_AS(normality_test(std::vector<double>(99, 0.0), 1.0), Error);
}

TEST_CASE("concentration fit") {
    const std::vector<double> Ns{250, 500, 1000, 2000};
    std::vector<double> m2, m4;
    for (double n : Ns) {
        m2.push_back(3.0 / n);
        m4.push_back(5.0 / (n * n));
    }
    const auto f = concentration_fit(Ns, m2, m4);
    CHECK(f.slope2 == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.slope4 == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(std::exp(f.intercept2) == doctest::Approx(3.0).epsilon(1e-10));
    const std::vector<double> two{100, 100, 200};
    CHECK_THROWS_AS(concentration_fit(two, std::vector<double>(3, 1.0), std::vector<double>(3, 1.0)), Error);
}

TEST_CASE("autocorrelation of an AR(1) series") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> nd;
    const double phi = 0.5;
    std::vector<double> xs(200000);
    double x = 0.0;
    for (double& v : xs) v = x = phi * x + nd(gen);
    const auto rho = autocorrelation(xs, 3);
    CHECK(rho[1] == doctest::Approx(0.5).epsilon(0.02));
    CHECK(rho[2] == doctest::Approx(0.25).epsilon(0.05));
    // tau = (1 + phi) / (1 - phi) = 3
    CHECK(integrated_autocorrelation_time(xs) == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("nishimori at zero signal") {
    const Prior p = rademacher();
    SamplesByInstance all;
    for (int k = 0; k < 200; ++k) {
        const Instance inst = sample_instance(p, 50, 0.0, 0.0, 1.0, 0.0, 100 + k);
        ChainSpec spec;
        spec.n_replicas = 2;
        spec.sweeps_burnin = 2;
        spec.seed = 3;
        const auto g = run_chain(inst, p, spec).front();
        all.push_back({rescale(overlap_array(inst, g), 0.0)});
    }
    const auto r = nishimori_check(all);
    CHECK(std::abs(r.gap) < 3 * r.se);
    CHECK(std::abs(r.mean_replica) < 0.05);
    CHECK(std::abs(r.mean_star) < 0.05);
    const auto sq = nishimori_check(all, true);
    CHECK(sq.squared);
    CHECK(std::abs(sq.gap) < 3 * sq.se);
}

TEST_CASE("MCMC overlaps against enumeration at N = 8") {
    const Prior p = rademacher();
    std::vector<double> mc(200), ex(200);
    for_each_instance(200, [&](int k) {
        const Instance inst = sample_instance(p, 8, 1.5, 0.0, 1.0, 0.0, 500 + k);
        ChainSpec spec;
        spec.sweeps_burnin = 50;
        spec.sweeps_between_samples = 2;
        spec.n_samples = 500;
        spec.seed = 11;
        double acc = 0.0;
        run_chain(inst, p, spec, [&](const GibbsSample& g) { acc += overlap(inst.xstar, g.configs[0].x); });
        mc[k] = acc / spec.n_samples;
        ex[k] = enumerate_exact(inst, p, Observable::q1star);
    });
    std::vector<double> d(200);
    for (int k = 0; k < 200; ++k) d[k] = mc[k] - ex[k];
    const auto e = batch_mean(d);
    CHECK(std::abs(e.value) < 3 * e.se);
}

TEST_CASE("cavity identity at zero signal") {
    CavityCheckSpec spec;
    spec.lambda = 0.0;
    spec.n_instances = 20;
    const auto r = cavity_derivative_check(rademacher(), spec);
    CHECK(std::abs(r.fd) < 1e-12);
    CHECK(std::abs(r.rhs) < 1e-12);
    CHECK(cavity_check_passes(r));
}

TEST_CASE("cavity identity off the fixed point") {
    CavityCheckSpec spec;
    spec.N = 5;
    spec.lambda = 1.0;
    spec.q_cav = 0.3;
    spec.n_instances = 300;
    const auto g = cavity_derivative_check(rademacher(), spec);
    CHECK(std::abs(g.rhs) > 3 * g.se_rhs);
    CHECK(cavity_check_passes(g));

    spec.variant = CavityVariant::full;
    spec.f = CavityObservable::q1star;
    const auto f = cavity_derivative_check(bernoulli(0.5), spec);
    CHECK(cavity_check_passes(f));
}

TEST_CASE("cavity check rejects bad requests") {
    CavityCheckSpec spec;
    spec.f = CavityObservable::q1star;
    try {
        cavity_derivative_check(rademacher(), spec);
        FAIL("expected BadF");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadF);
    }
    spec = {};
    spec.N = 30;
    CHECK_THROWS_AS(cavity_derivative_check(rademacher(), spec), Error);
    spec = {};
    spec.t0 = 1.0;
    CHECK_THROWS_AS(cavity_derivative_check(rademacher(), spec), Error);
}
