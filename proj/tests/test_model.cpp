#include <cmath>
#include <numeric>

#include "doctest.h"
#include "sw/error.hpp"
#include "sw/model.hpp"
#include "sw/rng.hpp"

using namespace sw;

TEST_CASE("philox known-answer vectors") {
    const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);
    const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 {0xffffffffu, 0xffffffffu});
    CHECK(ones[0] == 0x408f276du);
    CHECK(ones[1] == 0x41c83b0eu);
    CHECK(ones[2] == 0xa20bc7c6u);
    CHECK(ones[3] == 0x6d5451fdu);
    const auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                               {0xa4093822u, 0x299f31d0u});
    CHECK(pi[0] == 0xd16cfe09u);
    CHECK(pi[1] == 0x94fdccebu);
    CHECK(pi[2] == 0x5001e420u);
    CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and distinct") {
    Stream a(42, stream_id(streams::z, 0)), b(42, stream_id(streams::z, 0)), c(42, stream_id(streams::z, 1));
    int same = 0;
    for (int k = 0; k < 100; ++k) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        if (u == c.uniform()) ++same;
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(same == 0);
}

TEST_CASE("normal draws have unit variance") {
    Stream s(7, 0);
    double m = 0, v = 0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double x = s.normal();
        m += x;
        v += x * x;
    }
    m /= n;
    v = v / n - m * m;
    CHECK(std::abs(m) < 4.0 / std::sqrt(n));
    CHECK(std::abs(v - 1.0) < 0.02);
}

TEST_CASE("instance determinism and symmetry") {
    const Prior p = rademacher();
    const Instance a = sample_instance(p, 30, 1.5, 0.2, 1.0, 0.0, 99);
    const Instance b = sample_instance(p, 30, 1.5, 0.2, 1.0, 0.0, 99);
    CHECK(a.xstar == b.xstar);
    CHECK(a.z_upper == b.z_upper);
    CHECK(a.hnoise == b.hnoise);
    CHECK(a.z_cav == b.z_cav);
    double asym = 0.0;
    for (int i = 0; i < a.N; ++i) {
        CHECK(a.z(i, i) == 0.0);
        for (int j = 0; j < a.N; ++j) asym = std::max(asym, std::abs(a.z(i, j) - a.z(j, i)));
        CHECK(p.index_of(a.xstar[i]) < p.size());
    }
    CHECK(asym == 0.0);
    CHECK_THROWS_AS(sample_instance(p, 1, 1.0, 0.0, 1.0, 0.0, 1), Error);
    CHECK_THROWS_AS(sample_instance(p, 5, 1.0, 0.0, 1.5, 0.0, 1), Error);
}

TEST_CASE("ground truth follows the prior") {
    const Instance inst = sample_instance(rademacher(), 10000, 1.0, 0.0, 1.0, 0.0, 3);
    const double m = std::accumulate(inst.xstar.begin(), inst.xstar.end(), 0.0) / inst.N;
    CHECK(std::abs(m) < 4.0 / std::sqrt(10000.0));
}

TEST_CASE("energy spot values") {
    Instance inst = sample_instance(rademacher(), 2, 2.0, 0.0, 1.0, 0.0, 1);
    inst.z_upper = {1.0};
    inst.xstar = {1.0, 1.0};
    CHECK(energy(inst, Configuration{{1.0, 1.0}}) == doctest::Approx(1.5).epsilon(1e-15));

    Instance zero = sample_instance(bernoulli(0.5), 6, 0.0, 0.0, 1.0, 0.0, 2);
    CHECK(energy(zero, Configuration{{1, 0, 1, 1, 0, 1}}) == 0.0);
    CHECK_THROWS_AS(energy(zero, Configuration{{1, 0}}), Error);
}

TEST_CASE("t = 0 splits off the cavity site") {
    const Prior p = bernoulli(0.4);
    const int N = 7;
    const Instance inst = sample_instance(p, N, 1.3, 0.25, 0.0, 0.3, 5);
    Stream s(11, 0);
    Configuration cfg;
    for (int i = 0; i < N; ++i) cfg.x.push_back(p.atoms()[p.sample_index(s.uniform())]);

    // (N-1)-site instance with the same couplings; its 1/N factors are rescaled by hand.
    Instance sub;
    sub.N = N - 1;
    sub.lambda = inst.lambda * (N - 1) / N;
    sub.h = 0.0;
    sub.t = 1.0;
    sub.xstar.assign(inst.xstar.begin(), inst.xstar.end() - 1);
    for (int i = 0; i < N - 1; ++i)
        for (int j = i + 1; j < N - 1; ++j) sub.z_upper.push_back(inst.z(i, j));
    Configuration sub_cfg{{cfg.x.begin(), cfg.x.end() - 1}};

    const double r = inst.lambda * inst.q_cav;
    const double xn = cfg.x[N - 1];
    double one_body = 0.0;
    for (int i = 0; i < N; ++i)
        one_body += std::sqrt(inst.h) * inst.hnoise[i] * cfg.x[i] + inst.h * inst.xstar[i] * cfg.x[i] -
                    0.5 * inst.h * cfg.x[i] * cfg.x[i];
    const double cav = std::sqrt(r) * inst.z_cav * xn + r * xn * inst.xstar[N - 1] - 0.5 * r * xn * xn;
    CHECK(energy(inst, cfg) == doctest::Approx(energy(sub, sub_cfg) + cav + one_body).epsilon(1e-12));
}

TEST_CASE("local field reproduces energy differences") {
    const Prior p = make_prior(std::vector<double>{-1.0, 0.0, 2.0}, std::vector<double>{0.3, 0.5, 0.2});
    for (double t : {1.0, 0.4}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Instance inst = sample_instance(p, 9, 1.7, 0.3, t, 0.35, seed);
            Stream s(seed, 77);
            Configuration cfg;
            for (int i = 0; i < inst.N; ++i) cfg.x.push_back(p.atoms()[p.sample_index(s.uniform())]);
            for (int i = 0; i < inst.N; ++i) {
                const auto f = local_field(inst, cfg, i);
                Configuration a = cfg, b = cfg;
                a.x[i] = 2.0;
                b.x[i] = -1.0;
                const double de = energy(inst, a) - energy(inst, b);
                CHECK(de == doctest::Approx(f.theta * 3.0 - f.b * (4.0 - 1.0) / 2.0).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("local field special cases") {
    const Instance zero = sample_instance(rademacher(), 5, 0.0, 0.0, 1.0, 0.0, 1);
    const Configuration cfg{{1, -1, 1, 1, -1}};
    for (int i = 0; i < 5; ++i) {
        const auto f = local_field(zero, cfg, i);
        CHECK(f.theta == 0.0);
        CHECK(f.b == 0.0);
    }
    const Instance inst = sample_instance(rademacher(), 5, 1.2, 0.3, 1.0, 0.0, 1);
    for (int i = 0; i < 5; ++i)
        CHECK(local_field(inst, cfg, i).b == doctest::Approx(1.2 / 5 * 4 + 0.3).epsilon(1e-14));
    CHECK_THROWS_AS(local_field(inst, cfg, 5), Error);
}

TEST_CASE("cavity Hamiltonian at t = 1 is the base Hamiltonian") {
    const Prior p = bernoulli(0.5);
    const Instance base = sample_instance(p, 12, 2.0, 0.1, 1.0, 0.0, 8);
    Instance cav = base;
    cav.q_cav = 0.37;
    Stream s(3, 3);
    for (int k = 0; k < 20; ++k) {
        Configuration cfg;
        for (int i = 0; i < 12; ++i) cfg.x.push_back(p.atoms()[p.sample_index(s.uniform())]);
        CHECK(energy(base, cfg) == energy(cav, cfg));
    }
}

TEST_CASE("energy is invariant under site relabeling that fixes the cavity site") {
    const Prior p = rademacher();
    const int N = 8;
    const Instance inst = sample_instance(p, N, 1.5, 0.2, 0.6, 0.3, 21);
    const int perm[N] = {3, 0, 6, 1, 5, 2, 4, 7};
    Instance q = inst;
    for (int i = 0; i < N; ++i) {
        q.xstar[i] = inst.xstar[perm[i]];
        q.hnoise[i] = inst.hnoise[perm[i]];
        for (int j = i + 1; j < N; ++j) q.z_upper[packed_index(N, i, j)] = inst.z(perm[i], perm[j]);
    }
    const Configuration cfg{{1, -1, -1, 1, 1, 1, -1, 1}};
    Configuration pc;
    for (int i = 0; i < N; ++i) pc.x.push_back(cfg.x[perm[i]]);
    CHECK(energy(q, pc) == doctest::Approx(energy(inst, cfg)).epsilon(1e-13));
}

TEST_CASE("overlaps") {
    const Configuration a{{1, 1, -1, 1}}, b{{1, -1, -1, 1}};
    CHECK(overlap(a, b) == 0.5);
    CHECK(overlap(a, a) == 1.0);
    CHECK(overlap(a, b) - overlap_minus(a, b) == a.x[3] * b.x[3] / 4.0);
    CHECK_THROWS_AS(overlap(a.x, std::vector<double>{1.0}), Error);
}

TEST_CASE("snapshot replay") {
    const Prior p = bernoulli(0.3);
    const Instance inst = sample_instance(p, 15, 1.1, 0.2, 0.5, 0.25, 1234567890123ull);
    const Instance back = replay(load_snapshot(save_snapshot(p, inst)));
    CHECK(back.xstar == inst.xstar);
    CHECK(back.z_upper == inst.z_upper);
    CHECK(back.hnoise == inst.hnoise);
    CHECK(back.z_cav == inst.z_cav);
    CHECK(back.t == inst.t);
    CHECK_THROWS_AS(load_snapshot("{}"), Error);
}

TEST_CASE("resampled noise keeps the ground truth") {
    const Instance inst = sample_instance(rademacher(), 20, 1.0, 0.0, 1.0, 0.0, 5);
    const Instance other = resample_noise(inst, 6);
    CHECK(other.xstar == inst.xstar);
    CHECK(other.z_upper != inst.z_upper);
}
