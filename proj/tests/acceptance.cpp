// Acceptance gate: one PASS/FAIL line per criterion. Exit status 0 iff all pass.
// Usage: acceptance [output_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "sw/config.hpp"
#include "sw/covariance.hpp"
#include "sw/error.hpp"
#include "sw/exact.hpp"
#include "sw/harness.hpp"
#include "sw/observables.hpp"
#include "sw/sampler.hpp"
#include "sw/scalar_channel.hpp"

using namespace sw;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path g_out;
int g_failed = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
        o.pass = false;
        o.detail += fmt("; over the %.0f s budget", budget_s);
    }
    if (!o.pass) ++g_failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail
              << fmt(" [%.1f s]", secs) << std::endl;
}

void info(const std::string& s) { std::cout << "  " << s << std::endl; }

ExperimentConfig base(const std::string& dir) {
    ExperimentConfig c;
    c.output = (g_out / dir).string();
    c.seed = 20240611;
    return c;
}

json run_pipeline(const ExperimentConfig& c) {
    fs::remove_all(c.output);
    std::ostringstream log;
    run(c, log);
    std::ifstream in(fs::path(c.output) / "report.json");
    return json::parse(in);
}

const json& find_check(const json& report, const std::string& name, int point = 0) {
    for (const auto& ch : report.at("checks"))
        if (ch.at("name") == name && ch.at("point") == point) return ch;
    throw Error(ErrorCode::IoError, "report has no check " + name);
}

bool checks_pass(const json& report, const std::vector<std::string>& names, std::string& detail) {
    bool ok = true;
    for (const auto& n : names) {
        const auto& ch = find_check(report, n);
        const bool p = ch.at("pass").get<bool>();
        ok = ok && p;
        if (!p) detail += " " + n + " failed;";
    }
    return ok;
}

std::string est(const json& e) { return fmt("%.4f +- %.4f", e.at("value").get<double>(), e.at("se").get<double>()); }

// Criterion 5/6 runs are shared.
json g_rad, g_ber;

Outcome covariance_algebra() {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0, sym = 0.0;
    int count = 0;
    for (int n = 2; n <= 6; ++n) {
        int made = 0;
        while (made < 100) {
            const double a3 = 0.3 * u(gen), a2 = a3 + 0.3 * u(gen), a1 = a2 + u(gen), lambda = 0.05 + 2.0 * u(gen);
            if (!(mu1(a1, a2, a3, lambda) < 0.95)) continue;
            const auto cf = covariance_closed_form(a1, a2, a3, lambda);
            const auto g = solve_covariance_general_n(build_cavity_system(n, a1, a2, a3), lambda);
            worst = std::max({worst, std::abs(g.A - cf.A), std::abs(g.B - cf.B), std::abs(g.C - cf.C)});
            sym = std::max(sym, g.symmetry_residual);
            ++made;
            ++count;
        }
    }
    return {worst < 1e-10 && sym < 1e-10,
            fmt("%d tuples, max |general - closed| = %.2e, symmetry residual %.2e", count, worst, sym)};
}

Outcome spot_value() {
    const GaussHermiteRule rule;
    const auto th = solve_fixed_point(rademacher(), 0.5, 0.0, rule);
    const auto cf = covariance_closed_form(th.a1, th.a2, th.a3, 0.5);
    const bool ok = std::abs(th.qbar) < 1e-10 && std::abs(cf.A - 2.0) < 1e-10 && std::abs(cf.B) < 1e-10 &&
                    std::abs(cf.C) < 1e-10;
    return {ok, fmt("qbar=%.3g A=%.12f B=%.3g C=%.3g", th.qbar, cf.A, cf.B, cf.C)};
}

Outcome fixed_point_quality() {
    const GaussHermiteRule rule;
    double worst_res = 0.0, worst_mono = 0.0, worst_traj = 0.0;
    for (const Prior& p : {rademacher(), bernoulli(0.5)}) {
        for (int k = 1; k <= 30; ++k) {
            const double lambda = 0.1 * k;
            const auto th = solve_fixed_point(p, lambda, 0.0, rule);
            worst_res = std::max(worst_res, std::abs(th.qbar - F(p, lambda * th.qbar, rule)));
        }
        double prev = F(p, 0.1, rule);
        for (int k = 2; k <= 30; ++k) {
            const double f = F(p, 0.1 * k, rule);
            worst_mono = std::max(worst_mono, prev - f);
            prev = f;
        }
    }
    const std::pair<Prior, double> cases[] = {{rademacher(), 1.5}, {bernoulli(0.5), 2.0}};
    for (const auto& [p, lambda] : cases) {
        const double qbar = solve_fixed_point(p, lambda, 0.0, rule).qbar;
        for (int k = 0; k < 10; ++k) {
            const auto pt = constant_overlap_trajectory(p, lambda, lambda * k / 9.0, rule);
            worst_traj = std::max(worst_traj, std::abs(pt.q - qbar));
        }
    }
    return {worst_res < 1e-10 && worst_mono <= 1e-10 && worst_traj < 1e-8,
            fmt("max residual %.2e, max monotonicity violation %.2e, max trajectory drift %.2e", worst_res,
                std::max(0.0, worst_mono), worst_traj)};
}

Outcome sampler_correctness() {
    const Prior p = rademacher();
    const Instance inst = sample_instance(p, 4, 1.5, 0.0, 1.0, 0.0, 13);
    const ExactGibbs g(inst, p);
    ChainSpec spec;
    spec.sweeps_burnin = 100;
    spec.sweeps_between_samples = 1;
    spec.n_samples = 1000000;
    spec.seed = 5;
    std::vector<double> counts(16, 0.0);
    run_chain(inst, p, spec, [&](const GibbsSample& s) {
        std::size_t idx = 0;
        for (int i = 3; i >= 0; --i) idx = 2 * idx + (s.configs[0].x[i] > 0 ? 1 : 0);
        counts[idx] += 1.0;
    });
    double l1 = 0.0;
    for (std::size_t k = 0; k < 16; ++k) l1 += std::abs(counts[k] / spec.n_samples - g.probabilities()[k]);

    auto c = base("c4_oracle");
    c.lambda = {1.5};
    c.oracle.N = 8;
    c.oracle.instances = 200;
    std::ostringstream log;
    const json o = run_oracle(c, log);
    const auto& pt = o.at("points")[0];
    const bool ok = l1 < 0.01 && o.at("all_pass").get<bool>();
    return {ok, fmt("N=4 L1 = %.4f; N=8 exact E<q1*> = %.4f, E<q1*^2> = %.4f; MCMC - exact: q1* %s, q12 %s, "
                    "q1*^2 %s",
                    l1, pt.at("exact_q1star").at("value").get<double>(),
                    pt.at("exact_q1star_sq").at("value").get<double>(), est(pt.at("diff_q1star")).c_str(),
                    est(pt.at("diff_q12")).c_str(), est(pt.at("diff_q1star_sq")).c_str())};
}

ExperimentConfig clt_config(const std::string& dir, const std::string& prior, double lambda, bool control) {
    auto c = base(dir);
    c.prior = {prior, {}, {}};
    c.lambda = {lambda};
    c.N = {1000};
    c.instances = 400;
    c.replicas = 3;
    c.burnin = 200;
    c.spacing = 10;
    c.samples = 10;
    c.negative_control = control;
    return c;
}

Outcome clt_reproduction() {
    g_rad = run_pipeline(clt_config("c5_rademacher", "rademacher", 0.5, false));
    g_ber = run_pipeline(clt_config("c5_bernoulli", "bernoulli(0.5)", 2.0, true));
    std::string detail;
    const std::vector<std::string> names{"var12", "cov12_13", "cov12_23", "ks", "skew", "exkurt"};
    bool ok = checks_pass(g_rad, names, detail);
    auto with_c = names;
    with_c.push_back("pooled_C");
    ok = checks_pass(g_ber, with_c, detail) && ok;
    for (const auto* r : {&g_rad, &g_ber}) {
        const auto& p = (*r)["points"][0];
        const auto& nt = p["normality"];
        info(fmt("%s lambda=%g: Var(xi12) %s vs A=%.4f; Cov(12,13) %s, Cov(12,23) %s vs B=%.4f; pooled C %s vs %.4f",
                 r == &g_rad ? "rademacher" : "{0,1}", p["lambda"].get<double>(), est(p["covariance"]["var12"]).c_str(),
                 p["theory"]["A"].get<double>(), est(p["covariance"]["cov12_13"]).c_str(),
                 est(p["covariance"]["cov12_23"]).c_str(), p["theory"]["B"].get<double>(),
                 est(p["covariance"]["C"]).c_str(), p["theory"]["C"].get<double>()));
        info(fmt("  KS D=%.4f p=%.3f; skew %.3f +- %.3f; exkurt %.3f +- %.3f (n=%d)", nt["ks_stat"].get<double>(),
                 nt["ks_p"].get<double>(), nt["skew"].get<double>(), nt["skew_se"].get<double>(),
                 nt["exkurt"].get<double>(), nt["exkurt_se"].get<double>(), nt["n"].get<int>()));
    }
    return {ok, detail.empty() ? "all covariance and normality checks within tolerance" : detail};
}

Outcome nishimori() {
    if (g_rad.is_null() || g_ber.is_null()) return {false, "criterion 5 runs missing"};
    std::string detail;
    bool ok = checks_pass(g_rad, {"nishimori"}, detail);
    ok = checks_pass(g_ber, {"nishimori", "negative_control_rejects"}, detail) && ok;
    const auto& a = g_rad["points"][0]["nishimori"];
    const auto& b = g_ber["points"][0]["nishimori"];
    const auto& n = g_ber["points"][0]["negative_control"];
    return {ok, fmt("gap rademacher %.5f +- %.5f, {0,1} %.5f +- %.5f; control gap %.5f +- %.5f%s",
                    a["gap"].get<double>(), a["se"].get<double>(), b["gap"].get<double>(), b["se"].get<double>(),
                    n["gap"].get<double>(), n["se"].get<double>(), detail.c_str())};
}

Outcome concentration() {
    auto c = base("c7_concentration");
    c.prior = {"rademacher", {}, {}};
    c.lambda = {1.5};
    c.N = {250, 500, 1000, 2000};
    c.replicas = 2;
    c.instances = 1000;   // m2 is heavy-tailed in the instance; 200 leaves slope se ~0.06
    c.burnin = 400;
    c.spacing = 10;
    c.samples = 10;
    const json r = run_pipeline(c);
    const auto& f = r["concentration"][0];
    const double s = f["slope2"].get<double>();
    std::string m;
    for (const auto& v : f["m2"]) m += fmt(" %.3g", v.get<double>());
    return {s >= -1.2 && s <= -0.8, fmt("slope2 = %.3f (slope4 = %.3f), mean (|q1*|-qbar)^2 by N:%s", s,
                                        f["slope4"].get<double>(), m.c_str())};
}

Outcome cavity() {
    auto c = base("c8_cavity");
    c.lambda = {1.0};
    c.cavity.N = 6;
    c.cavity.t0 = 0.5;
    c.cavity.eps = 1e-3;
    c.cavity.instances = 500;
    std::ostringstream log;
    const json main = run_cavity(c, log);
    info(fmt("q_cav=qbar=%.3g: fd=%.3e rhs=%.3e paired se=%.3e", main["q_cav"].get<double>(), main["fd"].get<double>(),
             main["rhs"].get<double>(), main["se"].get<double>()));

    // off the fixed point the identity is nontrivial; more instances resolve it to 5%
    c.output = (g_out / "c8_cavity_off").string();
    c.cavity.q_cav = 0.3;
    c.cavity.instances = 4000;
    const json off = run_cavity(c, log);
    info(fmt("q_cav=0.3, f=q12: fd=%.4f rhs=%.4f paired se=%.4f", off["fd"].get<double>(), off["rhs"].get<double>(),
             off["se"].get<double>()));
    c.output = (g_out / "c8_cavity_full").string();
    c.prior = {"bernoulli(0.5)", {}, {}};
    c.cavity.variant = CavityVariant::full;
    const json full = run_cavity(c, log);
    info(fmt("q_cav=0.3, {0,1}, f=q1* (ground-truth variant): fd=%.4f rhs=%.4f paired se=%.4f identity %s",
             full["fd"].get<double>(), full["rhs"].get<double>(), full["se"].get<double>(),
             full["identity_holds"].get<bool>() ? "holds" : "violated"));
    const bool ok = main["pass"].get<bool>() && off["pass"].get<bool>() && full["identity_holds"].get<bool>();
    return {ok, fmt("N=6 lambda=1 t0=0.5: main %s, off-fixed-point %s, ground-truth variant %s",
                    main["pass"].get<bool>() ? "ok" : "failed", off["pass"].get<bool>() ? "ok" : "failed",
                    full["identity_holds"].get<bool>() ? "ok" : "failed")};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[fs::relative(e.path(), dir).string()] = ss.str();
    }
    return out;
}

Outcome determinism() {
    auto c = base("c9_determinism");
    c.prior = {"bernoulli(0.5)", {}, {}};
    c.lambda = {1.0, 2.0};
    c.N = {100, 200, 300};
    c.instances = 40;
    c.burnin = 50;
    c.samples = 4;
    c.negative_control = true;
    run_pipeline(c);
    const auto a = snapshot(c.output);
    run_pipeline(c);
    const auto b = snapshot(c.output);
    c.parallel = false;
    run_pipeline(c);
    auto s = snapshot(c.output);
    s.erase("config.json");   // records the parallel flag
    auto a2 = a;
    a2.erase("config.json");
    const bool ok = a == b && a2 == s && !a.empty();
    return {ok, fmt("%zu files, repeat %s, serial %s", a.size(), a == b ? "identical" : "DIFFERS",
                    a2 == s ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
    g_out = argc > 1 ? fs::path(argv[1]) : fs::current_path() / "acceptance_out";
    fs::create_directories(g_out);
    std::cout << "acceptance output in " << g_out.string() << std::endl;
    criterion(1, "covariance algebra equivalence", 5, covariance_algebra);
    criterion(2, "analytic spot value", 0, spot_value);
    criterion(3, "fixed-point quality", 10, fixed_point_quality);
    criterion(4, "sampler correctness", 120, sampler_correctness);
    criterion(5, "CLT reproduction", 3600, clt_reproduction);
    criterion(6, "Nishimori identity", 0, nishimori);
    criterion(7, "concentration scaling", 1800, concentration);
    criterion(8, "cavity derivative identity", 300, cavity);
    criterion(9, "determinism", 0, determinism);
    std::cout << (g_failed == 0 ? "ALL PASS" : fmt("%d criteria FAILED", g_failed)) << std::endl;
    return g_failed == 0 ? 0 : 1;
}
