// Command-line driver: swclt <theory|simulate|analyze|oracle|cavity-check|pipeline> [options]

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sw/config.hpp"
#include "sw/error.hpp"
#include "sw/harness.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string prior;
    std::vector<double> atoms, weights;
    std::vector<double> lambda;
    std::vector<int> N;
    double h = 0, t = 1;
    int replicas = 0, instances = 0, burnin = 0, spacing = 0, samples = 0, nodes = 0, n_check = 0;
    std::uint64_t seed = 0;
    std::string output, init, kernel;
    bool serial = false, control = false;
    int cav_N = 0, cav_instances = 0;
    double q_cav = 0, t0 = 0, eps = 0;
    std::string variant;
    int oracle_N = 0, oracle_instances = 0, oracle_samples = 0;
};

void add_options(CLI::App& app, Overrides& o, std::vector<CLI::Option*>& opts) {
    auto add = [&](CLI::Option* op) { opts.push_back(op); };
    add(app.add_option("-c,--config", o.config, "JSON config file"));
    add(app.add_option("--prior", o.prior, "rademacher or bernoulli(p)"));
    add(app.add_option("--atoms", o.atoms, "prior atoms")->expected(1, -1));
    add(app.add_option("--weights", o.weights, "prior weights")->expected(1, -1));
    add(app.add_option("--lambda", o.lambda, "SNR value or grid")->expected(1, -1));
    add(app.add_option("-N,--N", o.N, "system size or grid")->expected(1, -1));
    add(app.add_option("--field", o.h, "one-body field strength"));
    add(app.add_option("--t", o.t, "cavity interpolation parameter"));
    add(app.add_option("--replicas", o.replicas, "replicas per instance"));
    add(app.add_option("--instances", o.instances, "disorder instances per point"));
    add(app.add_option("--burnin", o.burnin, "burn-in sweeps"));
    add(app.add_option("--spacing", o.spacing, "sweeps between samples"));
    add(app.add_option("--samples", o.samples, "samples per instance"));
    add(app.add_option("--seed", o.seed, "run seed"));
    add(app.add_option("-o,--output", o.output, "output directory"));
    add(app.add_option("--init", o.init, "planted or prior")->check(CLI::IsMember({"planted", "prior"})));
    add(app.add_option("--kernel", o.kernel, "cached or reference")->check(CLI::IsMember({"cached", "reference"})));
    add(app.add_option("--nodes", o.nodes, "Gauss-Hermite nodes"));
    add(app.add_option("--n-check", o.n_check, "cross-check the closed form with the n-replica system"));
    add(app.add_flag("--serial", o.serial, "run instances on one thread"));
    add(app.add_flag("--negative-control", o.control, "also run replica 2 on resampled noise"));
    add(app.add_option("--cavity-N", o.cav_N, "cavity check system size"));
    add(app.add_option("--q-cav", o.q_cav, "cavity channel overlap (default qbar)"));
    add(app.add_option("--t0", o.t0, "cavity check interpolation point"));
    add(app.add_option("--eps", o.eps, "finite-difference step"));
    add(app.add_option("--cavity-instances", o.cav_instances, "cavity check instances"));
    add(app.add_option("--variant", o.variant, "general (f = q12) or full (f = q1*)")
            ->check(CLI::IsMember({"general", "full"})));
    add(app.add_option("--oracle-N", o.oracle_N, "oracle system size"));
    add(app.add_option("--oracle-instances", o.oracle_instances, "oracle instances"));
    add(app.add_option("--oracle-samples", o.oracle_samples, "oracle samples per instance"));
}

bool set(const CLI::App& app, const char* name) { return app.count(name) > 0; }

sw::ExperimentConfig build(const CLI::App& app, const Overrides& o, sw::Mode mode) {
    sw::ExperimentConfig c = o.config.empty() ? sw::ExperimentConfig{} : sw::load_config(o.config);
    c.mode = mode;
    if (set(app, "--prior")) c.prior = {o.prior, {}, {}};
    if (set(app, "--atoms") || set(app, "--weights")) c.prior = {"", o.atoms, o.weights};
    if (set(app, "--lambda")) c.lambda = o.lambda;
    if (set(app, "--N")) c.N = o.N;
    if (set(app, "--field")) c.h = o.h;
    if (set(app, "--t")) c.t = o.t;
    if (set(app, "--replicas")) c.replicas = o.replicas;
    if (set(app, "--instances")) c.instances = o.instances;
    if (set(app, "--burnin")) c.burnin = o.burnin;
    if (set(app, "--spacing")) c.spacing = o.spacing;
    if (set(app, "--samples")) c.samples = o.samples;
    if (set(app, "--seed")) c.seed = o.seed;
    if (set(app, "--output")) c.output = o.output;
    if (set(app, "--init")) c.init = o.init == "planted" ? sw::InitMode::planted : sw::InitMode::prior;
    if (set(app, "--kernel")) c.kernel = o.kernel == "cached" ? sw::Kernel::cached : sw::Kernel::reference;
    if (set(app, "--nodes")) c.quadrature_nodes = o.nodes;
    if (set(app, "--n-check")) c.n_check = o.n_check;
    if (o.serial) c.parallel = false;
    if (o.control) c.negative_control = true;
    if (set(app, "--cavity-N")) c.cavity.N = o.cav_N;
    if (set(app, "--q-cav")) c.cavity.q_cav = o.q_cav;
    if (set(app, "--t0")) c.cavity.t0 = o.t0;
    if (set(app, "--eps")) c.cavity.eps = o.eps;
    if (set(app, "--cavity-instances")) c.cavity.instances = o.cav_instances;
    if (set(app, "--variant")) c.cavity.variant = o.variant == "general" ? sw::CavityVariant::general : sw::CavityVariant::full;
    if (set(app, "--oracle-N")) c.oracle.N = o.oracle_N;
    if (set(app, "--oracle-instances")) c.oracle.instances = o.oracle_instances;
    if (set(app, "--oracle-samples")) c.oracle.samples = o.oracle_samples;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"swclt: fixed point, Gibbs sampling and overlap statistics for a planted rank-one model"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> modes{
        {"theory", "solve the fixed point and closed-form covariances"},
        {"simulate", "run Gibbs chains and write samples/<k>.csv"},
        {"analyze", "read samples and theory, write report.json and plots"},
        {"oracle", "compare MCMC with exact enumeration at small N"},
        {"cavity-check", "finite-difference check of the cavity derivative identity"},
        {"pipeline", "theory, simulate and analyze; exit 1 if a check fails"}};
    std::vector<Overrides> ov(modes.size());
    std::vector<std::vector<CLI::Option*>> opts(modes.size());
    std::vector<CLI::App*> subs;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        auto* s = app.add_subcommand(modes[k].first, modes[k].second);
        add_options(*s, ov[k], opts[k]);
        subs.push_back(s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (!subs[k]->parsed()) continue;
        try {
            const auto cfg = build(*subs[k], ov[k], sw::parse_mode(modes[k].first));
            const int rc = sw::run(cfg, std::cerr);
            if (cfg.mode == sw::Mode::theory) std::cout << "wrote " << cfg.output << "/theory.json\n";
            return rc;
        } catch (const sw::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return sw::exit_code(e);
        }
    }
    return 2;
}
