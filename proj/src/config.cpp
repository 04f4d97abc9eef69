#include "sw/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sw/error.hpp"

namespace sw {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

template <class T>
T get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        bad(std::string("bad value for '") + key + "'");
    }
}

template <class T>
std::vector<T> scalar_or_list(const json& j, const char* key) {
    const json& v = j.at(key);
    try {
        if (v.is_array()) return v.get<std::vector<T>>();
        return {v.get<T>()};
    } catch (const json::exception&) {
        bad(std::string("bad value for '") + key + "'");
    }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) bad(where + " must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) bad("unknown key '" + k + "' in " + where);
}

}  // namespace

Prior PriorSpec::build() const {
    if (!name.empty()) return prior_by_name(name);
    return make_prior(atoms, weights);
}

Mode parse_mode(const std::string& s) {
    if (s == "theory") return Mode::theory;
    if (s == "simulate") return Mode::simulate;
    if (s == "analyze") return Mode::analyze;
    if (s == "oracle") return Mode::oracle;
    if (s == "cavity-check") return Mode::cavity_check;
    if (s == "pipeline") return Mode::pipeline;
    bad("unknown mode '" + s + "'");
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::theory: return "theory";
        case Mode::simulate: return "simulate";
        case Mode::analyze: return "analyze";
        case Mode::oracle: return "oracle";
        case Mode::cavity_check: return "cavity-check";
        case Mode::pipeline: return "pipeline";
    }
    return "";
}

ExperimentConfig config_from_json(const json& j) {
    check_keys(j,
               {"prior", "lambda", "h", "t", "N", "replicas", "instances", "chain", "seed", "output",
                "mode", "quadrature_nodes", "parallel", "negative_control", "n_check", "cavity", "oracle"},
               "config");
    ExperimentConfig c;
    if (j.contains("prior")) {
        const json& p = j["prior"];
        if (p.is_string()) {
            c.prior = {p.get<std::string>(), {}, {}};
        } else {
            check_keys(p, {"atoms", "weights"}, "prior");
            c.prior.name.clear();
            c.prior.atoms = get<std::vector<double>>(p, "atoms");
            c.prior.weights = get<std::vector<double>>(p, "weights");
        }
    }
    if (j.contains("lambda")) c.lambda = scalar_or_list<double>(j, "lambda");
    if (j.contains("N")) c.N = scalar_or_list<int>(j, "N");
    if (j.contains("h")) c.h = get<double>(j, "h");
    if (j.contains("t")) c.t = get<double>(j, "t");
    if (j.contains("replicas")) c.replicas = get<int>(j, "replicas");
    if (j.contains("instances")) c.instances = get<int>(j, "instances");
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
    if (j.contains("output")) c.output = get<std::string>(j, "output");
    if (j.contains("mode")) c.mode = parse_mode(get<std::string>(j, "mode"));
    if (j.contains("quadrature_nodes")) c.quadrature_nodes = get<int>(j, "quadrature_nodes");
    if (j.contains("parallel")) c.parallel = get<bool>(j, "parallel");
    if (j.contains("negative_control")) c.negative_control = get<bool>(j, "negative_control");
    if (j.contains("n_check")) c.n_check = get<int>(j, "n_check");
    if (j.contains("chain")) {
        const json& ch = j["chain"];
        check_keys(ch, {"burnin", "spacing", "samples", "init", "kernel"}, "chain");
        if (ch.contains("burnin")) c.burnin = get<int>(ch, "burnin");
        if (ch.contains("spacing")) c.spacing = get<int>(ch, "spacing");
        if (ch.contains("samples")) c.samples = get<int>(ch, "samples");
        if (ch.contains("init")) {
            const auto s = get<std::string>(ch, "init");
            if (s == "planted") c.init = InitMode::planted;
            else if (s == "prior") c.init = InitMode::prior;
            else bad("chain.init must be planted or prior");
        }
        if (ch.contains("kernel")) {
            const auto s = get<std::string>(ch, "kernel");
            if (s == "cached") c.kernel = Kernel::cached;
            else if (s == "reference") c.kernel = Kernel::reference;
            else bad("chain.kernel must be cached or reference");
        }
    }
    if (j.contains("cavity")) {
        const json& cv = j["cavity"];
        check_keys(cv, {"N", "q_cav", "t0", "eps", "instances", "variant"}, "cavity");
        if (cv.contains("N")) c.cavity.N = get<int>(cv, "N");
        if (cv.contains("q_cav") && !cv["q_cav"].is_null()) c.cavity.q_cav = get<double>(cv, "q_cav");
        if (cv.contains("t0")) c.cavity.t0 = get<double>(cv, "t0");
        if (cv.contains("eps")) c.cavity.eps = get<double>(cv, "eps");
        if (cv.contains("instances")) c.cavity.instances = get<int>(cv, "instances");
        if (cv.contains("variant")) {
            const auto s = get<std::string>(cv, "variant");
            if (s == "general") c.cavity.variant = CavityVariant::general;
            else if (s == "full") c.cavity.variant = CavityVariant::full;
            else bad("cavity.variant must be general or full");
        }
    }
    if (j.contains("oracle")) {
        const json& o = j["oracle"];
        check_keys(o, {"N", "instances", "burnin", "spacing", "samples"}, "oracle");
        if (o.contains("N")) c.oracle.N = get<int>(o, "N");
        if (o.contains("instances")) c.oracle.instances = get<int>(o, "instances");
        if (o.contains("burnin")) c.oracle.burnin = get<int>(o, "burnin");
        if (o.contains("spacing")) c.oracle.spacing = get<int>(o, "spacing");
        if (o.contains("samples")) c.oracle.samples = get<int>(o, "samples");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        bad(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    if (!c.prior.name.empty()) j["prior"] = c.prior.name;
    else j["prior"] = {{"atoms", c.prior.atoms}, {"weights", c.prior.weights}};
    j["lambda"] = c.lambda;
    j["h"] = c.h;
    j["t"] = c.t;
    j["N"] = c.N;
    j["replicas"] = c.replicas;
    j["instances"] = c.instances;
    j["chain"] = {{"burnin", c.burnin},
                  {"spacing", c.spacing},
                  {"samples", c.samples},
                  {"init", c.init == InitMode::planted ? "planted" : "prior"},
                  {"kernel", c.kernel == Kernel::cached ? "cached" : "reference"}};
    j["seed"] = c.seed;
    j["output"] = c.output;
    j["mode"] = mode_name(c.mode);
    j["quadrature_nodes"] = c.quadrature_nodes;
    j["parallel"] = c.parallel;
    j["negative_control"] = c.negative_control;
    j["n_check"] = c.n_check;
    j["cavity"] = {{"N", c.cavity.N},
                   {"q_cav", c.cavity.q_cav ? json(*c.cavity.q_cav) : json(nullptr)},
                   {"t0", c.cavity.t0},
                   {"eps", c.cavity.eps},
                   {"instances", c.cavity.instances},
                   {"variant", c.cavity.variant == CavityVariant::general ? "general" : "full"}};
    j["oracle"] = {{"N", c.oracle.N},
                   {"instances", c.oracle.instances},
                   {"burnin", c.oracle.burnin},
                   {"spacing", c.oracle.spacing},
                   {"samples", c.oracle.samples}};
    return j;
}

void validate(const ExperimentConfig& c) {
    try {
        (void)c.prior.build();
    } catch (const Error& e) {
        bad(std::string("prior: ") + e.what());
    }
    if (c.lambda.empty()) bad("lambda grid is empty");
    if (c.N.empty()) bad("N grid is empty");
    for (double l : c.lambda)
        if (!(l >= 0.0) || !std::isfinite(l)) bad("lambda must be finite and >= 0");
    for (int n : c.N)
        if (n < 2) bad("N must be >= 2");
    if (!(c.h >= 0.0)) bad("h must be >= 0");
    if (!(c.t >= 0.0 && c.t <= 1.0)) bad("t must lie in [0,1]");
    if (c.replicas < 2 || c.replicas > 8) bad("replicas must lie in 2..8");
    if (c.instances < 1) bad("instances must be >= 1");
    if (c.burnin < 0 || c.spacing < 1 || c.samples < 1) bad("chain counts out of range");
    if (c.quadrature_nodes < 1 || c.quadrature_nodes > 400) bad("quadrature_nodes must lie in 1..400");
    if (c.n_check < 0 || c.n_check == 1 || c.n_check > 8) bad("n_check must be 0 or 2..8");
    if (c.output.empty()) bad("output directory is empty");
    if (c.cavity.N < 2 || c.cavity.instances < 2 || !(c.cavity.eps > 0.0)) bad("cavity settings out of range");
    if (c.oracle.N < 2 || c.oracle.instances < 2 || c.oracle.samples < 1 || c.oracle.spacing < 1)
        bad("oracle settings out of range");
}

std::string config_hash(const ExperimentConfig& c) {
    json j = config_to_json(c);
    j.erase("output");
    j.erase("mode");
    j.erase("parallel");
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace sw
