#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sw/observables.hpp"
#include "sw/prior.hpp"
#include "sw/sampler.hpp"

namespace sw {

inline constexpr const char* kVersion = "sw 0.1.0";

enum class Mode { theory, simulate, analyze, oracle, cavity_check, pipeline };

struct PriorSpec {
    std::string name;               // empty when atoms/weights are given
    std::vector<double> atoms;
    std::vector<double> weights;

    Prior build() const;
};

struct CavityConfig {
    int N = 6;
    std::optional<double> q_cav;   // unset: use qbar at the first lambda
    double t0 = 0.5;
    double eps = 1e-3;
    int instances = 500;
    CavityVariant variant = CavityVariant::general;
};

struct OracleConfig {
    int N = 8;
    int instances = 200;
    int burnin = 200;
    int spacing = 2;
    int samples = 500;
};

struct ExperimentConfig {
    PriorSpec prior{"rademacher", {}, {}};
    std::vector<double> lambda{0.5};
    double h = 0.0;
    double t = 1.0;
    std::vector<int> N{1000};
    int replicas = 3;
    int instances = 400;
    int burnin = 200;
    int spacing = 10;
    int samples = 10;
    InitMode init = InitMode::planted;
    Kernel kernel = Kernel::cached;
    std::uint64_t seed = 1;
    std::string output = "out";
    Mode mode = Mode::pipeline;
    int quadrature_nodes = 61;
    bool parallel = true;
    bool negative_control = false;   // extra run with replica 2 on resampled noise
    int n_check = 0;                 // > 0: cross-check the closed form against the n-replica system
    CavityConfig cavity;
    OracleConfig oracle;
};

/// Throws Error{ConfigError} on unknown keys, bad types or values.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
/// Canonical form; every field is present.
nlohmann::json config_to_json(const ExperimentConfig& c);
/// Throws Error{ConfigError} when a grid is empty or a count or range is invalid.
void validate(const ExperimentConfig& c);

/// FNV-1a over the canonical JSON without `output` and `mode`, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace sw
