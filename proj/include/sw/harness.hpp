#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sw/config.hpp"
#include "sw/covariance.hpp"
#include "sw/error.hpp"
#include "sw/observables.hpp"
#include "sw/scalar_channel.hpp"

namespace sw {

std::string version_string();

/// One parsed samples CSV: "# key=value" header lines, a column row, numeric rows.
struct SampleTable {
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    /// Throws Error{IoError} for a missing column.
    std::size_t column(const std::string& name) const;
};

/// instance, sample, sweep_index, q_a_b for a < b over {s, 1..n}, last_a for a in {s, 1..n},
/// energy_1..energy_n.
std::vector<std::string> sample_columns(int n_replicas);

void write_samples_csv(const std::string& path, const std::vector<std::pair<std::string, std::string>>& meta,
                       const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows);
/// Throws Error{IoError} on a missing file or malformed content.
SampleTable read_samples_csv(const std::string& path);

/// Regroups a table into rescaled samples per instance.
SamplesByInstance samples_from_table(const SampleTable& t, double qbar);

struct TheoryPoint {
    double lambda = 0.0;
    ScalarTheory scalar;
    CovarianceResult cov;
    std::optional<CovarianceResult> general;
};

std::vector<TheoryPoint> compute_theory(const ExperimentConfig& c);
nlohmann::json theory_to_json(const ExperimentConfig& c, const std::vector<TheoryPoint>& pts);

/// Grid point k covers lambda[k / |N|] and N[k % |N|].
int n_points(const ExperimentConfig& c);
std::string samples_path(const ExperimentConfig& c, int k, bool control = false);

/// Writes samples/<k>.csv (and samples/<k>-control.csv with the negative control).
void run_simulate(const ExperimentConfig& c, const std::vector<TheoryPoint>& theory, std::ostream& log);

/// Reads theory.json and the sample files, writes report.json and plots/. The returned
/// report carries a "checks" array and an "all_pass" flag.
nlohmann::json run_analyze(const ExperimentConfig& c, std::ostream& log);

/// Writes histogram and QQ plots for one point; returns the number of files written.
int emit_point_plots(const std::string& dir, int k, std::span<const double> xi12, double sigma2,
                     const ExperimentConfig& c, std::ostream& log);

nlohmann::json run_oracle(const ExperimentConfig& c, std::ostream& log);
nlohmann::json run_cavity(const ExperimentConfig& c, std::ostream& log);

/// Dispatches on c.mode. Returns 0 when everything ran and every enabled check passed,
/// 1 on a failed check. Errors propagate.
int run(const ExperimentConfig& c, std::ostream& log);

/// 2 for configuration errors, 3 for IO errors, 1 otherwise.
int exit_code(const Error& e);

}  // namespace sw
