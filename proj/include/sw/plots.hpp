#pragma once

#include <span>
#include <string>
#include <vector>

namespace sw {

/// Slope label with two decimals and a typographic minus, e.g. "−1.00".
std::string format_slope(double slope);

/// Inverse standard normal CDF.
double normal_quantile(double p);

struct QQPoint {
    double theoretical = 0.0;   // sigma * Phi^-1((i + 1/2) / n)
    double empirical = 0.0;     // i-th order statistic
};

std::vector<QQPoint> qq_points(std::span<const double> xs, double sigma2);

/// Text embedded in every SVG as a comment.
struct PlotMeta {
    std::string config_hash;
    std::string seed;
    std::string version;
};

std::string histogram_svg(std::span<const double> xs, double sigma2, const std::string& title,
                          const PlotMeta& meta, int bins = 30);
std::string qq_svg(std::span<const QQPoint> pts, const std::string& title, const PlotMeta& meta);
std::string loglog_svg(std::span<const double> Ns, std::span<const double> moment, double slope,
                       double intercept, const std::string& title, const PlotMeta& meta);

/// Writes text to path; throws Error{IoError}.
void write_text(const std::string& path, const std::string& text);

}  // namespace sw
