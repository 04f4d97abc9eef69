#include "sw/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sw/error.hpp"
#include "sw/observables.hpp"

namespace sw {

namespace {

constexpr double kW = 640, kH = 420, kL = 60, kR = 20, kT = 40, kB = 50;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); }
    double py(double y) const { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); }
};

void open_svg(std::ostringstream& o, const std::string& title, const PlotMeta& m, const Frame& f,
              const std::string& xlabel, const std::string& ylabel) {
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<!-- config_hash=" << m.config_hash << " seed=" << m.seed << " version=" << escape(m.version)
      << " -->\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    o << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\""
      << kH - kT - kB << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0, yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        o << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\">"
          << tick(xv) << "</text>\n";
        o << "<text x=\"" << kL - 6 << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
          << "</text>\n";
    }
    o << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << escape(xlabel)
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kH / 2
      << ")\">" << escape(ylabel) << "</text>\n";
}

}  // namespace

std::string format_slope(double slope) {
    std::string s = num(std::abs(slope));
    if (slope < 0 && s != "0.00") return "−" + s;
    return s;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::BadDimension, "quantile needs p in (0,1)");
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double m = 0.5 * (lo + hi);
        if (normal_cdf(m) < p) lo = m;
        else hi = m;
    }
    return 0.5 * (lo + hi);
}

std::vector<QQPoint> qq_points(std::span<const double> xs, double sigma2) {
    std::vector<double> s(xs.begin(), xs.end());
    std::sort(s.begin(), s.end());
    const double sd = std::sqrt(sigma2);
    const std::size_t n = s.size();
    std::vector<QQPoint> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = {sd * normal_quantile((i + 0.5) / static_cast<double>(n)), s[i]};
    return out;
}

std::string histogram_svg(std::span<const double> xs, double sigma2, const std::string& title,
                          const PlotMeta& meta, int bins) {
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    const double sd = std::sqrt(sigma2);
    double x0 = *mn, x1 = *mx;
    if (std::isfinite(sd) && sd > 0) {
        x0 = std::min(x0, -4 * sd);
        x1 = std::max(x1, 4 * sd);
    }
    if (x1 <= x0) x1 = x0 + 1.0;
    const double w = (x1 - x0) / bins;
    std::vector<double> dens(bins, 0.0);
    for (double x : xs) dens[std::min(bins - 1, static_cast<int>((x - x0) / w))] += 1.0;
    for (double& d : dens) d /= xs.size() * w;
    double ymax = *std::max_element(dens.begin(), dens.end());
    if (std::isfinite(sd) && sd > 0) ymax = std::max(ymax, 1.0 / (sd * std::sqrt(2 * std::numbers::pi)));
    const Frame f{x0, x1, 0.0, 1.1 * ymax};
    std::ostringstream o;
    open_svg(o, title, meta, f, "xi_12", "density");
    for (int b = 0; b < bins; ++b) {
        const double l = x0 + b * w;
        o << "<rect x=\"" << num(f.px(l)) << "\" y=\"" << num(f.py(dens[b])) << "\" width=\""
          << num(f.px(l + w) - f.px(l)) << "\" height=\"" << num(f.py(0) - f.py(dens[b]))
          << "\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>\n";
    }
    if (std::isfinite(sd) && sd > 0) {
        o << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" points=\"";
        for (int k = 0; k <= 200; ++k) {
            const double x = x0 + (x1 - x0) * k / 200.0;
            const double y = std::exp(-0.5 * x * x / sigma2) / (sd * std::sqrt(2 * std::numbers::pi));
            o << num(f.px(x)) << "," << num(f.py(y)) << " ";
        }
        o << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string qq_svg(std::span<const QQPoint> pts, const std::string& title, const PlotMeta& meta) {
    double lo = 0, hi = 0;
    for (const auto& p : pts) {
        lo = std::min({lo, p.theoretical, p.empirical});
        hi = std::max({hi, p.theoretical, p.empirical});
    }
    if (hi <= lo) hi = lo + 1.0;
    const Frame f{lo, hi, lo, hi};
    std::ostringstream o;
    open_svg(o, title, meta, f, "normal quantile", "sample quantile");
    o << "<line x1=\"" << num(f.px(lo)) << "\" y1=\"" << num(f.py(lo)) << "\" x2=\"" << num(f.px(hi))
      << "\" y2=\"" << num(f.py(hi)) << "\" stroke=\"#d62728\"/>\n";
    for (const auto& p : pts)
        o << "<circle cx=\"" << num(f.px(p.theoretical)) << "\" cy=\"" << num(f.py(p.empirical))
          << "\" r=\"2\" fill=\"#3182bd\"/>\n";
    o << "</svg>\n";
    return o.str();
}

std::string loglog_svg(std::span<const double> Ns, std::span<const double> moment, double slope,
                       double intercept, const std::string& title, const PlotMeta& meta) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < Ns.size(); ++k) {
        lx.push_back(std::log10(Ns[k]));
        ly.push_back(moment[k] > 0 ? std::log10(moment[k]) : std::nan(""));
    }
    auto [xa, xb] = std::minmax_element(lx.begin(), lx.end());
    double y0 = 1e300, y1 = -1e300;
    for (double y : ly)
        if (std::isfinite(y)) {
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!(y1 > y0)) {
        y0 = -1;
        y1 = 0;
    }
    const double pad = 0.1 * (y1 - y0);
    const double padx = 0.05 * std::max(*xb - *xa, 0.1);
    const Frame f{*xa - padx, *xb + padx, y0 - pad, y1 + pad};
    std::ostringstream o;
    open_svg(o, title, meta, f, "log10 N", "log10 moment");
    // fit line: log m = intercept + slope log N
    const double ln10 = std::log(10.0);
    auto fit = [&](double x) { return (intercept + slope * x * ln10) / ln10; };
    o << "<line x1=\"" << num(f.px(f.x0)) << "\" y1=\"" << num(f.py(fit(f.x0))) << "\" x2=\"" << num(f.px(f.x1))
      << "\" y2=\"" << num(f.py(fit(f.x1))) << "\" stroke=\"#d62728\"/>\n";
    for (std::size_t k = 0; k < lx.size(); ++k)
        if (std::isfinite(ly[k]))
            o << "<circle cx=\"" << num(f.px(lx[k])) << "\" cy=\"" << num(f.py(ly[k]))
              << "\" r=\"4\" fill=\"#3182bd\"/>\n";
    o << "<text x=\"" << kW - kR - 10 << "\" y=\"" << kT + 20 << "\" text-anchor=\"end\">slope "
      << format_slope(slope) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace sw
