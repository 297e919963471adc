#pragma once

// Plot data as CSV, and SVG figures drawn from those CSV files.
//
//   benford.csv  digit, observed_freq, benford_freq
//   qq.csv       expected_quantile, observed_z
//   zeta.csv     k, r_k, S_k, zeta_k, p_value
//   rho.csv      beta, rho
//
// SVG rendering reads the CSV back, so figures can be redrawn from saved artifacts alone.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "eforensics/digits.hpp"
#include "eforensics/error.hpp"
#include "eforensics/estimate.hpp"
#include "eforensics/ingest.hpp"
#include "eforensics/zeta.hpp"
#include "eforensics/zscore.hpp"

namespace eforensics::plots {

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_benford_csv(std::ostream &out, const DigitTestReport &rep) {
    out << "digit,observed_freq,benford_freq\n";
    const double n = static_cast<double>(rep.n_used);
    for (std::size_t d = 0; d < 10; ++d) {
        out << d << ',' << num(n > 0 ? static_cast<double>(rep.counts[d]) / n : 0.0) << ',' << num(rep.expected[d])
            << '\n';
    }
}

inline void write_qq_csv(std::ostream &out, const std::vector<QQPoint> &points) {
    out << "expected_quantile,observed_z\n";
    for (const auto &p : points) {
        out << num(p.expected_quantile) << ',' << num(p.observed_z) << '\n';
    }
}

inline void write_zeta_csv(std::ostream &out, const ZetaSeries &series) {
    out << "k,r_k,S_k,zeta_k,p_value\n";
    for (const auto &p : series.points) {
        out << p.k << ',' << num(p.r_k) << ',' << num(p.S_k) << ',' << num(p.zeta) << ',' << num(p.p_value) << '\n';
    }
}

inline void write_rho_csv(std::ostream &out, const FraudEstimate &est) {
    out << "beta,rho\n";
    for (const auto &p : est.rho_curve) {
        out << num(p.beta) << ',' << num(p.rho) << '\n';
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    [[nodiscard]] const std::vector<double> &column(const std::string &name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw forensics_error(ErrorKind::missing_column, "plot data lacks column '" + name + "'");
        }
        return columns[static_cast<std::size_t>(it - header.begin())];
    }
};

inline CsvTable read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw forensics_error(ErrorKind::io_error, "cannot open '" + path.string() + "'");
    }
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) {
        throw forensics_error(ErrorKind::io_error, "'" + path.string() + "' is empty");
    }
    t.header = ::eforensics::detail::split_fields(line, ',', 1);
    t.columns.resize(t.header.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = ::eforensics::detail::split_fields(line, ',', line_no);
        for (std::size_t c = 0; c < t.columns.size() && c < fields.size(); ++c) {
            t.columns[c].push_back(std::strtod(fields[c].c_str(), nullptr));
        }
    }
    return t;
}

namespace detail {

struct Frame {
    double x0, x1, y0, y1;
    static constexpr double width = 640, height = 420, left = 64, right = 20, top = 36, bottom = 52;

    [[nodiscard]] double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    [[nodiscard]] double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline std::string f2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline void open_svg(std::ostream &out, const Frame &f, const std::string &title, const std::string &xlab,
                     const std::string &ylab) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::width << "\" height=\"" << Frame::height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << Frame::width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    out << "<rect x=\"" << Frame::left << "\" y=\"" << Frame::top << "\" width=\""
        << Frame::width - Frame::left - Frame::right << "\" height=\"" << Frame::height - Frame::top - Frame::bottom
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
        out << "<text x=\"" << f2(f.px(xv)) << "\" y=\"" << f2(Frame::height - Frame::bottom + 16)
            << "\" text-anchor=\"middle\">" << label(xv) << "</text>\n";
        out << "<text x=\"" << f2(Frame::left - 6) << "\" y=\"" << f2(f.py(yv) + 4) << "\" text-anchor=\"end\">"
            << label(yv) << "</text>\n";
    }
    out << "<text x=\"" << Frame::width / 2 << "\" y=\"" << Frame::height - 12 << "\" text-anchor=\"middle\">" << xlab
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << Frame::height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << Frame::height / 2 << ")\">" << ylab << "</text>\n";
}

inline void hline(std::ostream &out, const Frame &f, double y, const char *color, const char *dash = "4 3") {
    if (y < f.y0 || y > f.y1) {
        return;
    }
    out << "<line x1=\"" << f2(f.px(f.x0)) << "\" x2=\"" << f2(f.px(f.x1)) << "\" y1=\"" << f2(f.py(y)) << "\" y2=\""
        << f2(f.py(y)) << "\" stroke=\"" << color << "\" stroke-dasharray=\"" << dash << "\"/>\n";
}

inline void polyline(std::ostream &out, const Frame &f, const std::vector<double> &x, const std::vector<double> &y,
                     const char *color) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        const double yc = std::clamp(y[i], f.y0, f.y1);  // infinite zeta pinned to the frame edge
        out << f2(f.px(x[i])) << ',' << f2(f.py(yc)) << ' ';
    }
    out << "\"/>\n";
}

inline std::pair<double, double> finite_range(const std::vector<double> &v) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double x : v) {
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    if (!(lo <= hi)) {
        return {0.0, 1.0};
    }
    if (lo == hi) {
        return {lo - 1.0, hi + 1.0};
    }
    return {lo, hi};
}

}  // namespace detail

/// Observed second-digit frequencies of O (bars) against the Benford law (markers).
inline void render_benford_svg(std::ostream &out, const CsvTable &t) {
    const auto &obs = t.column("observed_freq");
    const auto &law = t.column("benford_freq");
    double ymax = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        ymax = std::max({ymax, obs[i], law[i]});
    }
    const detail::Frame f{-0.5, 9.5, 0.0, ymax * 1.15 + 1e-9};
    detail::open_svg(out, f, "Second digit of O", "digit", "frequency");
    for (std::size_t d = 0; d < obs.size(); ++d) {
        const double x = static_cast<double>(d);
        out << "<rect x=\"" << detail::f2(f.px(x - 0.35)) << "\" y=\"" << detail::f2(f.py(obs[d])) << "\" width=\""
            << detail::f2(f.px(x + 0.35) - f.px(x - 0.35)) << "\" height=\"" << detail::f2(f.py(0) - f.py(obs[d]))
            << "\" fill=\"#8fb3d9\"/>\n";
        out << "<circle cx=\"" << detail::f2(f.px(x)) << "\" cy=\"" << detail::f2(f.py(law[d]))
            << "\" r=\"4\" fill=\"#c0392b\"/>\n";
    }
    out << "</svg>\n";
}

/// Normal probability plot of Z with the identity line.
inline void render_qq_svg(std::ostream &out, const CsvTable &t) {
    const auto &x = t.column("expected_quantile");
    const auto &y = t.column("observed_z");
    auto [xl, xh] = detail::finite_range(x);
    auto [yl, yh] = detail::finite_range(y);
    const double lo = std::min(xl, yl);
    const double hi = std::max(xh, yh);
    const detail::Frame f{lo, hi, lo, hi};
    detail::open_svg(out, f, "Normal probability plot of Z", "expected normal quantile", "observed Z");
    out << "<line x1=\"" << detail::f2(f.px(lo)) << "\" y1=\"" << detail::f2(f.py(lo)) << "\" x2=\""
        << detail::f2(f.px(hi)) << "\" y2=\"" << detail::f2(f.py(hi)) << "\" stroke=\"#c0392b\"/>\n";
    // Thin the central body; keep every tail point.
    const std::size_t n = x.size();
    const std::size_t step = std::max<std::size_t>(1, n / 2000);
    for (std::size_t i = 0; i < n; ++i) {
        if (i % step != 0 && std::abs(y[i]) < 3.0) {
            continue;
        }
        out << "<circle cx=\"" << detail::f2(f.px(x[i])) << "\" cy=\"" << detail::f2(f.py(y[i]))
            << "\" r=\"1.6\" fill=\"#2c3e50\"/>\n";
    }
    out << "</svg>\n";
}

/// zeta_k against k with the 99% and 99.99% bands.
inline void render_zeta_svg(std::ostream &out, const CsvTable &t, double band_9999 = band_9999_half_width,
                            double band_99 = band_99_half_width) {
    const auto &k = t.column("k");
    const auto &z = t.column("zeta_k");
    auto [kl, kh] = detail::finite_range(k);
    auto [zl, zh] = detail::finite_range(z);
    const double span = std::max({std::abs(zl), std::abs(zh), band_9999 * 1.3});
    const detail::Frame f{kl, kh, -span, span};
    detail::open_svg(out, f, "zeta_k over the k most extreme stations", "k", "zeta_k");
    detail::hline(out, f, band_9999, "#c0392b");
    detail::hline(out, f, -band_9999, "#c0392b");
    detail::hline(out, f, band_99, "#e67e22", "2 3");
    detail::hline(out, f, -band_99, "#e67e22", "2 3");
    detail::hline(out, f, 0.0, "#999999", "1 0");
    detail::polyline(out, f, k, z, "#2c3e50");
    out << "</svg>\n";
}

/// rho_beta against beta with the dead-heat band.
inline void render_rho_svg(std::ostream &out, const CsvTable &t, const DeadHeatBand &band = {}) {
    const auto &b = t.column("beta");
    const auto &r = t.column("rho");
    auto [rl, rh] = detail::finite_range(r);
    const double lo = std::min(rl, band.low) - 0.02;
    const double hi = std::max(rh, band.high) + 0.02;
    const detail::Frame f{0.0, 1.0, lo, hi};
    detail::open_svg(out, f, "Counterfactual favorable share", "beta", "rho_beta");
    out << "<rect x=\"" << detail::f2(f.px(0.0)) << "\" y=\"" << detail::f2(f.py(band.high)) << "\" width=\""
        << detail::f2(f.px(1.0) - f.px(0.0)) << "\" height=\"" << detail::f2(f.py(band.low) - f.py(band.high))
        << "\" fill=\"#f5d76e\" fill-opacity=\"0.5\"/>\n";
    detail::hline(out, f, 0.5, "#999999");
    detail::polyline(out, f, b, r, "#2c3e50");
    out << "</svg>\n";
}

/// Renders every known CSV present in `csv_dir` into `svg_dir`; returns the files written.
inline std::vector<std::filesystem::path> render_directory(const std::filesystem::path &csv_dir,
                                                           const std::filesystem::path &svg_dir,
                                                           const std::string &prefix = {},
                                                           double band_9999 = band_9999_half_width,
                                                           double band_99 = band_99_half_width,
                                                           const DeadHeatBand &band = {}) {
    std::filesystem::create_directories(svg_dir);
    std::vector<std::filesystem::path> written;
    auto render = [&](const char *stem, auto &&fn) {
        const auto csv = csv_dir / (prefix + stem + ".csv");
        if (!std::filesystem::exists(csv)) {
            return;
        }
        const auto svg = svg_dir / (prefix + stem + ".svg");
        std::ofstream out(svg);
        if (!out) {
            throw forensics_error(ErrorKind::io_error, "cannot write '" + svg.string() + "'");
        }
        fn(out, read_csv(csv));
        written.push_back(svg);
    };
    render("benford", [](std::ostream &o, const CsvTable &t) { render_benford_svg(o, t); });
    render("qq", [](std::ostream &o, const CsvTable &t) { render_qq_svg(o, t); });
    render("zeta", [&](std::ostream &o, const CsvTable &t) { render_zeta_svg(o, t, band_9999, band_99); });
    render("rho", [&](std::ostream &o, const CsvTable &t) { render_rho_svg(o, t, band); });
    return written;
}

}  // namespace eforensics::plots
