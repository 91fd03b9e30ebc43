#include "radar/plot.hpp"

#include "radar/error.hpp"
#include "radar/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace radar::plot {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr std::size_t kColourCount = sizeof(kColours) / sizeof(kColours[0]);

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

Range padded(double lo, double hi) {
    if (hi - lo <= 0.0) {
        const double pad = std::max(std::abs(lo) * 0.1, 0.5);
        return {lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

// Marker shapes cycle independently of colours so series stay distinct in greyscale.
void marker(std::ostringstream& out, std::size_t kind, double x, double y, const char* colour) {
    const std::string px = format_short(x);
    const std::string py = format_short(y);
    switch (kind % 4) {
        case 0:
            out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"4\" fill=\"" << colour << "\"/>\n";
            break;
        case 1:
            out << "<rect x=\"" << format_short(x - 4) << "\" y=\"" << format_short(y - 4)
                << "\" width=\"8\" height=\"8\" fill=\"" << colour << "\"/>\n";
            break;
        case 2:
            out << "<polygon points=\"" << px << ',' << format_short(y - 5) << ' ' << format_short(x - 5) << ','
                << format_short(y + 4) << ' ' << format_short(x + 5) << ',' << format_short(y + 4) << "\" fill=\""
                << colour << "\"/>\n";
            break;
        default:
            out << "<polygon points=\"" << px << ',' << format_short(y - 5) << ' ' << format_short(x + 5) << ','
                << py << ' ' << px << ',' << format_short(y + 5) << ' ' << format_short(x - 5) << ',' << py
                << "\" fill=\"" << colour << "\"/>\n";
    }
}

}  // namespace

RenderedPlot render_svg(std::span<const Series> series, const AxesSpec& axes) {
    if (series.empty()) {
        throw DomainError("plot needs at least one series");
    }

    // Transform into plotted coordinates.
    std::vector<std::vector<scaling::Point>> plotted;
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& s : series) {
        if (s.points.empty()) {
            throw DomainError("plot series '" + s.label + "' has no points");
        }
        auto& pts = plotted.emplace_back();
        for (const auto& p : s.points) {
            if ((axes.log_x && !(p.x > 0.0)) || (axes.log_y && !(p.y > 0.0))) {
                throw DomainError("non-positive coordinate on a logarithmic axis in series '" + s.label + "'");
            }
            const scaling::Point q{axes.log_x ? std::log10(p.x) : p.x, axes.log_y ? std::log10(p.y) : p.y};
            x_lo = std::min(x_lo, q.x);
            x_hi = std::max(x_hi, q.x);
            y_lo = std::min(y_lo, q.y);
            y_hi = std::max(y_hi, q.y);
            pts.push_back(q);
        }
    }
    const Range xr = padded(x_lo, x_hi);
    const Range yr = padded(y_lo, y_hi);
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    const auto sy = [&](double y) { return kTop + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << escape(axes.title) << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Ticks at the range ends and midpoint, labelled in data units.
    for (int i = 0; i <= 2; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / 2.0;
        const double fy = yr.lo + (yr.hi - yr.lo) * i / 2.0;
        out << "<text x=\"" << format_short(sx(fx)) << "\" y=\"" << format_short(kTop + plot_h + 18)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << format_short(axes.log_x ? std::pow(10.0, fx) : fx)
            << "</text>\n";
        out << "<text x=\"" << format_short(kLeft - 6) << "\" y=\"" << format_short(sy(fy) + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << format_short(axes.log_y ? std::pow(10.0, fy) : fy)
            << "</text>\n";
    }
    const std::string x_label = axes.x_label + (axes.log_x ? " (log)" : "");
    const std::string y_label = axes.y_label + (axes.log_y ? " (log)" : "");
    out << "<text x=\"" << format_short(kLeft + plot_w / 2) << "\" y=\"" << format_short(kHeight - 16)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << format_short(kTop + plot_h / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
        << "transform=\"rotate(-90 16 " << format_short(kTop + plot_h / 2) << ")\">" << escape(y_label)
        << "</text>\n";

    RenderedPlot rendered;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* colour = kColours[i % kColourCount];
        const auto& pts = plotted[i];
        std::optional<scaling::RegressionResult> fit;
        if (series[i].fit_line && pts.size() >= 3) {
            try {
                fit = scaling::linear_fit(pts);
            } catch (const DegenerateFitError&) {
                fit.reset();
            }
        }
        if (fit) {
            const double y0 = fit->intercept + fit->slope * x_lo;
            const double y1 = fit->intercept + fit->slope * x_hi;
            out << "<line x1=\"" << format_short(sx(x_lo)) << "\" y1=\"" << format_short(sy(y0)) << "\" x2=\""
                << format_short(sx(x_hi)) << "\" y2=\"" << format_short(sy(y1)) << "\" stroke=\"" << colour
                << "\" stroke-dasharray=\"6 3\"/>\n";
        }
        for (const auto& p : pts) {
            marker(out, i, sx(p.x), sy(p.y), colour);
        }
        rendered.fits.push_back(fit);
    }

    // Legend with marker, label and fitted slope.
    const bool legend = series.size() > 1 ||
                        std::any_of(rendered.fits.begin(), rendered.fits.end(), [](const auto& f) { return f.has_value(); });
    if (legend) {
        for (std::size_t i = 0; i < series.size(); ++i) {
            const double ly = kTop + 16 + 18.0 * static_cast<double>(i);
            marker(out, i, kLeft + 14, ly - 4, kColours[i % kColourCount]);
            std::string text = series[i].label;
            if (rendered.fits[i]) {
                text += "  slope = " + format_short(rendered.fits[i]->slope);
            }
            out << "<text x=\"" << format_short(kLeft + 26) << "\" y=\"" << format_short(ly)
                << "\" font-size=\"12\">" << escape(text) << "</text>\n";
        }
    }
    out << "</svg>\n";
    rendered.svg = out.str();
    return rendered;
}

RenderedPlot emit_plot(std::span<const Series> series, const AxesSpec& axes, const std::filesystem::path& path) {
    auto rendered = render_svg(series, axes);
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    file << rendered.svg;
    if (!file) {
        throw IoError("failed writing " + path.string());
    }
    return rendered;
}

}  // namespace radar::plot
