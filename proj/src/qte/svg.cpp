#include "qte/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "qte/common.hpp"

namespace qte::svg {

namespace {

constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 32.0;
constexpr double kMarginBottom = 48.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(lo < hi)) {
            lo -= 1.0;
            hi += 1.0;
        } else {
            const double m = 0.05 * (hi - lo);
            lo -= m;
            hi += m;
        }
    }
};

std::vector<double> ticks(const Range& r, int target = 5) {
    const double span = r.hi - r.lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double k : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * k >= raw) {
            step = mag * k;
            break;
        }
    }
    std::vector<double> out;
    for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-12 * span; t += step)
        out.push_back(t);
    return out;
}

class Canvas {
public:
    Canvas(const PlotOptions& opts, Range xr, Range yr)
        : opts_(opts), xr_(xr), yr_(yr) {
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                 std::to_string(opts.width) + "\" height=\"" + std::to_string(opts.height) +
                 "\" viewBox=\"0 0 " + std::to_string(opts.width) + " " +
                 std::to_string(opts.height) + "\">\n";
        body_ += "<!-- qte plot -->\n";
        body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    double px(double x) const {
        const double w = opts_.width - kMarginLeft - kMarginRight;
        return kMarginLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * w;
    }
    double py(double y) const {
        const double h = opts_.height - kMarginTop - kMarginBottom;
        return kMarginTop + (yr_.hi - y) / (yr_.hi - yr_.lo) * h;
    }

    void axes() {
        const double x0 = kMarginLeft, x1 = opts_.width - kMarginRight;
        const double y0 = opts_.height - kMarginBottom, y1 = kMarginTop;
        line(x0, y0, x1, y0, "black");
        line(x0, y0, x0, y1, "black");
        for (double t : ticks(xr_)) {
            const double x = px(t);
            line(x, y0, x, y0 + 4, "black");
            text(x, y0 + 18, opts_.log_x ? "1e" + fmt(t) : fmt(t), "middle");
        }
        for (double t : ticks(yr_)) {
            const double y = py(t);
            line(x0 - 4, y, x0, y, "black");
            text(x0 - 8, y + 4, fmt(t), "end");
        }
        if (!opts_.title.empty())
            text(opts_.width / 2.0, kMarginTop - 10, opts_.title, "middle");
        if (!opts_.x_label.empty())
            text((x0 + x1) / 2.0, opts_.height - 10, opts_.x_label, "middle");
        if (!opts_.y_label.empty())
            body_ += "<text x=\"14\" y=\"" + fmt((y0 + y1) / 2.0) +
                     "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " +
                     fmt((y0 + y1) / 2.0) + ")\">" + opts_.y_label + "</text>\n";
    }

    void line(double x0, double y0, double x1, double y1, const std::string& color) {
        body_ += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x1) +
                 "\" y2=\"" + fmt(y1) + "\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
    }

    void text(double x, double y, const std::string& s, const std::string& anchor) {
        body_ += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" text-anchor=\"" + anchor +
                 "\" font-size=\"12\">" + s + "</text>\n";
    }

    void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& color, bool dashed) {
        body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"";
        if (dashed) body_ += " stroke-dasharray=\"6 4\"";
        body_ += " points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) body_ += ' ';
            body_ += fmt(px(xs[i])) + "," + fmt(py(ys[i]));
        }
        body_ += "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& color) {
        body_ += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) +
                 "\" height=\"" + fmt(h) + "\" fill=\"" + color +
                 "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    }

    void legend(const std::vector<Series>& series) {
        double y = kMarginTop + 14;
        for (const auto& s : series) {
            if (s.label.empty()) continue;
            const double x = kMarginLeft + 12;
            line(x, y - 4, x + 24, y - 4, s.color);
            text(x + 30, y, s.label, "start");
            y += 16;
        }
    }

    std::string finish() {
        body_ += "</svg>\n";
        return body_;
    }

private:
    PlotOptions opts_;
    Range xr_, yr_;
    std::string body_;
};

}  // namespace

std::string line_plot(const std::vector<Series>& series, const PlotOptions& opts) {
    Range xr, yr;
    std::vector<Series> drawn = series;
    for (auto& s : drawn) {
        if (opts.log_x)
            for (double& x : s.x) x = std::log10(std::max(x, 1e-300));
        for (double x : s.x) xr.include(x);
        for (double y : s.y) yr.include(y);
    }
    xr.pad();
    yr.pad();
    Canvas canvas(opts, xr, yr);
    canvas.axes();
    for (const auto& s : drawn) canvas.polyline(s.x, s.y, s.color, s.dashed);
    canvas.legend(drawn);
    return canvas.finish();
}

std::string histogram(const std::vector<double>& values, std::size_t bins,
                      const PlotOptions& opts) {
    require(!values.empty(), "histogram needs values");
    require(bins >= 1, "histogram needs at least one bin");
    Range vr;
    for (double v : values) vr.include(v);
    if (!(vr.lo < vr.hi)) {
        vr.lo -= 0.5;
        vr.hi += 0.5;
    }
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - vr.lo) / (vr.hi - vr.lo) * bins);
        if (b >= bins) b = bins - 1;
        counts[b]++;
    }
    Range xr = vr, yr;
    yr.include(0.0);
    for (std::size_t c : counts) yr.include(static_cast<double>(c));
    xr.pad();
    yr.pad();
    Canvas canvas(opts, xr, yr);
    canvas.axes();
    const double width = (vr.hi - vr.lo) / bins;
    for (std::size_t b = 0; b < bins; ++b) {
        const double x0 = canvas.px(vr.lo + b * width);
        const double x1 = canvas.px(vr.lo + (b + 1) * width);
        const double y0 = canvas.py(static_cast<double>(counts[b]));
        const double y1 = canvas.py(0.0);
        canvas.rect(x0, y0, x1 - x0, y1 - y0, "#6baed6");
    }
    return canvas.finish();
}

}  // namespace qte::svg
