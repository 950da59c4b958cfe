#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "msgm/experiments.hpp"

namespace msgm::experiments {

namespace {

constexpr const char* kMultiColor = "#2ca02c";
constexpr const char* kSingleColor = "#ff7f0e";

struct Frame {
    double left, right, top, bottom;
};

class Scale {
public:
    Scale(double lo, double hi, double out_lo, double out_hi, bool log)
        : log_(log), lo_(tr(lo)), hi_(tr(hi)), out_lo_(out_lo), out_hi_(out_hi) {
        if (hi_ == lo_) {
            lo_ -= 0.5;
            hi_ += 0.5;
        }
    }
    [[nodiscard]] double operator()(double v) const {
        return out_lo_ + (tr(v) - lo_) / (hi_ - lo_) * (out_hi_ - out_lo_);
    }

private:
    [[nodiscard]] double tr(double v) const { return log_ ? std::log10(v) : v; }
    bool log_;
    double lo_, hi_, out_lo_, out_hi_;
};

std::string points(const std::vector<const SweepRow*>& rows, const Scale& sx, const Scale& sy, bool theory) {
    std::string s;
    for (const auto* r : rows) {
        if (!s.empty()) s += ' ';
        s += fmt::format("{:.2f},{:.2f}", sx(r->axis_value), sy(theory ? *r->theory_bound : r->mean_tv));
    }
    return s;
}

}  // namespace

std::string format_svg(const std::vector<SweepRow>& rows, const SvgStyle& style) {
    if (rows.empty()) throw std::invalid_argument("cannot plot an empty sweep");
    const std::string axis = rows.front().axis;
    for (const auto& r : rows) {
        if (r.axis != axis) throw std::invalid_argument("rows come from more than one sweep");
    }
    Estimator est = rows.front().estimator;
    const bool has_mc = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.estimator == Estimator::monte_carlo; });
    if (style.estimator) {
        est = *style.estimator;
    } else if (has_mc) {
        est = Estimator::monte_carlo;
    }

    std::vector<const SweepRow*> multi, single;
    for (const auto& r : rows) {
        if (r.estimator != est) continue;
        (r.strategy == bounds::Strategy::multi ? multi : single).push_back(&r);
    }
    if (multi.empty() && single.empty()) throw std::invalid_argument("no rows for the requested estimator");
    auto by_axis = [](const SweepRow* a, const SweepRow* b) { return a->axis_value < b->axis_value; };
    std::sort(multi.begin(), multi.end(), by_axis);
    std::sort(single.begin(), single.end(), by_axis);

    const bool log_x = axis == "n" || axis == "K";
    double x_lo = INFINITY, x_hi = -INFINITY, y_hi = 0.0, t_hi = 0.0;
    bool theory = true;
    for (const auto* group : {&multi, &single}) {
        for (const auto* r : *group) {
            x_lo = std::min(x_lo, r->axis_value);
            x_hi = std::max(x_hi, r->axis_value);
            y_hi = std::max(y_hi, r->mean_tv);
            if (r->theory_bound) {
                t_hi = std::max(t_hi, *r->theory_bound);
            } else {
                theory = false;
            }
        }
    }
    if (log_x && x_lo <= 0.0) throw std::invalid_argument("log axis needs positive values");
    y_hi = y_hi > 0.0 ? y_hi * 1.1 : 1.0;
    t_hi = t_hi > 0.0 ? t_hi * 1.1 : 1.0;

    const double W = style.width, H = style.height;
    const Frame fr{70.0, W - 80.0, 40.0, H - 60.0};
    const Scale sx(x_lo, x_hi, fr.left, fr.right, log_x);
    const Scale sy(0.0, y_hi, fr.bottom, fr.top, false);
    const Scale st(0.0, t_hi, fr.bottom, fr.top, false);

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
        style.width, style.height);
    const std::string title = style.title.empty() ? "Average TV error vs " + axis : style.title;
    svg += fmt::format("<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n",
                       W / 2.0, title);
    svg += fmt::format(
        "<g stroke=\"black\" stroke-width=\"1\">\n"
        "<line x1=\"{0:.1f}\" y1=\"{3:.1f}\" x2=\"{1:.1f}\" y2=\"{3:.1f}\"/>\n"
        "<line x1=\"{0:.1f}\" y1=\"{2:.1f}\" x2=\"{0:.1f}\" y2=\"{3:.1f}\"/>\n",
        fr.left, fr.right, fr.top, fr.bottom);
    if (theory) svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\"/>\n", fr.right, fr.top, fr.bottom);
    svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    std::vector<double> xs;
    for (const auto* group : {&multi, &single}) {
        for (const auto* r : *group) xs.push_back(r->axis_value);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double v : xs) {
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:g}</text>\n", sx(v), fr.bottom + 16.0, v);
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = y_hi * i / 4.0;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", fr.left - 6.0, sy(v) + 4.0, v);
        if (theory) {
            const double t = t_hi * i / 4.0;
            svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"start\">{:.3g}</text>\n", fr.right + 6.0, st(t) + 4.0, t);
        }
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"13\">{}{}</text>\n",
                       (fr.left + fr.right) / 2.0, H - 18.0, axis, log_x ? " (log scale)" : "");
    svg += fmt::format(
        "<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 {0:.1f})\">"
        "empirical TV ({1})</text>\n",
        (fr.top + fr.bottom) / 2.0, to_string(est));
    if (theory) {
        svg += fmt::format(
            "<text x=\"{0:.1f}\" y=\"{1:.1f}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(90 {0:.1f} {1:.1f})\">"
            "theoretical bound</text>\n",
            W - 18.0, (fr.top + fr.bottom) / 2.0);
    }
    svg += "</g>\n";

    auto line = [&](const std::vector<const SweepRow*>& g, const char* color, bool dashed) {
        if (g.empty()) return;
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"/>\n", color,
                           dashed ? " stroke-dasharray=\"6,4\"" : "", points(g, sx, dashed ? st : sy, dashed));
    };
    line(multi, kMultiColor, false);
    line(single, kSingleColor, false);
    if (theory) {
        line(multi, kMultiColor, true);
        line(single, kSingleColor, true);
    }

    struct Entry {
        const char* label;
        const char* color;
        bool dashed;
    };
    std::vector<Entry> legend{{"multi-source", kMultiColor, false}, {"single-source", kSingleColor, false}};
    if (theory) {
        legend.push_back({"multi-source bound", kMultiColor, true});
        legend.push_back({"single-source bound", kSingleColor, true});
    }
    svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t i = 0; i < legend.size(); ++i) {
        const double y = fr.top + 12.0 + 16.0 * static_cast<double>(i);
        svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" stroke-width=\"2\"{}/>\n",
                           fr.left + 10.0, y, fr.left + 34.0, y, legend[i].color,
                           legend[i].dashed ? " stroke-dasharray=\"6,4\"" : "");
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", fr.left + 40.0, y + 4.0, legend[i].label);
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

void emit_svg(const std::vector<SweepRow>& rows, const std::filesystem::path& path, const SvgStyle& style) {
    const std::string svg = format_svg(rows, style);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << svg;
    if (!out.flush()) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace msgm::experiments
