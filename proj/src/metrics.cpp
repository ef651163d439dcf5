#include "wrd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace wrd {

PsnrValue psnr(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width || a.channels != b.channels)
        throw std::invalid_argument("psnr requires matching dimensions");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        se += d * d;
    }
    if (se == 0.0) return PsnrValue::inf();
    const double mse = se / static_cast<double>(a.data.size());
    return PsnrValue::finite(10.0 * std::log10(1.0 / mse));
}

RocCurve roc(const std::vector<ScoreRecord>& records) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const auto& r : records) (r.label ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc requires both classes");

    // group by distinct score, descending; each group is one curve point
    std::map<double, std::pair<int, int>, std::greater<double>> groups;  // score -> (pos, neg)
    for (const auto& r : records) {
        auto& g = groups[r.score];
        if (r.label) g.first++;
        else g.second++;
    }

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    for (const auto& [score, counts] : groups) {
        tp += counts.first;
        fp += counts.second;
        curve.points.push_back({static_cast<double>(fp) / n_neg,
                                static_cast<double>(tp) / n_pos, score});
    }
    // sweeping all distinct scores ends at (1,1)
    return curve;
}

double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& p0 = curve.points[i - 1];
        const auto& p1 = curve.points[i];
        area += (p1.fpr - p0.fpr) * (p1.tpr + p0.tpr) * 0.5;
    }
    return area;
}

OperatingPoint calibrate(const std::vector<double>& negative_scores, double target_fpr) {
    if (!(target_fpr > 0.0 && target_fpr < 1.0))
        throw std::invalid_argument("target_fpr must be in (0,1)");
    const int needed = static_cast<int>(std::ceil(1.0 / target_fpr));
    if (static_cast<int>(negative_scores.size()) < needed)
        throw std::invalid_argument("cannot certify FPR target: need at least " +
                                    std::to_string(needed) + " negatives, have " +
                                    std::to_string(negative_scores.size()));

    std::vector<double> candidates = negative_scores;
    candidates.push_back(0.5);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const double n = static_cast<double>(negative_scores.size());
    auto fpr_at = [&](double t) {
        std::size_t above = 0;
        for (double s : negative_scores)
            if (s > t) ++above;
        return static_cast<double>(above) / n;
    };

    OperatingPoint op;
    op.target_fpr = target_fpr;
    op.calibration_set_size = static_cast<int>(negative_scores.size());
    for (double t : candidates) {
        const double f = fpr_at(t);
        if (f <= target_fpr) {
            op.threshold = t;
            op.empirical_fpr = f;
            return op;
        }
    }
    // the largest observed score always qualifies; unreachable
    op.threshold = candidates.back();
    op.empirical_fpr = 0.0;
    return op;
}

double tpr_at_fpr(const std::vector<ScoreRecord>& records, double target_fpr) {
    std::vector<double> negatives;
    std::size_t n_pos = 0;
    for (const auto& r : records) {
        if (r.label) ++n_pos;
        else negatives.push_back(r.score);
    }
    if (n_pos == 0 || negatives.empty())
        throw std::invalid_argument("tpr_at_fpr requires both classes");
    const OperatingPoint op = calibrate(negatives, target_fpr);
    std::size_t tp = 0;
    for (const auto& r : records)
        if (r.label && r.score > op.threshold) ++tp;
    return static_cast<double>(tp) / n_pos;
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("unwritable path: " + path);
    out << "fpr,tpr,threshold\n";
    char buf[128];
    for (const auto& p : curve.points) {
        if (std::isinf(p.threshold)) {
            std::snprintf(buf, sizeof buf, "%.9f,%.9f,inf\n", p.fpr, p.tpr);
        } else {
            std::snprintf(buf, sizeof buf, "%.9f,%.9f,%.9f\n", p.fpr, p.tpr, p.threshold);
        }
        out << buf;
    }
}

std::string operating_point_to_json(const OperatingPoint& op) {
    nlohmann::ordered_json j;
    j["target_fpr"] = op.target_fpr;
    j["threshold"] = op.threshold;
    j["empirical_fpr"] = op.empirical_fpr;
    j["calibration_set_size"] = op.calibration_set_size;
    return j.dump();
}

OperatingPoint operating_point_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    OperatingPoint op;
    op.target_fpr = j.at("target_fpr").get<double>();
    op.threshold = j.at("threshold").get<double>();
    op.empirical_fpr = j.at("empirical_fpr").get<double>();
    op.calibration_set_size = j.at("calibration_set_size").get<int>();
    return op;
}

void save_operating_point(const OperatingPoint& op, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("unwritable path: " + path);
    out << operating_point_to_json(op) << "\n";
}

OperatingPoint load_operating_point(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return operating_point_from_json(text);
}

namespace {

// maps fpr (log scale over [1e-4, 1]) and tpr to plot coordinates
constexpr double kPlotW = 640.0, kPlotH = 480.0;
constexpr double kMarginL = 70.0, kMarginR = 20.0, kMarginT = 20.0, kMarginB = 50.0;

double plot_x(double fpr) {
    const double clamped = std::clamp(fpr, 1e-4, 1.0);
    const double t = (std::log10(clamped) + 4.0) / 4.0;
    return kMarginL + t * (kPlotW - kMarginL - kMarginR);
}
double plot_y(double tpr) {
    return kPlotH - kMarginB - std::clamp(tpr, 0.0, 1.0) * (kPlotH - kMarginT - kMarginB);
}

const char* kCurveColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                              "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

void write_roc_svg(const std::vector<NamedCurve>& curves, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("unwritable path: " + path);
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotW
        << "\" height=\"" << kPlotH << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // grid: FPR decades and TPR fifths
    for (int d = -4; d <= 0; ++d) {
        const double x = plot_x(std::pow(10.0, d));
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#cccccc\"/>\n",
                      x, kMarginT, x, kPlotH - kMarginB);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">1e%d</text>\n",
                      x, kPlotH - kMarginB + 18.0, d);
        out << buf;
    }
    for (int i = 0; i <= 5; ++i) {
        const double tpr = i / 5.0;
        const double y = plot_y(tpr);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#cccccc\"/>\n",
                      kMarginL, y, kPlotW - kMarginR, y);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"end\">%.1f</text>\n",
                      kMarginL - 6.0, y + 4.0, tpr);
        out << buf;
    }
    out << "<text x=\"" << (kMarginL + (kPlotW - kMarginL - kMarginR) / 2)
        << "\" y=\"" << (kPlotH - 10.0)
        << "\" font-size=\"13\" text-anchor=\"middle\">false positive rate (log)</text>\n";

    int color_idx = 0;
    double legend_y = kMarginT + 14.0;
    for (const auto& nc : curves) {
        const char* color = kCurveColors[color_idx % 8];
        ++color_idx;
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : nc.curve.points) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", plot_x(p.fpr), plot_y(p.tpr));
            out << buf;
        }
        out << "\"/>\n";
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                      kMarginL + 10.0, legend_y, color, nc.name.c_str());
        out << buf;
        legend_y += 14.0;
    }
    out << "</svg>\n";
}

}  // namespace wrd
