#pragma once

#include <string>
#include <vector>

#include "wrd/image.hpp"

namespace wrd {

/// PSNR with an explicit marker for the identical-image case; never a
/// sentinel number.
struct PsnrValue {
    bool infinite = false;
    double db = 0.0;

    static PsnrValue inf() { return {true, 0.0}; }
    static PsnrValue finite(double db) { return {false, db}; }
};

PsnrValue psnr(const Image& a, const Image& b);

/// One scored image for the forensic detector. label true = attacked
/// (positive), false = pristine (negative).
struct ScoreRecord {
    std::string image_id;
    bool label = false;
    double score = 0.0;
    std::string watermarker = "none";
    std::string attack = "none";
    std::string transform = "none";
};

/// (fpr, tpr) pairs, non-decreasing, anchored at (0,0) and (1,1). Built with
/// the strict "positive iff score > threshold" rule; tie groups produce
/// diagonal segments.
struct RocCurve {
    struct Point {
        double fpr;
        double tpr;
        double threshold;  // smallest score counted positive at this point
    };
    std::vector<Point> points;
};

/// Decision threshold calibrated on held-out negatives for a target FPR.
struct OperatingPoint {
    double target_fpr = 0.0;
    double threshold = 0.5;
    double empirical_fpr = 0.0;
    int calibration_set_size = 0;
};

RocCurve roc(const std::vector<ScoreRecord>& records);
double auc(const RocCurve& curve);

/// Smallest threshold from {observed negative scores} union {0.5} whose
/// empirical FPR is <= target_fpr. Requires at least ceil(1/target_fpr)
/// negatives ("cannot certify FPR target" otherwise).
OperatingPoint calibrate(const std::vector<double>& negative_scores, double target_fpr);

/// TPR at the threshold calibrate() picks from the negatives in records.
double tpr_at_fpr(const std::vector<ScoreRecord>& records, double target_fpr);

// --- export formats ---

void write_roc_csv(const RocCurve& curve, const std::string& path);
std::string operating_point_to_json(const OperatingPoint& op);
OperatingPoint operating_point_from_json(const std::string& text);
void save_operating_point(const OperatingPoint& op, const std::string& path);
OperatingPoint load_operating_point(const std::string& path);

/// ROC plot with a log-scale FPR axis fixed to [1e-4, 1], TPR in [0,1].
struct NamedCurve {
    std::string name;
    RocCurve curve;
};
void write_roc_svg(const std::vector<NamedCurve>& curves, const std::string& path);

}  // namespace wrd
