#include "wrd/verify.hpp"

#include <stdexcept>

#include <json.hpp>

namespace wrd {

const char* to_string(VerdictOutcome outcome) {
    switch (outcome) {
        case VerdictOutcome::Watermarked: return "Watermarked";
        case VerdictOutcome::Clean: return "Clean";
        case VerdictOutcome::RemovalDetected: return "RemovalDetected";
    }
    return "Clean";
}

std::string Verdict::to_json() const {
    nlohmann::ordered_json j;
    j["outcome"] = to_string(outcome);
    j["rho"] = rho.value;
    j["bit_accuracy"] = rho.bit_accuracy;
    j["score"] = detector_score;
    j["threshold"] = operating_point.threshold;
    return j.dump();
}

Verdict verify(const Image& img, const WatermarkKey& key, const BitMessage& expected_message,
               const DetectorModel& model, const OperatingPoint& op, double wm_threshold) {
    if (img.height != key.height || img.width != key.width)
        throw std::invalid_argument("image dimensions do not match key");
    if (op.calibration_set_size < 1 || !(op.target_fpr > 0.0 && op.target_fpr < 1.0))
        throw std::invalid_argument("uncalibrated operating point");
    if (!(wm_threshold > 0.0 && wm_threshold < 1.0))
        throw std::invalid_argument("wm_threshold must be in (0,1)");

    Verdict verdict;
    verdict.operating_point = op;

    const BitMessage decoded = decode(img, key);
    verdict.rho = rho_value(key.n_bits, bit_accuracy(expected_message, decoded));
    verdict.detector_score = score(model, extract_features(img));

    if (verdict.rho.value <= wm_threshold) {
        // watermark check wins; the forensic score above is recorded only
        verdict.outcome = VerdictOutcome::Watermarked;
    } else if (verdict.detector_score > op.threshold) {
        verdict.outcome = VerdictOutcome::RemovalDetected;
    } else {
        verdict.outcome = VerdictOutcome::Clean;
    }
    return verdict;
}

}  // namespace wrd
