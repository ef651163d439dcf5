#pragma once

#include <string>

#include "wrd/detector.hpp"
#include "wrd/image.hpp"
#include "wrd/metrics.hpp"
#include "wrd/stats.hpp"
#include "wrd/watermark.hpp"

namespace wrd {

enum class VerdictOutcome { Watermarked, Clean, RemovalDetected };

const char* to_string(VerdictOutcome outcome);

/// Result of the two-check verification. The forensic score is recorded even
/// when the watermark check already decided the outcome (audit trail).
struct Verdict {
    VerdictOutcome outcome = VerdictOutcome::Clean;
    RhoValue rho;
    double detector_score = 0.0;
    OperatingPoint operating_point;

    std::string to_json() const;  // single-line JSON for the CLI
};

/// Sequential checks per the threat model: the watermark check runs first and
/// wins whenever rho <= wm_threshold; only then the forensic check decides
/// between RemovalDetected and Clean.
Verdict verify(const Image& img, const WatermarkKey& key, const BitMessage& expected_message,
               const DetectorModel& model, const OperatingPoint& op, double wm_threshold = 1e-6);

}  // namespace wrd
