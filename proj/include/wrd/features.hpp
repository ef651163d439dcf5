#pragma once

#include <array>
#include <string>

#include "wrd/image.hpp"

namespace wrd {

/// Handcrafted forensic feature vector for the removal detector.
/// Order: 16 radial log-power-spectrum bins (equal-width annuli to Nyquist,
/// mean log-magnitude each, DC excluded), hf_energy_fraction,
/// noise_sigma_estimate, blockiness, median_residual_variance,
/// median_residual_kurtosis (excess), luminance_variance, luminance_entropy
/// (256-bin, bits).
inline constexpr int kFeatureCount = 23;

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
};

/// Names in the fixed feature order (CSV column names).
const std::array<std::string, kFeatureCount>& feature_names();

/// Deterministic extraction; requires images of at least 64x64. Degenerate
/// inputs follow explicit conventions: constant images yield zero radial
/// bins, noise estimate 0 and blockiness 1, so nothing downstream sees NaNs.
FeatureVector extract_features(const Image& img);

}  // namespace wrd
