#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wrd/attacks.hpp"
#include "wrd/features.hpp"
#include "wrd/image.hpp"

namespace wrd {

/// Optimizer shape for the logistic removal detector: mini-batch gradient
/// descent on BCE + weight_decay*||w||^2/2 under a cosine schedule with
/// linear warmup.
struct TrainConfig {
    int epochs = 8;
    int batch_size = 256;
    double base_lr = 0.05;
    double weight_decay = 2.5e-3;
    int warmup_epochs = 1;
    std::uint64_t seed = 0;
    double augment_probability = 0.2;

    std::string digest() const;
};

/// Linear logit over z-scored features with a sigmoid score. Zero-variance
/// feature dimensions get std 1 and keep weight 0.
struct DetectorModel {
    std::vector<double> weights;       // kFeatureCount
    double bias = 0.0;
    std::vector<double> feature_mean;  // kFeatureCount
    std::vector<double> feature_std;   // kFeatureCount, strictly positive
    std::string train_config_digest;
};

struct TrainRecord {
    FeatureVector features;
    bool label = false;  // true = attacked
};

/// Training-time augmentation draw: with probability augment_probability
/// picks exactly one of jpeg_like (quality U{60..100}), gaussian_blur
/// (radius U[0.5,2.0]), resize_cycle (scale U[0.5,1.2]), gaussian_noise
/// (sigma U[0.01,0.08]); nullopt otherwise. Deterministic per seed. The
/// second member is the attack seed to apply it with.
std::optional<std::pair<AttackSpec, std::uint64_t>> augment_choice(std::uint64_t rng_seed,
                                                                   double probability = 0.2);

/// Applies augment_choice to the image.
Image augment(const Image& img, std::uint64_t rng_seed, double probability = 0.2);

/// Deterministic for a fixed (record order, config.seed); requires both
/// labels and at least two records.
DetectorModel train(const std::vector<TrainRecord>& records, const TrainConfig& config);

/// sigmoid(w . zscore(fv) + b), clamped to the open interval (0, 1).
double score(const DetectorModel& model, const FeatureVector& fv);

/// Dataset-mean binary cross-entropy of the model on records.
double bce_loss(const DetectorModel& model, const std::vector<TrainRecord>& records);

std::string model_to_json(const DetectorModel& model);
DetectorModel model_from_json(const std::string& text);
void save_model(const DetectorModel& model, const std::string& path);
DetectorModel load_model(const std::string& path);

/// Feature CSV: image_id,label,<23 named columns>.
void write_feature_csv(const std::vector<std::string>& ids, const std::vector<TrainRecord>& records,
                       const std::string& path);
std::vector<TrainRecord> read_feature_csv(const std::string& path,
                                          std::vector<std::string>* ids = nullptr);

}  // namespace wrd
