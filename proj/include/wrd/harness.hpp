#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wrd/attacks.hpp"
#include "wrd/detector.hpp"
#include "wrd/image.hpp"
#include "wrd/metrics.hpp"

namespace wrd {

/// One watermarking scheme instance used by a dataset.
struct WatermarkerConfig {
    std::string name = "ss64";
    std::uint64_t seed = 11;
    int n_bits = 64;
    int chips_per_bit = 128;
    double target_psnr = 40.0;
};

/// Synthetic cover source; kinds cycle per image id.
struct SynthSource {
    int count = 100;
    int height = 256;
    int width = 256;
    int channels = 3;
    std::vector<SynthKind> kinds = {SynthKind::Texture, SynthKind::Gradient, SynthKind::Shapes};
};

/// Either a directory of cover images or a synthetic spec.
struct DatasetSource {
    std::string directory;  // non-empty wins over synth
    SynthSource synth;
};

struct ManifestEntry {
    std::string image_id;
    std::string entry_id;     // image_id|watermarker|attack
    std::string split;        // train / val / test
    std::string variant;      // original / watermarked / attacked
    std::string watermarker = "none";
    std::string attack = "none";
    std::string message;      // payload hex, empty for originals
    std::string path;         // relative to the dataset root
    bool psnr_infinite = true;
    double psnr_vs_original = 0.0;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

/// A dataset on disk: manifest.jsonl + dataset.json (build configuration)
/// + images/.
struct Dataset {
    std::string root;
    DatasetManifest manifest;
    std::vector<WatermarkerConfig> watermarkers;
    std::vector<AttackSpec> attacks;
    std::uint64_t seed = 0;
};

/// Hash-based 70/10/20 split; a pure function of the image id, so every
/// variant of one id lands in the same split and ids never leak across
/// splits.
std::string split_for_id(const std::string& image_id);

/// Builds original/watermarked/attacked variants for every cover, writes
/// images + manifest.jsonl + dataset.json under out_dir and returns the
/// dataset. Requires at least 20 covers, one watermarker and one attack.
Dataset build_dataset(const DatasetSource& source,
                      const std::vector<WatermarkerConfig>& watermarkers,
                      const std::vector<AttackSpec>& attacks, std::uint64_t seed,
                      const std::string& out_dir, int jobs = 1);

void save_dataset(const Dataset& dataset);
Dataset load_dataset(const std::string& root);

/// Per-entry detector scores. An optional transform is applied before
/// feature extraction (robustness sweep); train-time augmentation is not
/// applied here.
std::vector<ScoreRecord> score_entries(const Dataset& dataset, const DetectorModel& model,
                                       const std::string& split_filter = "",
                                       const std::optional<AttackSpec>& transform = std::nullopt,
                                       int jobs = 1);

/// Trains the removal detector on the given splits with the training-time
/// augmentation pipeline (probability from config).
DetectorModel train_detector(const Dataset& dataset, const TrainConfig& config,
                             const std::vector<std::string>& splits = {"train"}, int jobs = 1,
                             const std::vector<std::string>& exclude_attacks = {});

// --- report data ---

struct QualityRow {
    std::string watermarker;
    std::string variant;  // "watermarked" or attack string
    int n = 0;
    double psnr_mean = 0.0;
    double psnr_std = 0.0;
    std::optional<double> lpips_mean;  // ingested, never computed
    std::optional<double> fid;         // ingested, never computed
    bool low_n = false;
};

struct SurvivalRow {
    std::string watermarker;
    std::string attack;  // "none" for the unattacked watermarked row
    int n = 0;
    double psnr_mean = 0.0;
    double bit_acc_mean = 0.0;
    double asr = 0.0;
    bool low_n = false;
};

struct TprCell {
    double target_fpr = 0.0;
    bool certified = false;  // false when the calibration pool is too small
    double tpr = 0.0;
    double threshold = 0.0;
};

struct DetectionRow {
    std::string watermarker;
    std::string attack;
    int n_pos = 0;
    int n_neg = 0;
    double auc_value = 0.0;
    std::vector<TprCell> tpr;
    bool low_n = false;
};

struct RobustnessRow {
    std::string transform;  // "none" or spec string
    int n_pos = 0;
    int n_neg = 0;
    double auc_value = 0.0;
    RocCurve curve;
};

struct LooRow {
    std::string held_out_attack;
    double seen_auc = 0.0;
    double held_out_auc = 0.0;
    double gap = 0.0;
};

struct ExperimentReport {
    std::string config_digest;
    std::uint64_t seed = 0;
    std::vector<QualityRow> quality;
    std::vector<SurvivalRow> survival;
    std::vector<DetectionRow> detection;
    std::vector<RobustnessRow> robustness;
    std::vector<LooRow> loo;
    double overall_test_auc = 0.0;  // all test positives vs all test negatives
};

/// Externally computed perceptual metrics (see quality table); the toolkit
/// never computes these itself.
struct ExternalQuality {
    std::map<std::string, double> lpips_by_entry;               // entry_id -> LPIPS
    std::map<std::string, double> fid_by_cell;                  // "wm|attack" -> FID
};

struct BenchOptions {
    TrainConfig train;
    std::vector<double> fpr_targets = {1e-2, 1e-3};
    int jobs = 1;
    /// When set, this model scores the entries instead of training a fresh
    /// one on the train split.
    std::optional<DetectorModel> model;
    /// When set, detector training and scoring are skipped entirely and
    /// these records provide the scores (compatibility channel for external
    /// neural detectors).
    std::optional<std::vector<ScoreRecord>> external_scores;
    ExternalQuality external_quality;
};

struct BenchResult {
    ExperimentReport report;
    DetectorModel model;                 // default-constructed with external scores
    std::vector<ScoreRecord> scores;     // every entry, entry_id-keyed
};

/// Quality + survival tables over all entries; detection table on the test
/// split with thresholds calibrated on train+val pristine scores (disjoint
/// from test by split construction).
BenchResult run_benchmark(const Dataset& dataset, const BenchOptions& options);

/// Robustness protocol: 4 post-processing families x 3 severities + a
/// no-transform baseline, each transform applied to test positives and
/// negatives alike.
std::vector<RobustnessRow> run_robustness_sweep(const Dataset& dataset,
                                                const DetectorModel& model, int jobs = 1);

/// Leave-one-attack-out: per held-out attack, retrains on train+val without
/// it and reports seen / held-out AUC on the test split.
std::vector<LooRow> run_loo(const Dataset& dataset, const TrainConfig& config, int jobs = 1);

/// CSV with header image_id,label,score[,watermarker,attack,transform].
/// Malformed rows and out-of-range scores report their line number.
std::vector<ScoreRecord> ingest_external_scores(const std::string& csv_path);
void write_scores_csv(const std::vector<ScoreRecord>& records, const std::string& path);

/// Emits quality.csv, survival.csv, detection.csv, robustness.csv, loo.csv,
/// roc curves and summary.json under out_dir. Byte-identical for identical
/// report values.
void write_report(const ExperimentReport& report, const std::string& out_dir);

/// Runs a pool of workers over [0, n); fn must be safe to call concurrently
/// on distinct indices. jobs <= 1 runs inline.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace wrd
