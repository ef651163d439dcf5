#include "wrd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wrd/attacks.hpp"
#include "wrd/rng.hpp"

namespace wrd {

std::string TrainConfig::digest() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "epochs=%d;batch=%d;lr=%.9g;wd=%.9g;warmup=%d;seed=%llu;aug=%.9g",
                  epochs, batch_size, base_lr, weight_decay, warmup_epochs,
                  static_cast<unsigned long long>(seed), augment_probability);
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(hash64(buf)));
    return hex;
}

std::optional<std::pair<AttackSpec, std::uint64_t>> augment_choice(std::uint64_t rng_seed,
                                                                   double probability) {
    Rng rng(rng_seed);
    if (rng.next_double() >= probability) return std::nullopt;
    const int family = static_cast<int>(rng.next_below(4));
    AttackSpec spec;
    switch (family) {
        case 0: spec = AttackSpec::jpeg(rng.next_int(60, 100)); break;
        case 1: spec = AttackSpec::gaussian_blur(rng.next_range(0.5, 2.0)); break;
        case 2: spec = AttackSpec::resize_cycle(rng.next_range(0.5, 1.2)); break;
        default: spec = AttackSpec::gaussian_noise(rng.next_range(0.01, 0.08)); break;
    }
    spec.role = AttackRole::Postprocess;
    return std::make_pair(spec, rng.next_u64());
}

Image augment(const Image& img, std::uint64_t rng_seed, double probability) {
    const auto choice = augment_choice(rng_seed, probability);
    if (!choice) return img;
    return apply_attack(img, choice->first, choice->second);
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamp_score(double s) { return std::clamp(s, 1e-12, 1.0 - 1e-12); }

std::vector<double> normalized(const DetectorModel& model, const FeatureVector& fv) {
    std::vector<double> z(kFeatureCount);
    for (int i = 0; i < kFeatureCount; ++i)
        z[i] = (fv.values[i] - model.feature_mean[i]) / model.feature_std[i];
    return z;
}

}  // namespace

DetectorModel train(const std::vector<TrainRecord>& records, const TrainConfig& config) {
    if (records.size() < 2) throw std::invalid_argument("train requires at least 2 records");
    bool has_pos = false, has_neg = false;
    for (const auto& r : records) (r.label ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw std::invalid_argument("train requires both pristine and attacked records");
    if (config.epochs < 1 || config.batch_size < 1 || config.base_lr <= 0.0 ||
        config.warmup_epochs < 0)
        throw std::invalid_argument("invalid train config");

    const std::size_t n = records.size();

    DetectorModel model;
    model.weights.assign(kFeatureCount, 0.0);
    model.bias = 0.0;
    model.feature_mean.assign(kFeatureCount, 0.0);
    model.feature_std.assign(kFeatureCount, 1.0);
    model.train_config_digest = config.digest();

    for (const auto& r : records)
        for (int i = 0; i < kFeatureCount; ++i) model.feature_mean[i] += r.features.values[i];
    for (int i = 0; i < kFeatureCount; ++i) model.feature_mean[i] /= static_cast<double>(n);
    std::vector<double> var(kFeatureCount, 0.0);
    for (const auto& r : records)
        for (int i = 0; i < kFeatureCount; ++i) {
            const double d = r.features.values[i] - model.feature_mean[i];
            var[i] += d * d;
        }
    for (int i = 0; i < kFeatureCount; ++i) {
        var[i] /= static_cast<double>(n);
        model.feature_std[i] = var[i] > 1e-24 ? std::sqrt(var[i]) : 1.0;
    }

    // z-scored design matrix
    std::vector<std::vector<double>> x(n);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        x[r] = normalized(model, records[r].features);
        y[r] = records[r].label ? 1.0 : 0.0;
    }

    const std::size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
    const std::size_t total_steps = steps_per_epoch * config.epochs;
    const std::size_t warmup_steps = steps_per_epoch * config.warmup_epochs;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    std::size_t step = 0;
    std::vector<double> grad(kFeatureCount);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng(derive_seed(config.seed, "shuffle-epoch-" + std::to_string(epoch)));
        shuffle(order, rng);
        for (std::size_t start = 0; start < n; start += config.batch_size, ++step) {
            const std::size_t end = std::min(n, start + config.batch_size);
            const double batch = static_cast<double>(end - start);

            double lr;
            if (step < warmup_steps) {
                lr = config.base_lr * static_cast<double>(step + 1) /
                     static_cast<double>(warmup_steps);
            } else if (total_steps > warmup_steps) {
                const double progress = static_cast<double>(step - warmup_steps) /
                                        static_cast<double>(total_steps - warmup_steps);
                lr = config.base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
            } else {
                lr = config.base_lr;
            }

            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_bias = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto& xi = x[order[k]];
                double z = model.bias;
                for (int i = 0; i < kFeatureCount; ++i) z += model.weights[i] * xi[i];
                const double err = sigmoid(z) - y[order[k]];
                for (int i = 0; i < kFeatureCount; ++i) grad[i] += err * xi[i];
                grad_bias += err;
            }
            for (int i = 0; i < kFeatureCount; ++i) {
                grad[i] = grad[i] / batch + config.weight_decay * model.weights[i];
                model.weights[i] -= lr * grad[i];
            }
            model.bias -= lr * grad_bias / batch;  // bias is not decayed
        }
    }
    return model;
}

double score(const DetectorModel& model, const FeatureVector& fv) {
    if (model.weights.size() != kFeatureCount ||
        model.feature_mean.size() != kFeatureCount || model.feature_std.size() != kFeatureCount)
        throw std::invalid_argument("detector model dimension mismatch");
    const auto z = normalized(model, fv);
    double logit = model.bias;
    for (int i = 0; i < kFeatureCount; ++i) logit += model.weights[i] * z[i];
    return clamp_score(sigmoid(logit));
}

double bce_loss(const DetectorModel& model, const std::vector<TrainRecord>& records) {
    if (records.empty()) throw std::invalid_argument("bce_loss requires records");
    double loss = 0.0;
    for (const auto& r : records) {
        const double s = score(model, r.features);
        loss += r.label ? -std::log(s) : -std::log(1.0 - s);
    }
    return loss / static_cast<double>(records.size());
}

std::string model_to_json(const DetectorModel& model) {
    nlohmann::ordered_json j;
    j["format"] = "wrd-detector";
    j["version"] = 1;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["feature_mean"] = model.feature_mean;
    j["feature_std"] = model.feature_std;
    j["train_config_digest"] = model.train_config_digest;
    return j.dump();
}

DetectorModel model_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "wrd-detector")
        throw std::runtime_error("not a detector model document");
    DetectorModel model;
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    model.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    model.feature_std = j.at("feature_std").get<std::vector<double>>();
    model.train_config_digest = j.value("train_config_digest", "");
    if (model.weights.size() != kFeatureCount)
        throw std::runtime_error("detector model has wrong dimension");
    return model;
}

void save_model(const DetectorModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("unwritable path: " + path);
    out << model_to_json(model) << "\n";
}

DetectorModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

void write_feature_csv(const std::vector<std::string>& ids, const std::vector<TrainRecord>& records,
                       const std::string& path) {
    if (ids.size() != records.size())
        throw std::invalid_argument("feature csv requires one id per record");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("unwritable path: " + path);
    out << "image_id,label";
    for (const auto& name : feature_names()) out << "," << name;
    out << "\n";
    char buf[64];
    for (std::size_t r = 0; r < records.size(); ++r) {
        out << ids[r] << "," << (records[r].label ? 1 : 0);
        for (double v : records[r].features.values) {
            std::snprintf(buf, sizeof buf, ",%.12g", v);
            out << buf;
        }
        out << "\n";
    }
}

std::vector<TrainRecord> read_feature_csv(const std::string& path, std::vector<std::string>* ids) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty feature csv: " + path);

    std::vector<TrainRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 2 + kFeatureCount)
            throw std::runtime_error("malformed feature csv row at line " +
                                     std::to_string(line_no));
        TrainRecord rec;
        try {
            rec.label = std::stoi(cells[1]) != 0;
            for (int i = 0; i < kFeatureCount; ++i) rec.features.values[i] = std::stod(cells[2 + i]);
        } catch (const std::exception&) {
            throw std::runtime_error("malformed feature csv value at line " +
                                     std::to_string(line_no));
        }
        if (ids) ids->push_back(cells[0]);
        records.push_back(rec);
    }
    return records;
}

}  // namespace wrd
