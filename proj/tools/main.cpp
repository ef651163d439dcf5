// wrdbench: command-line front end for the watermark removal detection
// toolkit. One subcommand per pipeline stage; all randomness hangs off
// explicit --seed flags so every output is reproducible.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wrd/attacks.hpp"
#include "wrd/detector.hpp"
#include "wrd/features.hpp"
#include "wrd/harness.hpp"
#include "wrd/image.hpp"
#include "wrd/metrics.hpp"
#include "wrd/rng.hpp"
#include "wrd/stats.hpp"
#include "wrd/transforms.hpp"
#include "wrd/verify.hpp"
#include "wrd/watermark.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void print_config_digest(const std::string& resolved) {
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(wrd::hash64(resolved)));
    std::cerr << "config_digest=" << hex << "\n";
}

wrd::DatasetSource source_from_json(const json& j) {
    wrd::DatasetSource src;
    const std::string type = j.value("type", "synth");
    if (type == "dir") {
        src.directory = j.at("path").get<std::string>();
        return src;
    }
    if (type != "synth") throw std::runtime_error("source type must be 'synth' or 'dir'");
    src.synth.count = j.value("count", 100);
    src.synth.height = j.value("height", 256);
    src.synth.width = j.value("width", 256);
    src.synth.channels = j.value("channels", 3);
    if (j.contains("kinds")) {
        src.synth.kinds.clear();
        for (const auto& k : j.at("kinds"))
            src.synth.kinds.push_back(wrd::synth_kind_from_string(k.get<std::string>()));
    }
    return src;
}

wrd::TrainConfig train_config_from_json(const json& j) {
    wrd::TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.base_lr = j.value("base_lr", cfg.base_lr);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.warmup_epochs = j.value("warmup_epochs", cfg.warmup_epochs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.augment_probability = j.value("augment_probability", cfg.augment_probability);
    return cfg;
}

struct BenchConfigFile {
    std::uint64_t seed = 1;
    wrd::DatasetSource source;
    std::vector<wrd::WatermarkerConfig> watermarkers;
    std::vector<wrd::AttackSpec> attacks;
    wrd::TrainConfig train;
    std::vector<double> fpr_targets = {1e-2, 1e-3};
    std::string external_scores_csv;
    std::string external_lpips_csv;
    std::string external_fid_json;
};

BenchConfigFile load_bench_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    const json j = json::parse(in);

    BenchConfigFile cfg;
    cfg.seed = j.value("seed", 1);
    if (j.contains("source")) cfg.source = source_from_json(j.at("source"));
    if (j.contains("watermarkers")) {
        for (const auto& wj : j.at("watermarkers")) {
            wrd::WatermarkerConfig wm;
            wm.name = wj.value("name", wm.name);
            wm.seed = wj.value("seed", wm.seed);
            wm.n_bits = wj.value("n_bits", wm.n_bits);
            wm.chips_per_bit = wj.value("chips_per_bit", wm.chips_per_bit);
            wm.target_psnr = wj.value("target_psnr", wm.target_psnr);
            cfg.watermarkers.push_back(wm);
        }
    } else {
        cfg.watermarkers.push_back({});
    }
    if (j.contains("attacks")) {
        for (const auto& aj : j.at("attacks"))
            cfg.attacks.push_back(wrd::AttackSpec::parse(aj.get<std::string>()));
    }
    if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
    if (cfg.train.seed == 0) cfg.train.seed = cfg.seed;
    if (j.contains("fpr_targets"))
        cfg.fpr_targets = j.at("fpr_targets").get<std::vector<double>>();
    cfg.external_scores_csv = j.value("external_scores_csv", "");
    cfg.external_lpips_csv = j.value("external_lpips_csv", "");
    cfg.external_fid_json = j.value("external_fid_json", "");
    return cfg;
}

wrd::ExternalQuality load_external_quality(const BenchConfigFile& cfg) {
    wrd::ExternalQuality q;
    if (!cfg.external_lpips_csv.empty()) {
        std::ifstream in(cfg.external_lpips_csv);
        if (!in) throw std::runtime_error("unreadable file: " + cfg.external_lpips_csv);
        std::string line;
        std::getline(in, line);  // header entry_id,lpips
        int line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw std::runtime_error("malformed lpips row at line " + std::to_string(line_no));
            q.lpips_by_entry[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
        }
    }
    if (!cfg.external_fid_json.empty()) {
        std::ifstream in(cfg.external_fid_json);
        if (!in) throw std::runtime_error("unreadable file: " + cfg.external_fid_json);
        const json j = json::parse(in);
        for (auto it = j.begin(); it != j.end(); ++it)
            q.fid_by_cell[it.key()] = it.value().get<double>();
    }
    return q;
}

int run_bench(const std::string& config_path, const std::string& out_dir, int jobs,
              std::optional<std::uint64_t> seed_override, bool verbose) {
    BenchConfigFile cfg = load_bench_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    print_config_digest("bench|" + config_path + "|seed=" + std::to_string(cfg.seed) +
                        "|jobs=" + std::to_string(jobs));

    if (verbose) std::cerr << "building dataset...\n";
    const std::string dataset_dir = (fs::path(out_dir) / "dataset").string();
    wrd::Dataset dataset =
        wrd::build_dataset(cfg.source, cfg.watermarkers, cfg.attacks, cfg.seed, dataset_dir, jobs);
    if (verbose)
        std::cerr << "dataset: " << dataset.manifest.entries.size() << " entries\n"
                  << "training detector and scoring...\n";

    wrd::BenchOptions options;
    options.train = cfg.train;
    options.fpr_targets = cfg.fpr_targets;
    options.jobs = jobs;
    options.external_quality = load_external_quality(cfg);
    if (!cfg.external_scores_csv.empty())
        options.external_scores = wrd::ingest_external_scores(cfg.external_scores_csv);

    wrd::BenchResult result = wrd::run_benchmark(dataset, options);
    const std::string report_dir = (fs::path(out_dir) / "report").string();
    wrd::write_report(result.report, report_dir);
    wrd::write_scores_csv(result.scores, (fs::path(report_dir) / "scores.csv").string());
    if (!options.external_scores)
        wrd::save_model(result.model, (fs::path(out_dir) / "model.json").string());
    std::cout << "report written to " << report_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"watermark removal detection benchmark toolkit"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "print progress notes on stderr");

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "generate synthetic cover images");
    struct {
        std::uint64_t seed = 1;
        int count = 1;
        int height = 256, width = 256, channels = 3;
        std::string kind = "texture";
        std::string out;
    } synth_opt;
    synth->add_option("--seed", synth_opt.seed);
    synth->add_option("--count", synth_opt.count);
    synth->add_option("--height", synth_opt.height);
    synth->add_option("--width", synth_opt.width);
    synth->add_option("--channels", synth_opt.channels);
    synth->add_option("--kind", synth_opt.kind, "texture|gradient|shapes");
    synth->add_option("--out", synth_opt.out, "output file (count=1) or directory")->required();

    // --- embed ---
    auto* embed_cmd = app.add_subcommand("embed", "embed a watermark");
    struct {
        std::string in, out, key_out, message;
        std::uint64_t seed = 7;
        int bits = 64, chips = 128;
        double psnr = 40.0;
    } embed_opt;
    embed_cmd->add_option("--in", embed_opt.in)->required();
    embed_cmd->add_option("--out", embed_opt.out)->required();
    embed_cmd->add_option("--seed", embed_opt.seed, "key seed");
    embed_cmd->add_option("--bits", embed_opt.bits);
    embed_cmd->add_option("--chips", embed_opt.chips);
    embed_cmd->add_option("--psnr", embed_opt.psnr, "target PSNR in dB");
    embed_cmd->add_option("--key-out", embed_opt.key_out, "key JSON path (default <out>.key.json)");
    embed_cmd->add_option("--message", embed_opt.message, "payload hex (random when omitted)");

    // --- decode ---
    auto* decode_cmd = app.add_subcommand("decode", "decode a watermark");
    struct {
        std::string in, key, message;
    } decode_opt;
    decode_cmd->add_option("--in", decode_opt.in)->required();
    decode_cmd->add_option("--key", decode_opt.key)->required();
    decode_cmd->add_option("--message", decode_opt.message,
                           "expected hex; enables bit_accuracy and rho output");

    // --- attack ---
    auto* attack_cmd = app.add_subcommand("attack", "apply a removal attack or transform");
    struct {
        std::string in, out, spec;
        std::uint64_t seed = 1;
    } attack_opt;
    attack_cmd->add_option("--in", attack_opt.in)->required();
    attack_cmd->add_option("--out", attack_opt.out)->required();
    attack_cmd->add_option("--spec", attack_opt.spec, "e.g. gaussian_noise(sigma=0.05)")->required();
    attack_cmd->add_option("--seed", attack_opt.seed);

    // --- features ---
    auto* features_cmd = app.add_subcommand("features", "extract forensic features");
    struct {
        std::string in, csv, id = "image";
        int label = 0;
    } features_opt;
    features_cmd->add_option("--in", features_opt.in)->required();
    features_cmd->add_option("--csv", features_opt.csv, "append a row to this CSV");
    features_cmd->add_option("--id", features_opt.id);
    features_cmd->add_option("--label", features_opt.label, "0 pristine, 1 attacked");

    // --- train ---
    auto* train_cmd = app.add_subcommand("train", "train the removal detector on a feature CSV");
    struct {
        std::string features, out;
        wrd::TrainConfig cfg;
    } train_opt;
    train_cmd->add_option("--features", train_opt.features)->required();
    train_cmd->add_option("--out", train_opt.out)->required();
    train_cmd->add_option("--epochs", train_opt.cfg.epochs);
    train_cmd->add_option("--batch-size", train_opt.cfg.batch_size);
    train_cmd->add_option("--lr", train_opt.cfg.base_lr);
    train_cmd->add_option("--weight-decay", train_opt.cfg.weight_decay);
    train_cmd->add_option("--warmup-epochs", train_opt.cfg.warmup_epochs);
    train_cmd->add_option("--seed", train_opt.cfg.seed);

    // --- score ---
    auto* score_cmd = app.add_subcommand("score", "score images with a trained detector");
    struct {
        std::string model, in, features, out;
    } score_opt;
    score_cmd->add_option("--model", score_opt.model)->required();
    score_cmd->add_option("--in", score_opt.in, "single image to score");
    score_cmd->add_option("--features", score_opt.features, "feature CSV to score");
    score_cmd->add_option("--out", score_opt.out, "scores CSV output (with --features)");

    // --- calibrate ---
    auto* calibrate_cmd = app.add_subcommand("calibrate", "calibrate an operating point");
    struct {
        std::string scores, out;
        double fpr = 1e-2;
    } calibrate_opt;
    calibrate_cmd->add_option("--scores", calibrate_opt.scores, "scores CSV (label-0 rows used)")
        ->required();
    calibrate_cmd->add_option("--fpr", calibrate_opt.fpr)->required();
    calibrate_cmd->add_option("--out", calibrate_opt.out)->required();

    // --- roc ---
    auto* roc_cmd = app.add_subcommand("roc", "ROC curve and AUC from a scores CSV");
    struct {
        std::string scores, out, svg;
    } roc_opt;
    roc_cmd->add_option("--scores", roc_opt.scores)->required();
    roc_cmd->add_option("--out", roc_opt.out, "roc CSV output");
    roc_cmd->add_option("--svg", roc_opt.svg, "log-FPR plot output");

    // --- bench / sweep / loo ---
    auto* bench_cmd = app.add_subcommand("bench", "build dataset, train, emit report tables");
    struct {
        std::string config, out;
        int jobs = 1;
        std::uint64_t seed = 0;
        bool seed_set = false;
    } bench_opt;
    bench_cmd->add_option("--config", bench_opt.config)->required();
    bench_cmd->add_option("--out", bench_opt.out)->required();
    bench_cmd->add_option("--jobs", bench_opt.jobs);
    bench_cmd->add_option("--seed", bench_opt.seed)->each([&](const std::string&) {
        bench_opt.seed_set = true;
    });

    auto* sweep_cmd = app.add_subcommand("sweep", "robustness sweep over post-processing");
    struct {
        std::string dataset, model, out;
        int jobs = 1;
    } sweep_opt;
    sweep_cmd->add_option("--dataset", sweep_opt.dataset)->required();
    sweep_cmd->add_option("--model", sweep_opt.model)->required();
    sweep_cmd->add_option("--out", sweep_opt.out)->required();
    sweep_cmd->add_option("--jobs", sweep_opt.jobs);

    auto* loo_cmd = app.add_subcommand("loo", "leave-one-attack-out generalization");
    struct {
        std::string dataset, out;
        int jobs = 1;
        wrd::TrainConfig cfg;
    } loo_opt;
    loo_cmd->add_option("--dataset", loo_opt.dataset)->required();
    loo_cmd->add_option("--out", loo_opt.out)->required();
    loo_cmd->add_option("--jobs", loo_opt.jobs);
    loo_cmd->add_option("--epochs", loo_opt.cfg.epochs);
    loo_cmd->add_option("--seed", loo_opt.cfg.seed);

    // --- verify ---
    auto* verify_cmd = app.add_subcommand("verify", "two-check verification");
    struct {
        std::string in, key, model, op, message;
        double wm_threshold = 1e-6;
    } verify_opt;
    verify_cmd->add_option("--in", verify_opt.in)->required();
    verify_cmd->add_option("--key", verify_opt.key)->required();
    verify_cmd->add_option("--model", verify_opt.model)->required();
    verify_cmd->add_option("--op", verify_opt.op)->required();
    verify_cmd->add_option("--message", verify_opt.message,
                           "expected hex (defaults to the message stored in the key file)");
    verify_cmd->add_option("--wm-threshold", verify_opt.wm_threshold);

    // --- spectrum ---
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Fourier log-spectrum / residual diagnostics");
    struct {
        std::string in, out, ref, residual_out;
    } spectrum_opt;
    spectrum_cmd->add_option("--in", spectrum_opt.in)->required();
    spectrum_cmd->add_option("--out", spectrum_opt.out, "spectrum image output")->required();
    spectrum_cmd->add_option("--ref", spectrum_opt.ref,
                             "reference image; switches to residual diagnostics");
    spectrum_cmd->add_option("--residual-out", spectrum_opt.residual_out,
                             "0.5-centered residual image output (with --ref)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // 1 = usage error, 0 = help/version
    }

    try {
        if (*synth) {
            const auto& o = synth_opt;
            print_config_digest("synth|" + std::to_string(o.seed) + "|" + std::to_string(o.count) +
                                "|" + std::to_string(o.height) + "x" + std::to_string(o.width) +
                                "|" + o.kind);
            const wrd::SynthKind kind = wrd::synth_kind_from_string(o.kind);
            if (o.count == 1 && !fs::is_directory(o.out)) {
                wrd::save_image(wrd::synth_image(o.seed, o.height, o.width, kind, o.channels),
                                o.out);
            } else {
                fs::create_directories(o.out);
                for (int i = 0; i < o.count; ++i) {
                    char name[32];
                    std::snprintf(name, sizeof name, "img%05d.png", i);
                    wrd::save_image(
                        wrd::synth_image(o.seed + static_cast<std::uint64_t>(i), o.height,
                                         o.width, kind, o.channels),
                        (fs::path(o.out) / name).string());
                }
            }
            return 0;
        }

        if (*embed_cmd) {
            const auto& o = embed_opt;
            print_config_digest("embed|" + o.in + "|" + std::to_string(o.seed) + "|" +
                                std::to_string(o.bits) + "|" + std::to_string(o.chips) + "|" +
                                std::to_string(o.psnr));
            const wrd::Image img = wrd::load_image(o.in);
            const wrd::WatermarkKey key =
                wrd::keygen(o.seed, o.bits, o.chips, img.height, img.width);
            const wrd::BitMessage msg =
                o.message.empty()
                    ? wrd::BitMessage::random(wrd::derive_seed(o.seed, o.in + "|message"), o.bits)
                    : wrd::BitMessage::from_hex(o.message, o.bits);
            const wrd::EmbedResult result = wrd::embed(img, msg, key, o.psnr);
            wrd::save_image(result.image, o.out);
            const std::string key_path = o.key_out.empty() ? o.out + ".key.json" : o.key_out;
            wrd::save_key(key, key_path, msg.to_hex());
            ordered_json j;
            j["message"] = msg.to_hex();
            j["key"] = key_path;
            j["achieved_psnr"] = result.psnr_infinite ? json("inf") : json(result.achieved_psnr);
            j["alpha"] = result.alpha;
            j["clipped_fraction"] = result.clipped_fraction;
            std::cout << j.dump() << "\n";
            return 0;
        }

        if (*decode_cmd) {
            const auto& o = decode_opt;
            print_config_digest("decode|" + o.in + "|" + o.key);
            std::string stored_message;
            const wrd::WatermarkKey key = wrd::load_key(o.key, &stored_message);
            const wrd::Image img = wrd::load_image(o.in);
            const wrd::BitMessage decoded = wrd::decode(img, key);
            ordered_json j;
            j["decoded"] = decoded.to_hex();
            const std::string expected_hex = o.message.empty() ? stored_message : o.message;
            if (!expected_hex.empty()) {
                const wrd::BitMessage expected =
                    wrd::BitMessage::from_hex(expected_hex, key.n_bits);
                const double acc = wrd::bit_accuracy(expected, decoded);
                j["bit_accuracy"] = acc;
                j["rho"] = wrd::rho_value(key.n_bits, acc).value;
            }
            std::cout << j.dump() << "\n";
            return 0;
        }

        if (*attack_cmd) {
            const auto& o = attack_opt;
            print_config_digest("attack|" + o.spec + "|" + std::to_string(o.seed));
            const wrd::AttackSpec spec = wrd::AttackSpec::parse(o.spec);
            wrd::save_image(wrd::apply_attack(wrd::load_image(o.in), spec, o.seed), o.out);
            return 0;
        }

        if (*features_cmd) {
            const auto& o = features_opt;
            print_config_digest("features|" + o.in);
            const wrd::FeatureVector fv = wrd::extract_features(wrd::load_image(o.in));
            if (o.csv.empty()) {
                ordered_json j;
                for (int i = 0; i < wrd::kFeatureCount; ++i)
                    j[wrd::feature_names()[i]] = fv.values[i];
                std::cout << j.dump() << "\n";
            } else {
                const bool fresh = !fs::exists(o.csv);
                std::ofstream out(o.csv, std::ios::app);
                if (!out) throw std::runtime_error("unwritable path: " + o.csv);
                if (fresh) {
                    out << "image_id,label";
                    for (const auto& name : wrd::feature_names()) out << "," << name;
                    out << "\n";
                }
                out << o.id << "," << o.label;
                char buf[64];
                for (double v : fv.values) {
                    std::snprintf(buf, sizeof buf, ",%.12g", v);
                    out << buf;
                }
                out << "\n";
            }
            return 0;
        }

        if (*train_cmd) {
            auto& o = train_opt;
            print_config_digest("train|" + o.features + "|" + o.cfg.digest());
            const auto records = wrd::read_feature_csv(o.features);
            const wrd::DetectorModel model = wrd::train(records, o.cfg);
            wrd::save_model(model, o.out);
            std::cout << "{\"bce\":" << wrd::bce_loss(model, records) << "}\n";
            return 0;
        }

        if (*score_cmd) {
            const auto& o = score_opt;
            print_config_digest("score|" + o.model + "|" + o.in + "|" + o.features);
            const wrd::DetectorModel model = wrd::load_model(o.model);
            if (!o.in.empty()) {
                const double s = wrd::score(model, wrd::extract_features(wrd::load_image(o.in)));
                std::cout << "{\"score\":" << s << "}\n";
            } else if (!o.features.empty()) {
                std::vector<std::string> ids;
                const auto records = wrd::read_feature_csv(o.features, &ids);
                std::vector<wrd::ScoreRecord> out;
                for (std::size_t i = 0; i < records.size(); ++i) {
                    wrd::ScoreRecord r;
                    r.image_id = ids[i];
                    r.label = records[i].label;
                    r.score = wrd::score(model, records[i].features);
                    out.push_back(r);
                }
                if (o.out.empty()) throw std::runtime_error("--features requires --out");
                wrd::write_scores_csv(out, o.out);
            } else {
                throw std::runtime_error("score needs --in or --features");
            }
            return 0;
        }

        if (*calibrate_cmd) {
            const auto& o = calibrate_opt;
            print_config_digest("calibrate|" + o.scores + "|" + std::to_string(o.fpr));
            std::vector<double> negatives;
            for (const auto& r : wrd::ingest_external_scores(o.scores))
                if (!r.label) negatives.push_back(r.score);
            const wrd::OperatingPoint op = wrd::calibrate(negatives, o.fpr);
            wrd::save_operating_point(op, o.out);
            std::cout << wrd::operating_point_to_json(op) << "\n";
            return 0;
        }

        if (*roc_cmd) {
            const auto& o = roc_opt;
            print_config_digest("roc|" + o.scores);
            const auto records = wrd::ingest_external_scores(o.scores);
            const wrd::RocCurve curve = wrd::roc(records);
            if (!o.out.empty()) wrd::write_roc_csv(curve, o.out);
            if (!o.svg.empty()) wrd::write_roc_svg({{"scores", curve}}, o.svg);
            char buf[64];
            std::snprintf(buf, sizeof buf, "{\"auc\":%.6f}\n", wrd::auc(curve));
            std::cout << buf;
            return 0;
        }

        if (*bench_cmd) {
            return run_bench(bench_opt.config, bench_opt.out, bench_opt.jobs,
                             bench_opt.seed_set ? std::optional<std::uint64_t>(bench_opt.seed)
                                                : std::nullopt,
                             verbose);
        }

        if (*sweep_cmd) {
            const auto& o = sweep_opt;
            print_config_digest("sweep|" + o.dataset + "|" + o.model);
            const wrd::Dataset dataset = wrd::load_dataset(o.dataset);
            const wrd::DetectorModel model = wrd::load_model(o.model);
            wrd::ExperimentReport report;
            report.seed = dataset.seed;
            report.config_digest = "sweep";
            report.robustness = wrd::run_robustness_sweep(dataset, model, o.jobs);
            wrd::write_report(report, o.out);
            std::cout << "sweep written to " << o.out << "\n";
            return 0;
        }

        if (*loo_cmd) {
            auto& o = loo_opt;
            const wrd::Dataset dataset = wrd::load_dataset(o.dataset);
            if (o.cfg.seed == 0) o.cfg.seed = dataset.seed;
            print_config_digest("loo|" + o.dataset + "|" + o.cfg.digest());
            wrd::ExperimentReport report;
            report.seed = dataset.seed;
            report.config_digest = "loo";
            report.loo = wrd::run_loo(dataset, o.cfg, o.jobs);
            wrd::write_report(report, o.out);
            std::cout << "loo written to " << o.out << "\n";
            return 0;
        }

        if (*verify_cmd) {
            const auto& o = verify_opt;
            print_config_digest("verify|" + o.in + "|" + o.key + "|" + o.model + "|" + o.op);
            std::string stored_message;
            const wrd::WatermarkKey key = wrd::load_key(o.key, &stored_message);
            const std::string hex = o.message.empty() ? stored_message : o.message;
            if (hex.empty())
                throw std::runtime_error("no expected message: pass --message or store it in the key file");
            const wrd::Verdict verdict = wrd::verify(
                wrd::load_image(o.in), key, wrd::BitMessage::from_hex(hex, key.n_bits),
                wrd::load_model(o.model), wrd::load_operating_point(o.op), o.wm_threshold);
            std::cout << verdict.to_json() << "\n";
            return 0;
        }

        if (*spectrum_cmd) {
            const auto& o = spectrum_opt;
            print_config_digest("spectrum|" + o.in + "|" + o.ref);
            const wrd::Image img = wrd::load_image(o.in);
            wrd::Spectrum spec;
            if (o.ref.empty()) {
                spec = wrd::fourier_log_spectrum(img);
            } else {
                const wrd::Image ref = wrd::load_image(o.ref);
                const wrd::ResidualDiagnostics diag = wrd::compute_residual_diagnostics(ref, img);
                spec = diag.spectrum;
                if (!o.residual_out.empty()) wrd::save_image(diag.residual_display, o.residual_out);
                char buf[64];
                std::snprintf(buf, sizeof buf, "{\"hf_energy_fraction\":%.6f}\n",
                              diag.hf_energy_fraction);
                std::cout << buf;
            }
            double peak = 0.0;
            for (double v : spec.values) peak = std::max(peak, v);
            wrd::Image out(spec.height, spec.width, 1);
            if (peak > 0.0)
                for (std::size_t i = 0; i < spec.values.size(); ++i)
                    out.data[i] = spec.values[i] / peak;
            wrd::save_image(out, o.out);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
