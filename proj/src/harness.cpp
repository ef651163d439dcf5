#include "wrd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "wrd/rng.hpp"
#include "wrd/stats.hpp"
#include "wrd/watermark.hpp"

namespace fs = std::filesystem;

namespace wrd {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = static_cast<int>(std::min<std::size_t>(jobs, n));
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string split_for_id(const std::string& image_id) {
    const std::uint64_t band = hash64(image_id + "|wrd-split-v1") % 100;
    if (band < 70) return "train";
    if (band < 80) return "val";
    return "test";
}

namespace {

// leakage freedom: every entry of an image id sits in that id's split, and
// entry ids are unique
void validate_manifest(const DatasetManifest& manifest) {
    std::set<std::string> seen;
    for (const auto& e : manifest.entries) {
        if (e.split != split_for_id(e.image_id))
            throw std::runtime_error("manifest split leak for image " + e.image_id);
        if (!seen.insert(e.entry_id).second)
            throw std::runtime_error("duplicate manifest entry " + e.entry_id);
    }
}

std::string sanitize(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')
            out += c;
        else
            out += '_';
    }
    return out;
}

std::string entry_id_for(const std::string& image_id, const std::string& wm,
                         const std::string& attack) {
    return image_id + "|" + wm + "|" + attack;
}

nlohmann::ordered_json entry_to_json(const ManifestEntry& e) {
    nlohmann::ordered_json j;
    j["image_id"] = e.image_id;
    j["entry_id"] = e.entry_id;
    j["split"] = e.split;
    j["variant"] = e.variant;
    j["watermarker"] = e.watermarker;
    j["attack"] = e.attack;
    j["message"] = e.message;
    j["path"] = e.path;
    if (e.psnr_infinite)
        j["psnr_vs_original"] = "inf";
    else
        j["psnr_vs_original"] = e.psnr_vs_original;
    return j;
}

ManifestEntry entry_from_json(const nlohmann::json& j) {
    ManifestEntry e;
    e.image_id = j.at("image_id").get<std::string>();
    e.entry_id = j.at("entry_id").get<std::string>();
    e.split = j.at("split").get<std::string>();
    e.variant = j.at("variant").get<std::string>();
    e.watermarker = j.at("watermarker").get<std::string>();
    e.attack = j.at("attack").get<std::string>();
    e.message = j.at("message").get<std::string>();
    e.path = j.at("path").get<std::string>();
    if (j.at("psnr_vs_original").is_string()) {
        e.psnr_infinite = true;
    } else {
        e.psnr_infinite = false;
        e.psnr_vs_original = j.at("psnr_vs_original").get<double>();
    }
    return e;
}

std::vector<std::pair<std::string, std::string>> list_cover_files(const std::string& dir) {
    std::vector<std::pair<std::string, std::string>> files;  // (id, path)
    for (const auto& de : fs::directory_iterator(dir)) {
        if (!de.is_regular_file()) continue;
        const std::string ext = de.path().extension().string();
        if (ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".PNG")
            files.emplace_back(de.path().stem().string(), de.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no cover images found in " + dir);
    return files;
}

double checked_finite_psnr(const Image& a, const Image& b) {
    const PsnrValue v = psnr(a, b);
    return v.infinite ? 0.0 : v.db;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

Dataset build_dataset(const DatasetSource& source,
                      const std::vector<WatermarkerConfig>& watermarkers,
                      const std::vector<AttackSpec>& attacks, std::uint64_t seed,
                      const std::string& out_dir, int jobs) {
    if (watermarkers.empty()) throw std::invalid_argument("build_dataset needs a watermarker");
    if (attacks.empty()) throw std::invalid_argument("build_dataset needs at least one attack");
    for (const auto& a : attacks) validate_spec(a);

    // resolve covers
    struct CoverRef {
        std::string id;
        std::string path;   // directory source
        int synth_index = -1;
    };
    std::vector<CoverRef> covers;
    if (!source.directory.empty()) {
        for (auto& [id, path] : list_cover_files(source.directory))
            covers.push_back({id, path, -1});
    } else {
        if (source.synth.count < 20)
            throw std::invalid_argument("build_dataset needs at least 20 source images");
        for (int i = 0; i < source.synth.count; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "img%05d", i);
            covers.push_back({id, "", i});
        }
    }
    if (covers.size() < 20)
        throw std::invalid_argument("build_dataset needs at least 20 source images");

    fs::create_directories(fs::path(out_dir) / "images");

    const std::size_t per_image = 1 + watermarkers.size() * (1 + attacks.size());
    std::vector<std::vector<ManifestEntry>> slots(covers.size());

    auto build_variants = [&](const CoverRef& ref, std::vector<ManifestEntry>& out_slot) {
        Image original;
        if (ref.synth_index >= 0) {
            const auto& sp = source.synth;
            const SynthKind kind = sp.kinds[ref.synth_index % sp.kinds.size()];
            original = synth_image(derive_seed(seed, ref.id + "|cover"), sp.height, sp.width,
                                   kind, sp.channels);
        } else {
            original = load_image(ref.path);
        }

        const fs::path img_dir = fs::path(out_dir) / "images" / ref.id;
        fs::create_directories(img_dir);

        std::vector<ManifestEntry>& out = out_slot;
        out.reserve(per_image);

        ManifestEntry orig;
        orig.image_id = ref.id;
        orig.entry_id = entry_id_for(ref.id, "none", "none");
        orig.split = split_for_id(ref.id);
        orig.variant = "original";
        orig.path = (fs::path("images") / ref.id / "original.png").generic_string();
        save_image(original, (fs::path(out_dir) / orig.path).string());
        out.push_back(orig);

        for (const auto& wm : watermarkers) {
            const BitMessage msg = BitMessage::random(
                derive_seed(seed, ref.id + "|message|" + wm.name), wm.n_bits);
            const WatermarkKey key =
                keygen(wm.seed, wm.n_bits, wm.chips_per_bit, original.height, original.width);
            const EmbedResult embedded = embed(original, msg, key, wm.target_psnr);

            ManifestEntry we;
            we.image_id = ref.id;
            we.entry_id = entry_id_for(ref.id, wm.name, "none");
            we.split = orig.split;
            we.variant = "watermarked";
            we.watermarker = wm.name;
            we.message = msg.to_hex();
            we.path = (fs::path("images") / ref.id / (sanitize(wm.name) + ".png")).generic_string();
            we.psnr_infinite = embedded.psnr_infinite;
            we.psnr_vs_original = embedded.achieved_psnr;
            save_image(embedded.image, (fs::path(out_dir) / we.path).string());
            out.push_back(we);

            for (std::size_t ai = 0; ai < attacks.size(); ++ai) {
                const std::string attack_str = attacks[ai].to_string();
                const Image attacked = apply_attack(
                    embedded.image, attacks[ai],
                    derive_seed(seed, ref.id + "|" + wm.name + "|" + attack_str));

                ManifestEntry ae;
                ae.image_id = ref.id;
                ae.entry_id = entry_id_for(ref.id, wm.name, attack_str);
                ae.split = orig.split;
                ae.variant = "attacked";
                ae.watermarker = wm.name;
                ae.attack = attack_str;
                ae.message = we.message;
                char slug[64];
                std::snprintf(slug, sizeof slug, "a%02zu_", ai);
                ae.path = (fs::path("images") / ref.id /
                           (sanitize(wm.name) + "__" + slug + sanitize(attack_str) + ".png"))
                              .generic_string();
                ae.psnr_infinite = false;
                ae.psnr_vs_original = checked_finite_psnr(original, attacked);
                save_image(attacked, (fs::path(out_dir) / ae.path).string());
                out.push_back(ae);
            }
        }
    };

    parallel_for(covers.size(), jobs, [&](std::size_t ci) {
        const CoverRef& ref = covers[ci];
        try {
            build_variants(ref, slots[ci]);
        } catch (const std::exception& e) {
            // keygen capacity and I/O failures carry the offending cover id
            throw std::runtime_error("while processing " + ref.id + ": " + e.what());
        }
    });

    Dataset dataset;
    dataset.root = out_dir;
    dataset.watermarkers = watermarkers;
    dataset.attacks = attacks;
    dataset.seed = seed;
    for (auto& s : slots)
        for (auto& e : s) dataset.manifest.entries.push_back(std::move(e));

    validate_manifest(dataset.manifest);
    save_dataset(dataset);
    return dataset;
}

void save_dataset(const Dataset& dataset) {
    {
        std::ofstream out(fs::path(dataset.root) / "manifest.jsonl");
        if (!out) throw std::runtime_error("unwritable path: " + dataset.root);
        for (const auto& e : dataset.manifest.entries) out << entry_to_json(e).dump() << "\n";
    }
    nlohmann::ordered_json meta;
    meta["format"] = "wrd-dataset";
    meta["version"] = 1;
    meta["seed"] = dataset.seed;
    meta["watermarkers"] = nlohmann::ordered_json::array();
    for (const auto& wm : dataset.watermarkers) {
        nlohmann::ordered_json j;
        j["name"] = wm.name;
        j["seed"] = wm.seed;
        j["n_bits"] = wm.n_bits;
        j["chips_per_bit"] = wm.chips_per_bit;
        j["target_psnr"] = wm.target_psnr;
        meta["watermarkers"].push_back(j);
    }
    meta["attacks"] = nlohmann::ordered_json::array();
    for (const auto& a : dataset.attacks) meta["attacks"].push_back(a.to_string());
    std::ofstream out(fs::path(dataset.root) / "dataset.json");
    if (!out) throw std::runtime_error("unwritable path: " + dataset.root);
    out << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::string& root) {
    Dataset dataset;
    dataset.root = root;

    std::ifstream meta_in(fs::path(root) / "dataset.json");
    if (!meta_in) throw std::runtime_error("unreadable file: " + root + "/dataset.json");
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    dataset.seed = meta.at("seed").get<std::uint64_t>();
    for (const auto& j : meta.at("watermarkers")) {
        WatermarkerConfig wm;
        wm.name = j.at("name").get<std::string>();
        wm.seed = j.at("seed").get<std::uint64_t>();
        wm.n_bits = j.at("n_bits").get<int>();
        wm.chips_per_bit = j.at("chips_per_bit").get<int>();
        wm.target_psnr = j.at("target_psnr").get<double>();
        dataset.watermarkers.push_back(wm);
    }
    for (const auto& j : meta.at("attacks"))
        dataset.attacks.push_back(AttackSpec::parse(j.get<std::string>()));

    std::ifstream in(fs::path(root) / "manifest.jsonl");
    if (!in) throw std::runtime_error("unreadable file: " + root + "/manifest.jsonl");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        dataset.manifest.entries.push_back(entry_from_json(nlohmann::json::parse(line)));
    }
    validate_manifest(dataset.manifest);
    return dataset;
}

namespace {

const WatermarkerConfig& watermarker_by_name(const Dataset& dataset, const std::string& name) {
    for (const auto& wm : dataset.watermarkers)
        if (wm.name == name) return wm;
    throw std::runtime_error("manifest references unknown watermarker: " + name);
}

Image load_entry_image(const Dataset& dataset, const ManifestEntry& e) {
    return load_image((fs::path(dataset.root) / e.path).string());
}

std::vector<const ManifestEntry*> entries_in_splits(const Dataset& dataset,
                                                    const std::vector<std::string>& splits) {
    std::set<std::string> wanted(splits.begin(), splits.end());
    std::vector<const ManifestEntry*> out;
    for (const auto& e : dataset.manifest.entries)
        if (wanted.empty() || wanted.count(e.split)) out.push_back(&e);
    return out;
}

}  // namespace

std::vector<ScoreRecord> score_entries(const Dataset& dataset, const DetectorModel& model,
                                       const std::string& split_filter,
                                       const std::optional<AttackSpec>& transform, int jobs) {
    std::vector<const ManifestEntry*> entries =
        split_filter.empty() ? entries_in_splits(dataset, {})
                             : entries_in_splits(dataset, {split_filter});
    std::vector<ScoreRecord> records(entries.size());
    const std::string transform_str = transform ? transform->to_string() : "none";

    parallel_for(entries.size(), jobs, [&](std::size_t i) {
        const ManifestEntry& e = *entries[i];
        Image img = load_entry_image(dataset, e);
        if (transform && transform->family != AttackFamily::Identity)
            img = apply_attack(img, *transform,
                               derive_seed(dataset.seed, e.entry_id + "|sweep|" + transform_str));
        ScoreRecord rec;
        rec.image_id = e.entry_id;
        rec.label = e.variant == "attacked";
        rec.score = score(model, extract_features(img));
        rec.watermarker = e.watermarker;
        rec.attack = e.attack;
        rec.transform = transform_str;
        records[i] = rec;
    });
    return records;
}

DetectorModel train_detector(const Dataset& dataset, const TrainConfig& config,
                             const std::vector<std::string>& splits, int jobs,
                             const std::vector<std::string>& exclude_attacks) {
    std::set<std::string> excluded(exclude_attacks.begin(), exclude_attacks.end());
    std::vector<const ManifestEntry*> entries;
    for (const auto* e : entries_in_splits(dataset, splits)) {
        if (e->variant == "attacked" && excluded.count(e->attack)) continue;
        entries.push_back(e);
    }

    std::vector<TrainRecord> records(entries.size());
    parallel_for(entries.size(), jobs, [&](std::size_t i) {
        const ManifestEntry& e = *entries[i];
        Image img = load_entry_image(dataset, e);
        img = augment(img, derive_seed(dataset.seed, e.entry_id + "|augment"),
                      config.augment_probability);
        records[i].features = extract_features(img);
        records[i].label = e.variant == "attacked";
    });
    return train(records, config);
}

namespace {

struct SurvivalSample {
    double bit_acc = 0.0;
    RhoValue rho;
};

// decode + rho for one watermarked/attacked entry
SurvivalSample survival_sample(const Dataset& dataset, const ManifestEntry& e) {
    const WatermarkerConfig& wm = watermarker_by_name(dataset, e.watermarker);
    const Image img = load_entry_image(dataset, e);
    const WatermarkKey key = keygen(wm.seed, wm.n_bits, wm.chips_per_bit, img.height, img.width);
    const BitMessage expected = BitMessage::from_hex(e.message, wm.n_bits);
    const BitMessage decoded = decode(img, key);
    SurvivalSample s;
    s.bit_acc = bit_accuracy(expected, decoded);
    s.rho = rho_value(wm.n_bits, s.bit_acc);
    return s;
}

double mean(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return v.empty() ? 0.0 : m / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v, double m) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

BenchResult run_benchmark(const Dataset& dataset, const BenchOptions& options) {
    BenchResult result;
    result.report.seed = dataset.seed;

    // config digest: dataset + options, for reproducibility audits
    {
        std::string desc = "seed=" + std::to_string(dataset.seed) + ";train=" +
                           options.train.digest() + ";targets=";
        for (double t : options.fpr_targets) desc += fmt(t) + ",";
        for (const auto& wm : dataset.watermarkers)
            desc += wm.name + ":" + std::to_string(wm.n_bits) + ":" + fmt(wm.target_psnr) + ";";
        for (const auto& a : dataset.attacks) desc += a.to_string() + ";";
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(hash64(desc)));
        result.report.config_digest = hex;
    }

    // --- scores ---
    if (options.external_scores) {
        std::map<std::string, ScoreRecord> by_id;
        for (const auto& r : *options.external_scores) by_id[r.image_id] = r;
        for (const auto& e : dataset.manifest.entries) {
            auto it = by_id.find(e.entry_id);
            if (it == by_id.end())
                throw std::runtime_error("external scores miss entry " + e.entry_id);
            ScoreRecord rec = it->second;
            rec.label = e.variant == "attacked";
            rec.watermarker = e.watermarker;
            rec.attack = e.attack;
            result.scores.push_back(rec);
        }
    } else {
        result.model = options.model ? *options.model
                                     : train_detector(dataset, options.train, {"train"},
                                                      options.jobs);
        result.scores = score_entries(dataset, result.model, "", std::nullopt, options.jobs);
    }

    // --- quality table (PSNR from the manifest, LPIPS/FID ingested) ---
    {
        std::map<std::pair<std::string, std::string>, std::vector<const ManifestEntry*>> cells;
        for (const auto& e : dataset.manifest.entries) {
            if (e.variant == "original") continue;
            const std::string variant = e.variant == "watermarked" ? "watermarked" : e.attack;
            cells[{e.watermarker, variant}].push_back(&e);
        }
        for (const auto& wm : dataset.watermarkers) {
            std::vector<std::string> variants = {"watermarked"};
            for (const auto& a : dataset.attacks) variants.push_back(a.to_string());
            for (const auto& variant : variants) {
                auto it = cells.find({wm.name, variant});
                if (it == cells.end()) continue;
                QualityRow row;
                row.watermarker = wm.name;
                row.variant = variant;
                std::vector<double> psnrs, lpips;
                for (const auto* e : it->second) {
                    if (!e->psnr_infinite) psnrs.push_back(e->psnr_vs_original);
                    auto lit = options.external_quality.lpips_by_entry.find(e->entry_id);
                    if (lit != options.external_quality.lpips_by_entry.end())
                        lpips.push_back(lit->second);
                }
                row.n = static_cast<int>(it->second.size());
                row.low_n = row.n < 10;
                row.psnr_mean = mean(psnrs);
                row.psnr_std = stddev(psnrs, row.psnr_mean);
                if (!lpips.empty()) row.lpips_mean = mean(lpips);
                const std::string cell_key =
                    wm.name + "|" + (variant == "watermarked" ? "none" : variant);
                auto fit = options.external_quality.fid_by_cell.find(cell_key);
                if (fit != options.external_quality.fid_by_cell.end()) row.fid = fit->second;
                result.report.quality.push_back(row);
            }
        }
    }

    // --- survival table (decode over all entries) ---
    {
        std::vector<const ManifestEntry*> marked;
        for (const auto& e : dataset.manifest.entries)
            if (e.variant != "original") marked.push_back(&e);
        std::vector<SurvivalSample> samples(marked.size());
        parallel_for(marked.size(), options.jobs,
                     [&](std::size_t i) { samples[i] = survival_sample(dataset, *marked[i]); });

        std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> cells;
        for (std::size_t i = 0; i < marked.size(); ++i) {
            const auto& e = *marked[i];
            cells[{e.watermarker, e.attack}].push_back(i);
        }
        for (const auto& wm : dataset.watermarkers) {
            std::vector<std::string> attacks = {"none"};
            for (const auto& a : dataset.attacks) attacks.push_back(a.to_string());
            for (const auto& attack : attacks) {
                auto it = cells.find({wm.name, attack});
                if (it == cells.end()) continue;
                SurvivalRow row;
                row.watermarker = wm.name;
                row.attack = attack;
                row.n = static_cast<int>(it->second.size());
                row.low_n = row.n < 10;
                std::vector<double> psnrs, accs;
                std::vector<RhoValue> rhos;
                for (std::size_t i : it->second) {
                    if (!marked[i]->psnr_infinite) psnrs.push_back(marked[i]->psnr_vs_original);
                    accs.push_back(samples[i].bit_acc);
                    rhos.push_back(samples[i].rho);
                }
                row.psnr_mean = mean(psnrs);
                row.bit_acc_mean = mean(accs);
                row.asr = asr(rhos);
                result.report.survival.push_back(row);
            }
        }
    }

    // --- detection table (test split; calibration on train+val negatives) ---
    {
        std::vector<double> calibration_negatives;
        std::set<std::string> calibration_ids;
        std::map<std::string, const ManifestEntry*> entry_by_id;
        for (const auto& e : dataset.manifest.entries) entry_by_id[e.entry_id] = &e;
        for (const auto& r : result.scores) {
            const ManifestEntry* e = entry_by_id.at(r.image_id);
            if (!r.label && (e->split == "train" || e->split == "val")) {
                calibration_negatives.push_back(r.score);
                calibration_ids.insert(r.image_id);
            }
        }
        // the calibration pool must stay disjoint from the test split
        for (const auto& e : dataset.manifest.entries)
            if (e.split == "test" && calibration_ids.count(e.entry_id))
                throw std::runtime_error("calibration pool overlaps the test split at " +
                                         e.entry_id);

        std::vector<TprCell> thresholds;
        for (double target : options.fpr_targets) {
            TprCell cell;
            cell.target_fpr = target;
            try {
                const OperatingPoint op = calibrate(calibration_negatives, target);
                cell.certified = true;
                cell.threshold = op.threshold;
            } catch (const std::invalid_argument&) {
                cell.certified = false;
            }
            thresholds.push_back(cell);
        }

        std::vector<ScoreRecord> test_records;
        for (const auto& r : result.scores)
            if (entry_by_id.at(r.image_id)->split == "test") test_records.push_back(r);

        std::vector<const ScoreRecord*> test_negatives;
        for (const auto& r : test_records)
            if (!r.label) test_negatives.push_back(&r);

        result.report.overall_test_auc = auc(roc(test_records));

        for (const auto& wm : dataset.watermarkers) {
            for (const auto& a : dataset.attacks) {
                const std::string attack = a.to_string();
                DetectionRow row;
                row.watermarker = wm.name;
                row.attack = attack;

                std::vector<ScoreRecord> cell_records;
                for (const auto* r : test_negatives) cell_records.push_back(*r);
                row.n_neg = static_cast<int>(cell_records.size());
                for (const auto& r : test_records)
                    if (r.label && r.watermarker == wm.name && r.attack == attack) {
                        cell_records.push_back(r);
                        row.n_pos++;
                    }
                if (row.n_pos == 0 || row.n_neg == 0) continue;  // absent, not zero
                row.low_n = row.n_pos < 10;
                row.auc_value = auc(roc(cell_records));
                for (const auto& th : thresholds) {
                    TprCell cell = th;
                    if (cell.certified) {
                        int tp = 0, total = 0;
                        for (const auto& r : cell_records)
                            if (r.label) {
                                ++total;
                                if (r.score > cell.threshold) ++tp;
                            }
                        cell.tpr = total ? static_cast<double>(tp) / total : 0.0;
                    }
                    row.tpr.push_back(cell);
                }
                result.report.detection.push_back(row);
            }
        }
    }

    return result;
}

std::vector<RobustnessRow> run_robustness_sweep(const Dataset& dataset, const DetectorModel& model,
                                                int jobs) {
    std::vector<std::optional<AttackSpec>> transforms;
    transforms.push_back(std::nullopt);  // no-transform baseline
    for (int q : {95, 80, 60}) transforms.push_back(AttackSpec::jpeg(q));
    for (double r : {1.0, 2.0, 3.0}) transforms.push_back(AttackSpec::gaussian_blur(r));
    for (double s : {0.75, 0.5, 0.25}) transforms.push_back(AttackSpec::resize_cycle(s));
    for (double sg : {0.02, 0.05, 0.10}) transforms.push_back(AttackSpec::gaussian_noise(sg));
    for (auto& t : transforms)
        if (t) t->role = AttackRole::Postprocess;

    std::vector<RobustnessRow> rows;
    for (const auto& transform : transforms) {
        const auto records = score_entries(dataset, model, "test", transform, jobs);
        RobustnessRow row;
        row.transform = transform ? transform->to_string() : "none";
        for (const auto& r : records) (r.label ? row.n_pos : row.n_neg)++;
        row.curve = roc(records);
        row.auc_value = auc(row.curve);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<LooRow> run_loo(const Dataset& dataset, const TrainConfig& config, int jobs) {
    if (dataset.attacks.size() < 2)
        throw std::invalid_argument("leave-one-attack-out requires at least 2 attacks");

    // features are shared by every held-out model: the augmentation draw is
    // seeded per entry, so it is identical no matter which attack is dropped
    const auto fit_entries = entries_in_splits(dataset, {"train", "val"});
    std::vector<TrainRecord> fit_records(fit_entries.size());
    parallel_for(fit_entries.size(), jobs, [&](std::size_t i) {
        const ManifestEntry& e = *fit_entries[i];
        Image img = load_entry_image(dataset, e);
        img = augment(img, derive_seed(dataset.seed, e.entry_id + "|augment"),
                      config.augment_probability);
        fit_records[i].features = extract_features(img);
        fit_records[i].label = e.variant == "attacked";
    });

    const auto test_entries = entries_in_splits(dataset, {"test"});
    std::vector<FeatureVector> test_features(test_entries.size());
    parallel_for(test_entries.size(), jobs, [&](std::size_t i) {
        test_features[i] = extract_features(load_entry_image(dataset, *test_entries[i]));
    });

    std::vector<LooRow> rows;
    for (const auto& held_out : dataset.attacks) {
        const std::string held_out_str = held_out.to_string();
        std::vector<TrainRecord> subset;
        for (std::size_t i = 0; i < fit_records.size(); ++i) {
            if (fit_entries[i]->variant == "attacked" && fit_entries[i]->attack == held_out_str)
                continue;
            subset.push_back(fit_records[i]);
        }
        const DetectorModel model = train(subset, config);

        std::vector<ScoreRecord> seen, unseen;
        for (std::size_t i = 0; i < test_entries.size(); ++i) {
            const ManifestEntry& e = *test_entries[i];
            ScoreRecord r;
            r.image_id = e.entry_id;
            r.label = e.variant == "attacked";
            r.score = score(model, test_features[i]);
            r.attack = e.attack;
            if (!r.label) {
                seen.push_back(r);
                unseen.push_back(r);
            } else if (e.attack == held_out_str) {
                unseen.push_back(r);
            } else {
                seen.push_back(r);
            }
        }
        LooRow row;
        row.held_out_attack = held_out_str;
        row.seen_auc = auc(roc(seen));
        row.held_out_auc = auc(roc(unseen));
        row.gap = row.seen_auc - row.held_out_auc;
        rows.push_back(row);
    }
    return rows;
}

std::vector<ScoreRecord> ingest_external_scores(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("unreadable file: " + csv_path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty score file: " + csv_path);

    auto split_csv = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    const auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "image_id" || header[1] != "label" ||
        header[2] != "score")
        throw std::runtime_error("score file header must start with image_id,label,score");

    std::vector<ScoreRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() < 3 || cells.size() > header.size())
            throw std::runtime_error("malformed score row at line " + std::to_string(line_no));
        ScoreRecord rec;
        rec.image_id = cells[0];
        try {
            const int label = std::stoi(cells[1]);
            if (label != 0 && label != 1) throw std::invalid_argument("label");
            rec.label = label == 1;
            rec.score = std::stod(cells[2]);
        } catch (const std::exception&) {
            throw std::runtime_error("malformed score row at line " + std::to_string(line_no));
        }
        if (!(rec.score >= 0.0 && rec.score <= 1.0))
            throw std::runtime_error("score outside [0,1] at line " + std::to_string(line_no));
        if (cells.size() > 3) rec.watermarker = cells[3];
        if (cells.size() > 4) rec.attack = cells[4];
        if (cells.size() > 5) rec.transform = cells[5];
        records.push_back(rec);
    }
    return records;
}

void write_scores_csv(const std::vector<ScoreRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("unwritable path: " + path);
    out << "image_id,label,score,watermarker,attack,transform\n";
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.9f", r.score);
        out << r.image_id << "," << (r.label ? 1 : 0) << "," << buf << "," << r.watermarker
            << "," << r.attack << "," << r.transform << "\n";
    }
}

void write_report(const ExperimentReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);

    {
        std::ofstream out(fs::path(out_dir) / "quality.csv");
        out << "watermarker,variant,n,psnr_mean,psnr_std,lpips_mean,fid,low_n\n";
        for (const auto& r : report.quality) {
            out << r.watermarker << "," << r.variant << "," << r.n << "," << fmt(r.psnr_mean)
                << "," << fmt(r.psnr_std) << ","
                << (r.lpips_mean ? fmt(*r.lpips_mean) : std::string("")) << ","
                << (r.fid ? fmt(*r.fid) : std::string("")) << "," << (r.low_n ? 1 : 0) << "\n";
        }
    }
    {
        std::ofstream out(fs::path(out_dir) / "survival.csv");
        out << "watermarker,attack,n,psnr_mean,bit_acc_mean,asr,low_n\n";
        for (const auto& r : report.survival) {
            out << r.watermarker << "," << r.attack << "," << r.n << "," << fmt(r.psnr_mean)
                << "," << fmt(r.bit_acc_mean) << "," << fmt(r.asr) << "," << (r.low_n ? 1 : 0)
                << "\n";
        }
    }
    {
        std::ofstream out(fs::path(out_dir) / "detection.csv");
        out << "watermarker,attack,n_pos,n_neg,auc";
        if (!report.detection.empty())
            for (const auto& cell : report.detection.front().tpr)
                out << ",tpr_at_" << fmt(cell.target_fpr);
        out << ",low_n\n";
        for (const auto& r : report.detection) {
            out << r.watermarker << "," << r.attack << "," << r.n_pos << "," << r.n_neg << ","
                << fmt(r.auc_value);
            for (const auto& cell : r.tpr)
                out << "," << (cell.certified ? fmt(cell.tpr) : std::string("uncertified"));
            out << "," << (r.low_n ? 1 : 0) << "\n";
        }
    }
    if (!report.robustness.empty()) {
        std::ofstream out(fs::path(out_dir) / "robustness.csv");
        out << "transform,n_pos,n_neg,auc\n";
        std::vector<NamedCurve> curves;
        for (const auto& r : report.robustness) {
            out << r.transform << "," << r.n_pos << "," << r.n_neg << "," << fmt(r.auc_value)
                << "\n";
            write_roc_csv(r.curve,
                          (fs::path(out_dir) / ("roc_" + sanitize(r.transform) + ".csv")).string());
            curves.push_back({r.transform, r.curve});
        }
        write_roc_svg(curves, (fs::path(out_dir) / "robustness_roc.svg").string());
    }
    if (!report.loo.empty()) {
        std::ofstream out(fs::path(out_dir) / "loo.csv");
        out << "held_out_attack,seen_auc,held_out_auc,gap\n";
        double seen_sum = 0.0, held_sum = 0.0;
        for (const auto& r : report.loo) {
            out << r.held_out_attack << "," << fmt(r.seen_auc) << "," << fmt(r.held_out_auc)
                << "," << fmt(r.gap) << "\n";
            seen_sum += r.seen_auc;
            held_sum += r.held_out_auc;
        }
        const double n = static_cast<double>(report.loo.size());
        out << "average," << fmt(seen_sum / n) << "," << fmt(held_sum / n) << ","
            << fmt((seen_sum - held_sum) / n) << "\n";
    }
    {
        nlohmann::ordered_json j;
        j["config_digest"] = report.config_digest;
        j["seed"] = report.seed;
        j["overall_test_auc"] = report.overall_test_auc;
        j["n_quality_rows"] = report.quality.size();
        j["n_survival_rows"] = report.survival.size();
        j["n_detection_rows"] = report.detection.size();
        j["n_robustness_rows"] = report.robustness.size();
        j["n_loo_rows"] = report.loo.size();
        std::ofstream out(fs::path(out_dir) / "summary.json");
        out << j.dump(2) << "\n";
    }
}

}  // namespace wrd
