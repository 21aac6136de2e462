#include "emovox/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "emovox/config.hpp"
#include "emovox/corpus.hpp"
#include "emovox/csv.hpp"
#include "emovox/errors.hpp"
#include "emovox/eval.hpp"
#include "emovox/features.hpp"
#include "emovox/fusion.hpp"
#include "emovox/learn.hpp"

namespace emovox::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// All output files are written to a temp sibling and renamed so a failure
// can never leave a truncated file behind.
void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write: " + tmp.string());
        out << content;
        if (!out) throw IoError("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

struct ExtractOutcome {
    FeatureTable table;
    std::vector<std::string> skipped; // utterances with no voiced frames
};

ExtractOutcome extract_all(const CorpusManifest& manifest, int jobs) {
    ExtractOutcome out;
    const auto& entries = manifest.entries;
    std::vector<std::optional<FeatureRecord>> records(entries.size());
    std::vector<std::string> errors(entries.size());

    jobs = std::max(1, jobs);
    std::size_t next = 0;
    while (next < entries.size()) {
        const std::size_t batch =
            std::min<std::size_t>(static_cast<std::size_t>(jobs) * 4, entries.size() - next);
        std::vector<std::future<void>> futures;
        const std::size_t per = (batch + static_cast<std::size_t>(jobs) - 1) /
                                static_cast<std::size_t>(jobs);
        for (std::size_t w = 0; w < static_cast<std::size_t>(jobs); ++w) {
            const std::size_t lo = next + w * per;
            const std::size_t hi = std::min(next + (w + 1) * per, next + batch);
            if (lo >= hi) break;
            futures.push_back(std::async(std::launch::async, [&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i) {
                    try {
                        const Utterance utt = load_utterance(manifest, entries[i]);
                        const FeatureVector fv = extract_feature_vector(utt);
                        FeatureRecord rec;
                        rec.utterance_id = fv.utterance_id;
                        rec.speaker_id = fv.speaker_id;
                        rec.emotion = entries[i].emotion;
                        rec.values = fv.values;
                        records[i] = std::move(rec);
                    } catch (const NoVoicedFramesError&) {
                        // reported on the skip list below
                    } catch (const Error& e) {
                        errors[i] = e.what();
                    }
                }
            }));
        }
        for (auto& f : futures) f.get();
        next += batch;
    }

    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!errors[i].empty()) throw IoError(errors[i]);
        if (records[i]) out.table.push_back(std::move(*records[i]));
        else out.skipped.push_back(entries[i].utterance_id);
    }
    return out;
}

std::string feature_table_csv(const FeatureTable& table) {
    // reuse the cache writer through a temp file-free path: build in memory
    std::ostringstream out;
    out << "utterance_id,speaker_id,emotion";
    for (int i = 1; i <= kFeatureDim; ++i) out << ",f" << i;
    out << "\n";
    for (const auto& rec : table) {
        out << csv::escape_field(rec.utterance_id) << ',' << csv::escape_field(rec.speaker_id)
            << ',' << to_string(rec.emotion);
        for (double v : rec.values) out << ',' << csv::format_double(v);
        out << "\n";
    }
    return out.str();
}

FeatureTable obtain_features(const CorpusManifest& manifest,
                             const std::optional<fs::path>& cache_path, int jobs,
                             std::ostream& log) {
    fs::path path;
    if (cache_path) {
        path = *cache_path;
    } else if (const char* dir = std::getenv("EMOVOX_CACHE_DIR"); dir && *dir) {
        path = fs::path(dir) / "features.csv";
    }
    if (!path.empty() && fs::exists(path)) {
        log << "using feature cache " << path << "\n";
        return read_feature_cache(path);
    }
    auto extracted = extract_all(manifest, jobs);
    for (const auto& id : extracted.skipped) {
        log << "skipped (no voiced frames): " << id << "\n";
    }
    if (!path.empty()) {
        write_file_atomic(path, feature_table_csv(extracted.table));
        log << "wrote feature cache " << path << "\n";
    }
    return extracted.table;
}

// Normalizes a feature table per policy; returns vectors aligned with it.
std::vector<std::vector<double>> normalize_table(const FeatureTable& table,
                                                 NormPolicy policy) {
    std::vector<std::vector<double>> out;
    out.reserve(table.size());
    if (policy == NormPolicy::None) {
        for (const auto& rec : table) out.push_back(rec.values);
        return out;
    }
    if (policy == NormPolicy::TrainGlobal) {
        FeatureTable pooled = table;
        for (auto& rec : pooled) rec.speaker_id = "__all__";
        const auto stats = fit_speaker_stats(pooled);
        for (const auto& rec : table) {
            out.push_back(zscore_apply(rec.values, stats.at("__all__")));
        }
        return out;
    }
    const auto stats = fit_speaker_stats(table);
    for (const auto& rec : table) {
        out.push_back(zscore_apply(rec.values, stats.at(rec.speaker_id)));
    }
    return out;
}

void warn_sparse_speakers(const FeatureTable& table, NormPolicy policy) {
    if (policy != NormPolicy::SpeakerSelf) return;
    std::map<std::string, std::size_t> counts;
    for (const auto& rec : table) ++counts[rec.speaker_id];
    for (const auto& [spk, n] : counts) {
        if (n < 2) {
            std::cerr << "warning: speaker '" << spk << "' has only " << n
                      << " utterance(s); self z-normalization is degenerate\n";
        }
    }
}

RunConfig load_run_config(const std::optional<fs::path>& config_path) {
    return config_path ? RunConfig::load(*config_path) : RunConfig();
}

std::vector<std::string> requested_taxonomies(const std::string& taxonomy) {
    if (taxonomy == "all") return {"emotion6", "apn", "pnn"};
    return {taxonomy};
}

int cmd_extract(const fs::path& manifest_path, fs::path out_path, int jobs) {
    const CorpusManifest manifest = load_manifest(manifest_path);
    if (out_path.empty()) {
        if (const char* dir = std::getenv("EMOVOX_CACHE_DIR"); dir && *dir) {
            out_path = fs::path(dir) / (manifest_path.stem().string() + "_features.csv");
        } else {
            throw ValidationError("extract: --out (or EMOVOX_CACHE_DIR) is required");
        }
    }
    auto extracted = extract_all(manifest, jobs);
    for (const auto& id : extracted.skipped) {
        std::cerr << "skipped (no voiced frames): " << id << "\n";
    }
    write_file_atomic(out_path, feature_table_csv(extracted.table));
    std::cout << "wrote " << extracted.table.size() << " feature rows to " << out_path
              << " (" << extracted.skipped.size() << " skipped)\n";
    return 0;
}

int cmd_train(const fs::path& cache_path, const RunConfig& cfg, const fs::path& model_path) {
    if (cfg.taxonomy == "all") {
        throw ValidationError("train: pick one taxonomy (emotion6|apn|pnn), not 'all'");
    }
    const Taxonomy taxonomy = Taxonomy::by_name(cfg.taxonomy);
    const FeatureTable table = read_feature_cache(cache_path);
    if (table.empty()) throw EmptyInputError("train: empty feature cache");

    warn_sparse_speakers(table, cfg.norm_policy);
    const auto X = normalize_table(table, cfg.norm_policy);
    std::vector<int> class_ids;
    class_ids.reserve(table.size());
    for (const auto& rec : table) class_ids.push_back(taxonomy.class_of(rec.emotion));

    const OaaEnsemble ensemble = train_oaa_ensemble(X, class_ids, taxonomy,
                                                    cfg.ensemble_config());
    save_ensemble(ensemble, model_path);
    std::cout << "wrote model with " << ensemble.models.size() << " binary classifiers to "
              << model_path << "\n";
    return 0;
}

int cmd_classify(const fs::path& model_path, const std::optional<fs::path>& cache_path,
                 const std::optional<fs::path>& wav_path, std::optional<double> threshold,
                 std::optional<double> coverage, const fs::path& out_path) {
    const OaaEnsemble ensemble = load_ensemble(model_path);

    FeatureTable table;
    if (cache_path) {
        table = read_feature_cache(*cache_path);
    } else if (wav_path) {
        CorpusManifest dummy;
        dummy.base_dir = wav_path->has_parent_path() ? wav_path->parent_path()
                                                     : fs::path(".");
        ManifestEntry entry;
        entry.utterance_id = wav_path->stem().string();
        entry.wav_path = wav_path->filename().string();
        entry.speaker_id = "unknown";
        const Utterance utt = load_utterance(dummy, entry);
        const FeatureVector fv = extract_feature_vector(utt);
        FeatureRecord rec;
        rec.utterance_id = fv.utterance_id;
        rec.speaker_id = fv.speaker_id;
        rec.values = fv.values;
        table.push_back(std::move(rec));
    } else {
        throw ValidationError("classify: either --cache or --wav is required");
    }
    if (table.empty()) throw EmptyInputError("classify: no input feature rows");

    double reject_threshold = ensemble.default_threshold;
    if (threshold && coverage) {
        throw ValidationError("classify: give either --threshold or --coverage, not both");
    }
    if (threshold) {
        reject_threshold = *threshold;
    } else if (coverage) {
        bool found = false;
        for (const auto& [cov, thr] : ensemble.coverage_thresholds) {
            if (std::abs(cov - *coverage) < 1e-9) {
                reject_threshold = thr;
                found = true;
                break;
            }
        }
        if (!found) {
            throw ValidationError("classify: model has no calibrated threshold for coverage " +
                                  std::to_string(*coverage));
        }
    }

    warn_sparse_speakers(table, ensemble.norm_policy);
    const auto X = normalize_table(table, ensemble.norm_policy);

    std::ostringstream out;
    out << classification_csv_header(ensemble.taxonomy) << "\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        ClassificationResult res = classify_with_rejection(ensemble, X[i], reject_threshold);
        res.utterance_id = table[i].utterance_id;
        out << classification_csv_row(ensemble.taxonomy, res) << "\n";
    }
    if (out_path.empty()) {
        std::cout << out.str();
    } else {
        write_file_atomic(out_path, out.str());
        std::cout << "wrote " << table.size() << " classifications to " << out_path << "\n";
    }
    return 0;
}

int cmd_evaluate(const fs::path& manifest_path, const RunConfig& cfg,
                 const std::optional<fs::path>& cache_path,
                 const std::optional<fs::path>& human_csv, const fs::path& out_base) {
    const CorpusManifest manifest = load_manifest(manifest_path);
    const FeatureTable table = obtain_features(manifest, cache_path, cfg.effective_jobs(),
                                               std::cerr);
    if (table.empty()) throw EmptyInputError("evaluate: no extractable utterances");

    std::optional<AnnotationSet> annotations;
    if (human_csv) annotations = import_human_annotations(*human_csv, manifest);

    json doc;
    doc["format_version"] = 1;
    doc["config"] = json::parse("{}");
    {
        json cj;
        std::istringstream cfg_stream(cfg.serialize());
        std::string line;
        while (std::getline(cfg_stream, line)) {
            const auto eq = line.find(" = ");
            if (eq != std::string::npos) cj[line.substr(0, eq)] = line.substr(eq + 3);
        }
        doc["config"] = cj;
    }

    std::ostringstream text;
    json system_json, human_json;
    for (const std::string& name : requested_taxonomies(cfg.taxonomy)) {
        const Taxonomy taxonomy = Taxonomy::by_name(name);
        const EvaluationReport report =
            run_loso(table, taxonomy, cfg.ensemble_config(), cfg.effective_jobs());
        text << render_system_report_text(report) << "\n";
        system_json[name] = system_report_json(report);
        if (annotations) {
            const HumanReport hr = human_report(*annotations, manifest, taxonomy);
            text << render_human_report_text(hr) << "\n";
            human_json[name] = human_report_json(hr);
        }
    }
    doc["system"] = system_json;
    if (annotations) doc["human"] = human_json;

    const fs::path text_path = out_base.string() + ".txt";
    const fs::path json_path = out_base.string() + ".json";
    write_file_atomic(text_path, text.str());
    write_file_atomic(json_path, doc.dump(2) + "\n");
    std::cout << text.str();
    std::cout << "wrote " << text_path << " and " << json_path << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"speech emotion classification toolkit"};
    app.require_subcommand(1);

    // extract
    auto* extract = app.add_subcommand("extract", "extract features into a cache CSV");
    std::string ex_manifest, ex_out;
    int ex_jobs = 0;
    extract->add_option("--manifest", ex_manifest, "corpus manifest CSV")->required();
    extract->add_option("--out", ex_out, "output feature cache path");
    extract->add_option("--jobs", ex_jobs, "worker count (0 = auto)");

    // train
    auto* train = app.add_subcommand("train", "train an OAA ensemble from a feature cache");
    std::string tr_cache, tr_config, tr_taxonomy, tr_out;
    std::optional<std::uint64_t> tr_seed;
    train->add_option("--cache", tr_cache, "feature cache CSV")->required();
    train->add_option("--config", tr_config, "run config file");
    train->add_option("--taxonomy", tr_taxonomy, "emotion6|apn|pnn");
    train->add_option("--seed", tr_seed, "override config seed");
    train->add_option("--model", tr_out, "output model path");
    train->add_option("--out", tr_out, "output model path (alias of --model)");

    // classify
    auto* classify = app.add_subcommand("classify", "classify cached features or one wav");
    std::string cl_model, cl_cache, cl_wav, cl_out;
    std::optional<double> cl_threshold, cl_coverage;
    classify->add_option("--model", cl_model, "model file")->required();
    classify->add_option("--cache", cl_cache, "feature cache CSV");
    classify->add_option("--wav", cl_wav, "single wav file");
    classify->add_option("--threshold", cl_threshold, "rejection threshold in [0,1]");
    classify->add_option("--coverage", cl_coverage, "use the model's calibrated threshold");
    classify->add_option("--out", cl_out, "output CSV (default stdout)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "LOSO evaluation and reports");
    std::string ev_manifest, ev_config, ev_cache, ev_human, ev_out, ev_taxonomy, ev_coverage;
    std::optional<std::uint64_t> ev_seed;
    std::optional<int> ev_jobs;
    evaluate->add_option("--manifest", ev_manifest, "corpus manifest CSV")->required();
    evaluate->add_option("--config", ev_config, "run config file");
    evaluate->add_option("--cache", ev_cache, "feature cache path (reused when present)");
    evaluate->add_option("--human-csv", ev_human, "human annotation CSV");
    evaluate->add_option("--taxonomy", ev_taxonomy, "emotion6|apn|pnn|all");
    evaluate->add_option("--coverage", ev_coverage, "comma-separated coverage grid");
    evaluate->add_option("--seed", ev_seed, "override config seed");
    evaluate->add_option("--jobs", ev_jobs, "worker count (0 = auto)");
    evaluate->add_option("--out", ev_out, "report base path (.txt/.json appended)")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend()); // CLI11 wants reversed args
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (extract->parsed()) {
            return cmd_extract(ex_manifest, ex_out, ex_jobs > 0 ? ex_jobs : RunConfig().effective_jobs());
        }
        if (train->parsed()) {
            RunConfig cfg = load_run_config(
                tr_config.empty() ? std::nullopt : std::optional<fs::path>(tr_config));
            if (!tr_taxonomy.empty()) cfg.taxonomy = tr_taxonomy;
            if (tr_seed) cfg.seed = *tr_seed;
            if (tr_out.empty()) throw ValidationError("train: --model/--out is required");
            return cmd_train(tr_cache, cfg, tr_out);
        }
        if (classify->parsed()) {
            return cmd_classify(cl_model,
                                cl_cache.empty() ? std::nullopt : std::optional<fs::path>(cl_cache),
                                cl_wav.empty() ? std::nullopt : std::optional<fs::path>(cl_wav),
                                cl_threshold, cl_coverage, cl_out);
        }
        if (evaluate->parsed()) {
            RunConfig cfg = load_run_config(
                ev_config.empty() ? std::nullopt : std::optional<fs::path>(ev_config));
            if (!ev_taxonomy.empty()) cfg.taxonomy = ev_taxonomy;
            if (ev_seed) cfg.seed = *ev_seed;
            if (ev_jobs) cfg.jobs = *ev_jobs;
            if (!ev_coverage.empty()) {
                std::vector<double> grid;
                std::stringstream ss(ev_coverage);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (!item.empty()) grid.push_back(csv::parse_double(item, "--coverage"));
                }
                if (grid.empty()) throw ValidationError("--coverage: empty list");
                cfg.coverage = grid;
            }
            return cmd_evaluate(ev_manifest, cfg,
                                ev_cache.empty() ? std::nullopt : std::optional<fs::path>(ev_cache),
                                ev_human.empty() ? std::nullopt : std::optional<fs::path>(ev_human),
                                ev_out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace emovox::cli
