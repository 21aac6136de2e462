#include "emovox/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

#include "emovox/csv.hpp"
#include "emovox/errors.hpp"
#include "emovox/learn.hpp"
#include "emovox/rng.hpp"

namespace emovox {

using json = nlohmann::ordered_json;

namespace {

std::vector<LosoFold> loso_split_pairs(
    const std::vector<std::pair<std::string, std::string>>& id_speaker) {
    std::set<std::string> speakers;
    for (const auto& [id, spk] : id_speaker) speakers.insert(spk);
    if (speakers.size() < 2) {
        throw TooFewSpeakersError("LOSO needs at least 2 speakers, got " +
                                  std::to_string(speakers.size()));
    }
    std::vector<LosoFold> folds;
    for (const auto& spk : speakers) {
        LosoFold fold;
        fold.test_speaker = spk;
        for (const auto& [id, s] : id_speaker) {
            (s == spk ? fold.test_ids : fold.train_ids).push_back(id);
        }
        folds.push_back(std::move(fold));
    }
    return folds;
}

} // namespace

std::vector<LosoFold> loso_split(const CorpusManifest& manifest) {
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) pairs.emplace_back(e.utterance_id, e.speaker_id);
    return loso_split_pairs(pairs);
}

std::vector<LosoFold> loso_split(const FeatureTable& table) {
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(table.size());
    for (const auto& r : table) pairs.emplace_back(r.utterance_id, r.speaker_id);
    return loso_split_pairs(pairs);
}

ConfusionMatrix confusion_matrix(const std::vector<int>& truths,
                                 const std::vector<int>& predictions,
                                 std::size_t n_classes) {
    if (truths.size() != predictions.size()) {
        throw LengthMismatchError("confusion_matrix: |truths| != |predictions|");
    }
    ConfusionMatrix cm;
    cm.counts.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
    cm.percent.assign(n_classes, std::vector<double>(n_classes, 0.0));
    cm.empty_rows.assign(n_classes, true);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const auto t = static_cast<std::size_t>(truths[i]);
        const auto p = static_cast<std::size_t>(predictions[i]);
        if (t >= n_classes || p >= n_classes) {
            throw ValidationError("confusion_matrix: class index out of range");
        }
        ++cm.counts[t][p];
    }
    for (std::size_t t = 0; t < n_classes; ++t) {
        std::size_t row_total = 0;
        for (std::size_t p = 0; p < n_classes; ++p) row_total += cm.counts[t][p];
        if (row_total == 0) continue;
        cm.empty_rows[t] = false;
        for (std::size_t p = 0; p < n_classes; ++p) {
            cm.percent[t][p] = 100.0 * static_cast<double>(cm.counts[t][p]) /
                               static_cast<double>(row_total);
        }
    }
    return cm;
}

std::vector<CoveragePoint> coverage_accuracy(const std::vector<ScoredResult>& results,
                                             const std::vector<double>& coverages) {
    if (results.empty()) throw EmptyInputError("coverage_accuracy: no results");
    std::vector<double> confidences(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) confidences[i] = results[i].max_confidence;

    std::vector<CoveragePoint> out;
    for (double coverage : coverages) {
        CoveragePoint point;
        point.coverage_target = coverage;
        point.threshold = calibrate_threshold(confidences, coverage);
        std::size_t n_cl = 0, ok_cl = 0, n_rj = 0, ok_rj = 0;
        for (const auto& r : results) {
            if (r.max_confidence >= point.threshold) {
                ++n_cl;
                ok_cl += r.correct ? 1 : 0;
            } else {
                ++n_rj;
                ok_rj += r.correct ? 1 : 0;
            }
        }
        point.n_classified = n_cl;
        point.n_rejected = n_rj;
        point.realized_coverage = static_cast<double>(n_cl) / static_cast<double>(results.size());
        point.accuracy_classified =
            n_cl ? static_cast<double>(ok_cl) / static_cast<double>(n_cl) : 0.0;
        if (n_rj > 0) {
            point.accuracy_rejected = static_cast<double>(ok_rj) / static_cast<double>(n_rj);
        }
        out.push_back(point);
    }
    return out;
}

namespace {

struct FoldOutput {
    FoldSummary summary;
    std::vector<UtteranceOutcome> outcomes;
};

FoldOutput run_fold(const FeatureTable& table, const LosoFold& fold, int fold_index,
                    const Taxonomy& taxonomy, const EnsembleConfig& cfg) {
    std::set<std::string> test_ids(fold.test_ids.begin(), fold.test_ids.end());

    FeatureTable train_records, test_records;
    for (const auto& rec : table) {
        (test_ids.count(rec.utterance_id) ? test_records : train_records).push_back(rec);
    }

    // z-score normalization: each training speaker by its own stats
    std::vector<std::vector<double>> train_X;
    std::vector<int> train_cls;
    if (cfg.norm_policy == NormPolicy::SpeakerSelf ||
        cfg.norm_policy == NormPolicy::TrainGlobal) {
        const auto stats = fit_speaker_stats(train_records);
        for (const auto& rec : train_records) {
            train_X.push_back(zscore_apply(rec.values, stats.at(rec.speaker_id)));
            train_cls.push_back(taxonomy.class_of(rec.emotion));
        }
    } else {
        for (const auto& rec : train_records) {
            train_X.push_back(rec.values);
            train_cls.push_back(taxonomy.class_of(rec.emotion));
        }
    }

    // test speaker normalization per policy
    std::vector<std::vector<double>> test_X;
    if (cfg.norm_policy == NormPolicy::SpeakerSelf) {
        const auto stats = fit_speaker_stats(test_records);
        for (const auto& rec : test_records) {
            test_X.push_back(zscore_apply(rec.values, stats.at(rec.speaker_id)));
        }
    } else if (cfg.norm_policy == NormPolicy::TrainGlobal) {
        FeatureTable pooled = train_records;
        for (auto& rec : pooled) rec.speaker_id = "__train__";
        const auto stats = fit_speaker_stats(pooled);
        for (const auto& rec : test_records) {
            test_X.push_back(zscore_apply(rec.values, stats.at("__train__")));
        }
    } else {
        for (const auto& rec : test_records) test_X.push_back(rec.values);
    }

    EnsembleConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, "fold/" + fold.test_speaker);

    OaaEnsemble ensemble;
    try {
        ensemble = train_oaa_ensemble(train_X, train_cls, taxonomy, fold_cfg);
    } catch (const Error& e) {
        throw ValidationError("fold '" + fold.test_speaker + "': " + e.what());
    }

    FoldOutput out;
    out.summary.speaker = fold.test_speaker;
    out.summary.n = test_records.size();
    for (const auto& [coverage, threshold] : ensemble.coverage_thresholds) {
        out.summary.thresholds.push_back(threshold);
    }

    for (std::size_t i = 0; i < test_records.size(); ++i) {
        const auto& rec = test_records[i];
        ClassificationResult res = classify(ensemble, test_X[i]);
        UtteranceOutcome outcome;
        outcome.utterance_id = rec.utterance_id;
        outcome.speaker_id = rec.speaker_id;
        outcome.fold = fold_index;
        outcome.truth = taxonomy.class_of(rec.emotion);
        outcome.predicted = res.predicted;
        outcome.max_confidence = res.max_confidence;
        if (outcome.truth == outcome.predicted) ++out.summary.correct;
        out.outcomes.push_back(std::move(outcome));
    }
    out.summary.accuracy = out.summary.n
                               ? static_cast<double>(out.summary.correct) /
                                     static_cast<double>(out.summary.n)
                               : 0.0;
    return out;
}

} // namespace

EvaluationReport run_loso(const FeatureTable& table, const Taxonomy& taxonomy,
                          const EnsembleConfig& cfg, int jobs) {
    if (table.empty()) throw EmptyInputError("run_loso: empty feature table");
    const auto folds = loso_split(table);
    jobs = std::max(1, jobs);

    std::vector<FoldOutput> outputs(folds.size());
    std::size_t next = 0;
    while (next < folds.size()) {
        const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                                        folds.size() - next);
        std::vector<std::future<FoldOutput>> futures;
        for (std::size_t k = 0; k < batch; ++k) {
            const std::size_t f = next + k;
            futures.push_back(std::async(std::launch::async, [&, f] {
                return run_fold(table, folds[f], static_cast<int>(f), taxonomy, cfg);
            }));
        }
        for (std::size_t k = 0; k < batch; ++k) outputs[next + k] = futures[k].get();
        next += batch;
    }

    EvaluationReport report;
    report.taxonomy_name = taxonomy.name;
    report.classes = taxonomy.classes;
    report.coverage_grid = cfg.coverage_grid;

    std::vector<int> truths, preds;
    double macro_sum = 0.0;
    std::size_t female_n = 0, female_ok = 0, male_n = 0, male_ok = 0;
    for (const auto& out : outputs) {
        report.folds.push_back(out.summary);
        macro_sum += out.summary.accuracy;
        report.total += out.summary.n;
        report.correct += out.summary.correct;
        for (const auto& o : out.outcomes) {
            truths.push_back(o.truth);
            preds.push_back(o.predicted);
            const bool ok = o.truth == o.predicted;
            switch (speaker_gender(o.speaker_id)) {
                case Gender::Female:
                    ++female_n;
                    female_ok += ok ? 1 : 0;
                    break;
                case Gender::Male:
                    ++male_n;
                    male_ok += ok ? 1 : 0;
                    break;
                default: break;
            }
            report.outcomes.push_back(o);
        }
    }
    report.overall_accuracy =
        report.total ? static_cast<double>(report.correct) / static_cast<double>(report.total)
                     : 0.0;
    report.macro_accuracy = folds.empty() ? 0.0 : macro_sum / static_cast<double>(folds.size());
    if (female_n) {
        report.accuracy_female_speakers =
            static_cast<double>(female_ok) / static_cast<double>(female_n);
    }
    if (male_n) {
        report.accuracy_male_speakers =
            static_cast<double>(male_ok) / static_cast<double>(male_n);
    }
    report.confusion = confusion_matrix(truths, preds, taxonomy.classes.size());

    // coverage rows with the per-fold training-calibrated thresholds
    for (std::size_t ci = 0; ci < cfg.coverage_grid.size(); ++ci) {
        CoveragePoint point;
        point.coverage_target = cfg.coverage_grid[ci];
        double threshold_sum = 0.0;
        for (const auto& out : outputs) threshold_sum += out.summary.thresholds[ci];
        point.threshold = outputs.empty() ? 0.0
                                          : threshold_sum / static_cast<double>(outputs.size());
        std::size_t n_cl = 0, ok_cl = 0, n_rj = 0, ok_rj = 0;
        for (const auto& o : report.outcomes) {
            const double fold_threshold =
                outputs[static_cast<std::size_t>(o.fold)].summary.thresholds[ci];
            const bool ok = o.truth == o.predicted;
            if (o.max_confidence >= fold_threshold) {
                ++n_cl;
                ok_cl += ok ? 1 : 0;
            } else {
                ++n_rj;
                ok_rj += ok ? 1 : 0;
            }
        }
        point.n_classified = n_cl;
        point.n_rejected = n_rj;
        point.realized_coverage =
            report.total ? static_cast<double>(n_cl) / static_cast<double>(report.total) : 0.0;
        point.accuracy_classified =
            n_cl ? static_cast<double>(ok_cl) / static_cast<double>(n_cl) : 0.0;
        if (n_rj > 0) {
            point.accuracy_rejected = static_cast<double>(ok_rj) / static_cast<double>(n_rj);
        }
        report.coverage.push_back(point);
    }
    return report;
}

// ---- human annotations ----

AnnotationSet import_human_annotations(const std::filesystem::path& path,
                                       const CorpusManifest& manifest) {
    const csv::Table table = csv::read_file(path);
    const std::vector<std::string> base = {"worker_id",    "utterance_id",
                                           "emotion_response", "apn_response",
                                           "pnn_response", "confidence_flag"};
    bool with_demographics;
    if (table.header.size() == 8 &&
        std::equal(base.begin(), base.end(), table.header.begin()) &&
        table.header[6] == "worker_gender" && table.header[7] == "worker_age") {
        with_demographics = true;
    } else if (table.header.size() == 6 &&
               std::equal(base.begin(), base.end(), table.header.begin())) {
        with_demographics = false;
    } else {
        throw FormatError("bad annotation header in " + path.string());
    }

    std::set<std::string> known_ids;
    for (const auto& e : manifest.entries) known_ids.insert(e.utterance_id);

    AnnotationSet out;
    out.has_demographics = with_demographics;
    std::size_t row_no = 1;
    for (const auto& row : table.rows) {
        ++row_no;
        const std::string where = path.string() + ": row " + std::to_string(row_no);
        AnnotationRow rec;
        rec.worker_id = row[0];
        rec.utterance_id = row[1];
        if (!known_ids.count(rec.utterance_id)) {
            throw ValidationError(where + " references unknown utterance_id '" +
                                  rec.utterance_id + "'");
        }
        const auto emotion = parse_emotion(row[2]);
        if (!emotion) throw FormatError(where + ": unknown emotion_response '" + row[2] + "'");
        rec.emotion_response = *emotion;
        const auto apn = parse_arousal(row[3]);
        if (!apn) throw FormatError(where + ": unknown apn_response '" + row[3] + "'");
        rec.apn_response = *apn;
        const auto pnn = parse_valence(row[4]);
        if (!pnn) throw FormatError(where + ": unknown pnn_response '" + row[4] + "'");
        rec.pnn_response = *pnn;
        if (row[5] == "confident") rec.confident = true;
        else if (row[5] == "unsure") rec.confident = false;
        else throw FormatError(where + ": confidence_flag must be confident|unsure, got '" +
                               row[5] + "'");
        if (with_demographics) {
            std::string g = row[6];
            std::transform(g.begin(), g.end(), g.begin(), ::tolower);
            if (g == "f" || g == "female") rec.worker_gender = "female";
            else if (g == "m" || g == "male") rec.worker_gender = "male";
            else if (!g.empty()) rec.worker_gender = "";
            if (!row[7].empty()) {
                try {
                    rec.worker_age = std::stoi(row[7]);
                } catch (...) {
                    throw FormatError(where + ": worker_age must be an integer, got '" +
                                      row[7] + "'");
                }
            }
        }
        out.rows.push_back(std::move(rec));
    }
    return out;
}

double SplitAccuracy::accuracy() const {
    return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
}

double HumanGroupReport::accuracy() const {
    return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
}

namespace {

int response_class(const AnnotationRow& row, const Taxonomy& taxonomy) {
    std::string_view label;
    if (taxonomy.name == "emotion6") label = to_string(row.emotion_response);
    else if (taxonomy.name == "apn") label = to_string(row.apn_response);
    else if (taxonomy.name == "pnn") label = to_string(row.pnn_response);
    else throw ValidationError("unknown taxonomy: " + taxonomy.name);
    for (std::size_t i = 0; i < taxonomy.classes.size(); ++i) {
        if (taxonomy.classes[i] == label) return static_cast<int>(i);
    }
    throw ValidationError("response label not in taxonomy");
}

HumanGroupReport build_group(const std::string& group,
                             const std::vector<const AnnotationRow*>& rows,
                             const std::map<std::string, const ManifestEntry*>& by_id,
                             const Taxonomy& taxonomy) {
    HumanGroupReport rep;
    rep.group = group;
    std::size_t female_n = 0, female_ok = 0, male_n = 0, male_ok = 0;
    for (const auto* row : rows) {
        const ManifestEntry* entry = by_id.at(row->utterance_id);
        const int truth = taxonomy.class_of(entry->emotion);
        const int pred = response_class(*row, taxonomy);
        const bool ok = truth == pred;
        ++rep.n;
        rep.correct += ok ? 1 : 0;
        switch (speaker_gender(entry->speaker_id)) {
            case Gender::Female:
                ++female_n;
                female_ok += ok ? 1 : 0;
                break;
            case Gender::Male:
                ++male_n;
                male_ok += ok ? 1 : 0;
                break;
            default: break;
        }
        auto& split = row->confident ? rep.confident : rep.unsure;
        ++split.n;
        split.correct += ok ? 1 : 0;
    }
    if (female_n) {
        rep.accuracy_female_speakers =
            static_cast<double>(female_ok) / static_cast<double>(female_n);
    }
    if (male_n) {
        rep.accuracy_male_speakers = static_cast<double>(male_ok) / static_cast<double>(male_n);
    }
    if (rep.n) {
        rep.confident.prevalence = static_cast<double>(rep.confident.n) /
                                   static_cast<double>(rep.n);
        rep.unsure.prevalence = static_cast<double>(rep.unsure.n) / static_cast<double>(rep.n);
    }
    return rep;
}

std::string age_bucket(int age) {
    if (age >= 18 && age <= 29) return "18-29";
    if (age >= 30 && age <= 39) return "30-39";
    if (age >= 40 && age <= 49) return "40-49";
    if (age >= 50 && age <= 59) return "50-59";
    return "other";
}

} // namespace

HumanReport human_report(const AnnotationSet& annotations, const CorpusManifest& manifest,
                         const Taxonomy& taxonomy) {
    if (annotations.rows.empty()) throw EmptyInputError("human_report: no annotations");

    std::map<std::string, const ManifestEntry*> by_id;
    for (const auto& e : manifest.entries) by_id[e.utterance_id] = &e;

    HumanReport report;
    report.taxonomy_name = taxonomy.name;
    report.classes = taxonomy.classes;

    std::vector<const AnnotationRow*> all_rows, female_rows, male_rows;
    for (const auto& row : annotations.rows) {
        all_rows.push_back(&row);
        if (row.worker_gender == "female") female_rows.push_back(&row);
        else if (row.worker_gender == "male") male_rows.push_back(&row);
    }
    report.all = build_group("all", all_rows, by_id, taxonomy);
    if (!female_rows.empty()) {
        report.female_workers = build_group("female", female_rows, by_id, taxonomy);
    }
    if (!male_rows.empty()) {
        report.male_workers = build_group("male", male_rows, by_id, taxonomy);
    }

    std::vector<int> truths, preds;
    for (const auto& row : annotations.rows) {
        truths.push_back(taxonomy.class_of(by_id.at(row.utterance_id)->emotion));
        preds.push_back(response_class(row, taxonomy));
    }
    report.confusion = confusion_matrix(truths, preds, taxonomy.classes.size());

    if (annotations.has_demographics) {
        for (const auto& row : annotations.rows) {
            const std::string gender = row.worker_gender.empty() ? "na" : row.worker_gender;
            const std::string bucket = row.worker_age ? age_bucket(*row.worker_age) : "na";
            ++report.counts_by_gender_age[gender][bucket];
        }
    }
    return report;
}

// ---- rendering ----

namespace {

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
    return buf;
}

std::string fixed1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

void render_confusion(std::ostringstream& out, const ConfusionMatrix& cm,
                      const std::vector<std::string>& classes) {
    out << "Confusion matrix (rows = GT, row %)\n";
    out << "             ";
    for (const auto& c : classes) out << ' ' << c.substr(0, 8);
    out << "\n";
    for (std::size_t t = 0; t < classes.size(); ++t) {
        char label[32];
        std::snprintf(label, sizeof(label), "%-8s (GT)", classes[t].substr(0, 8).c_str());
        out << label;
        for (std::size_t p = 0; p < classes.size(); ++p) {
            char cell[32];
            std::snprintf(cell, sizeof(cell), " %8.1f", cm.percent[t][p]);
            out << cell;
        }
        if (cm.empty_rows[t]) out << "  (no samples)";
        out << "\n";
    }
}

} // namespace

std::string render_system_report_text(const EvaluationReport& report) {
    std::ostringstream out;
    out << "== " << report.taxonomy_name << ": automatic system (LOSO) ==\n";
    out << "Accuracy (%)    Overall";
    if (report.accuracy_female_speakers) out << "   Female";
    if (report.accuracy_male_speakers) out << "     Male";
    out << "\n";
    out << "Computer System " << pct(report.overall_accuracy);
    if (report.accuracy_female_speakers) out << "      " << pct(*report.accuracy_female_speakers);
    if (report.accuracy_male_speakers) out << "     " << pct(*report.accuracy_male_speakers);
    out << "\n";
    out << "Fold-macro accuracy: " << pct(report.macro_accuracy) << "\n\n";

    if (!report.coverage.empty()) {
        out << "Coverage   Threshold(avg)  Classified      Acc(classified)  Acc(rejected)\n";
        for (const auto& c : report.coverage) {
            char line[160];
            std::snprintf(line, sizeof(line), "%5.1f%%    %-15.4f %5zu/%-8zu  %-16s %s\n",
                          c.coverage_target * 100.0, c.threshold, c.n_classified,
                          c.n_classified + c.n_rejected, pct(c.accuracy_classified).c_str(),
                          c.accuracy_rejected ? pct(*c.accuracy_rejected).c_str() : "-");
            out << line;
        }
        out << "\n";
    }

    render_confusion(out, report.confusion, report.classes);
    out << "\nPer-fold accuracy:\n";
    for (const auto& f : report.folds) {
        out << "  " << f.speaker << ": " << pct(f.accuracy) << " (n=" << f.n << ")\n";
    }
    return out.str();
}

std::string render_human_report_text(const HumanReport& report) {
    std::ostringstream out;
    out << "== " << report.taxonomy_name << ": human coders ==\n";
    out << "Accuracy (%)     Overall  Female-spk  Male-spk  Confident        Unsure\n";
    auto row = [&](const std::string& name, const HumanGroupReport& g) {
        char line[200];
        std::string conf = pct(g.confident.accuracy()) + " (" + pct(g.confident.prevalence) + "%)";
        std::string uns = pct(g.unsure.accuracy()) + " (" + pct(g.unsure.prevalence) + "%)";
        if (g.confident.n == 0) conf = "-";
        if (g.unsure.n == 0) uns = "-";
        std::snprintf(line, sizeof(line), "%-16s %-8s %-11s %-9s %-16s %s\n", name.c_str(),
                      pct(g.accuracy()).c_str(),
                      g.accuracy_female_speakers ? pct(*g.accuracy_female_speakers).c_str() : "-",
                      g.accuracy_male_speakers ? pct(*g.accuracy_male_speakers).c_str() : "-",
                      conf.c_str(), uns.c_str());
        out << line;
    };
    row("All Turkers", report.all);
    if (report.female_workers) row("Female Turkers", *report.female_workers);
    if (report.male_workers) row("Male Turkers", *report.male_workers);
    out << "\n";
    render_confusion(out, report.confusion, report.classes);

    if (!report.counts_by_gender_age.empty()) {
        out << "\nSamples classified by worker gender and age\n";
        for (const auto& [gender, buckets] : report.counts_by_gender_age) {
            out << "  " << gender << ":";
            for (const auto& [bucket, count] : buckets) {
                out << "  " << bucket << "=" << count;
            }
            out << "\n";
        }
    }
    return out.str();
}

namespace {

json confusion_json(const ConfusionMatrix& cm, const std::vector<std::string>& classes) {
    json j;
    j["classes"] = classes;
    j["counts"] = cm.counts;
    j["row_percent"] = cm.percent;
    j["empty_rows"] = cm.empty_rows;
    return j;
}

json coverage_json(const CoveragePoint& c) {
    json j;
    j["coverage_target"] = c.coverage_target;
    j["realized_coverage"] = c.realized_coverage;
    j["threshold"] = c.threshold;
    j["n_classified"] = c.n_classified;
    j["n_rejected"] = c.n_rejected;
    j["accuracy_classified"] = c.accuracy_classified;
    if (c.accuracy_rejected) j["accuracy_rejected"] = *c.accuracy_rejected;
    else j["accuracy_rejected"] = nullptr;
    return j;
}

} // namespace

json system_report_json(const EvaluationReport& report) {
    json j;
    j["taxonomy"] = report.taxonomy_name;
    j["classes"] = report.classes;
    j["total"] = report.total;
    j["correct"] = report.correct;
    j["overall_accuracy"] = report.overall_accuracy;
    j["macro_accuracy"] = report.macro_accuracy;
    if (report.accuracy_female_speakers) {
        j["accuracy_female_speakers"] = *report.accuracy_female_speakers;
    }
    if (report.accuracy_male_speakers) {
        j["accuracy_male_speakers"] = *report.accuracy_male_speakers;
    }
    json folds = json::array();
    for (const auto& f : report.folds) {
        folds.push_back({{"speaker", f.speaker},
                         {"n", f.n},
                         {"correct", f.correct},
                         {"accuracy", f.accuracy},
                         {"thresholds", f.thresholds}});
    }
    j["folds"] = folds;
    j["confusion"] = confusion_json(report.confusion, report.classes);
    json coverage = json::array();
    for (const auto& c : report.coverage) coverage.push_back(coverage_json(c));
    j["coverage"] = coverage;
    json outcomes = json::array();
    for (const auto& o : report.outcomes) {
        outcomes.push_back({{"utterance_id", o.utterance_id},
                            {"speaker_id", o.speaker_id},
                            {"fold", o.fold},
                            {"truth", o.truth},
                            {"predicted", o.predicted},
                            {"max_confidence", o.max_confidence}});
    }
    j["outcomes"] = outcomes;
    return j;
}

json human_report_json(const HumanReport& report) {
    auto group_json = [](const HumanGroupReport& g) {
        json j;
        j["group"] = g.group;
        j["n"] = g.n;
        j["correct"] = g.correct;
        j["accuracy"] = g.accuracy();
        if (g.accuracy_female_speakers) j["accuracy_female_speakers"] = *g.accuracy_female_speakers;
        if (g.accuracy_male_speakers) j["accuracy_male_speakers"] = *g.accuracy_male_speakers;
        j["confident"] = {{"n", g.confident.n},
                          {"correct", g.confident.correct},
                          {"accuracy", g.confident.accuracy()},
                          {"prevalence", g.confident.prevalence}};
        j["unsure"] = {{"n", g.unsure.n},
                       {"correct", g.unsure.correct},
                       {"accuracy", g.unsure.accuracy()},
                       {"prevalence", g.unsure.prevalence}};
        return j;
    };

    json j;
    j["taxonomy"] = report.taxonomy_name;
    j["classes"] = report.classes;
    j["all"] = group_json(report.all);
    if (report.female_workers) j["female_workers"] = group_json(*report.female_workers);
    if (report.male_workers) j["male_workers"] = group_json(*report.male_workers);
    j["confusion"] = confusion_json(report.confusion, report.classes);
    if (!report.counts_by_gender_age.empty()) {
        json counts;
        for (const auto& [gender, buckets] : report.counts_by_gender_age) {
            json b;
            for (const auto& [bucket, count] : buckets) b[bucket] = count;
            counts[gender] = b;
        }
        j["counts_by_gender_age"] = counts;
    }
    return j;
}

} // namespace emovox
