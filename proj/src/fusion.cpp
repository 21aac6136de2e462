#include "emovox/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "emovox/csv.hpp"
#include "emovox/errors.hpp"
#include "emovox/rng.hpp"

namespace emovox {

using json = nlohmann::ordered_json;

int Taxonomy::class_of(Emotion e) const {
    std::string_view label;
    if (name == "emotion6") label = emovox::to_string(e);
    else if (name == "apn") label = emovox::to_string(arousal_of(e));
    else if (name == "pnn") label = emovox::to_string(valence_of(e));
    else throw ValidationError("unknown taxonomy: " + name);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] == label) return static_cast<int>(i);
    }
    throw ValidationError("label '" + std::string(label) + "' not in taxonomy " + name);
}

Taxonomy Taxonomy::emotion6() {
    Taxonomy t;
    t.name = "emotion6";
    for (Emotion e : all_emotions()) t.classes.emplace_back(emovox::to_string(e));
    return t;
}

Taxonomy Taxonomy::apn() {
    return {"apn", {"active", "neutral", "passive"}};
}

Taxonomy Taxonomy::pnn() {
    return {"pnn", {"negative", "neutral", "positive"}};
}

Taxonomy Taxonomy::by_name(const std::string& name) {
    if (name == "emotion6") return emotion6();
    if (name == "apn") return apn();
    if (name == "pnn") return pnn();
    throw ValidationError("unknown taxonomy: " + name);
}

std::string_view to_string(SmotePolicy p) {
    return p == SmotePolicy::None ? "none" : "match_majority";
}

std::string_view to_string(NormPolicy p) {
    switch (p) {
        case NormPolicy::SpeakerSelf: return "speaker_self";
        case NormPolicy::TrainGlobal: return "train_global";
        case NormPolicy::None: return "none";
    }
    return "?";
}

std::optional<SmotePolicy> parse_smote_policy(std::string_view s) {
    if (s == "none") return SmotePolicy::None;
    if (s == "match_majority") return SmotePolicy::MatchMajority;
    return std::nullopt;
}

std::optional<NormPolicy> parse_norm_policy(std::string_view s) {
    if (s == "speaker_self") return NormPolicy::SpeakerSelf;
    if (s == "train_global") return NormPolicy::TrainGlobal;
    if (s == "none") return NormPolicy::None;
    return std::nullopt;
}

namespace {

std::vector<std::vector<double>> restrict_columns(
    const std::vector<std::vector<double>>& X, const std::vector<int>& columns) {
    std::vector<std::vector<double>> out(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        out[i].reserve(columns.size());
        for (int c : columns) out[i].push_back(X[i][static_cast<std::size_t>(c)]);
    }
    return out;
}

std::vector<double> restrict_vector(std::span<const double> x,
                                    const std::vector<int>& columns) {
    std::vector<double> out;
    out.reserve(columns.size());
    for (int c : columns) out.push_back(x[static_cast<std::size_t>(c)]);
    return out;
}

// gamma = 1 / (dims * Var(X)) with Var over all matrix entries.
double scale_gamma(const std::vector<std::vector<double>>& X) {
    const std::size_t dim = X[0].size();
    double sum = 0.0, sq = 0.0;
    const double n = static_cast<double>(X.size() * dim);
    for (const auto& row : X) {
        for (double v : row) {
            sum += v;
            sq += v * v;
        }
    }
    const double var = std::max(sq / n - (sum / n) * (sum / n), 1e-12);
    return 1.0 / (static_cast<double>(dim) * var);
}

} // namespace

OaaEnsemble train_oaa_ensemble(const std::vector<std::vector<double>>& X,
                               const std::vector<int>& class_ids,
                               const Taxonomy& taxonomy,
                               const EnsembleConfig& cfg) {
    if (X.size() != class_ids.size()) {
        throw LengthMismatchError("train_oaa_ensemble: |X| != |class_ids|");
    }
    if (X.empty()) throw EmptyInputError("train_oaa_ensemble: empty training set");
    const int n_classes = static_cast<int>(taxonomy.classes.size());
    const int dim = static_cast<int>(X[0].size());

    std::vector<int> class_counts(static_cast<std::size_t>(n_classes), 0);
    for (int c : class_ids) {
        if (c < 0 || c >= n_classes) throw ValidationError("train_oaa_ensemble: bad class id");
        ++class_counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < n_classes; ++c) {
        if (class_counts[static_cast<std::size_t>(c)] == 0) {
            throw MissingClassError("training set lacks class '" +
                                    taxonomy.classes[static_cast<std::size_t>(c)] + "'");
        }
    }

    // Per-class +-1 problems; the SMOTE-balanced positives are appended after
    // the real vectors so calibration can skip synthetics by index.
    struct ClassProblem {
        std::vector<std::vector<double>> X;
        std::vector<int> y;
        std::size_t n_real;
    };
    std::vector<ClassProblem> problems(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) {
        auto& prob = problems[static_cast<std::size_t>(c)];
        prob.X = X;
        prob.y.reserve(X.size());
        std::vector<std::vector<double>> positives;
        for (std::size_t i = 0; i < X.size(); ++i) {
            const bool pos = class_ids[i] == c;
            prob.y.push_back(pos ? 1 : -1);
            if (pos) positives.push_back(X[i]);
        }
        prob.n_real = X.size();

        if (cfg.smote_policy == SmotePolicy::MatchMajority && positives.size() >= 2) {
            const int n_pos = static_cast<int>(positives.size());
            const int n_neg = static_cast<int>(X.size()) - n_pos;
            const int n_synth = n_neg - n_pos;
            if (n_synth > 0) {
                auto synth = smote_oversample(
                    positives, cfg.smote_k, n_synth,
                    derive_seed(cfg.seed, "smote/" + taxonomy.classes[static_cast<std::size_t>(c)]));
                for (auto& v : synth) {
                    prob.X.push_back(std::move(v));
                    prob.y.push_back(1);
                }
            }
        }
    }

    OaaEnsemble ensemble;
    ensemble.taxonomy = taxonomy;
    ensemble.input_dim = dim;
    ensemble.norm_policy = cfg.norm_policy;
    ensemble.default_threshold = cfg.default_threshold;
    ensemble.seed = cfg.seed;

    // shared feature selection
    if (cfg.rfe_target_k >= dim) {
        ensemble.selection.selected.resize(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) ensemble.selection.selected[static_cast<std::size_t>(j)] = j;
        ensemble.selection.elimination_order = ensemble.selection.selected;
    } else {
        std::vector<const std::vector<std::vector<double>>*> xs;
        std::vector<const std::vector<int>*> ys;
        for (const auto& prob : problems) {
            xs.push_back(&prob.X);
            ys.push_back(&prob.y);
        }
        ensemble.selection = svm_rfe_multiclass(xs, ys, cfg.rfe_target_k, cfg.rfe_step,
                                                cfg.C, derive_seed(cfg.seed, "rfe"));
    }
    const auto& selected = ensemble.selection.selected;

    ensemble.models.resize(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) {
        auto& prob = problems[static_cast<std::size_t>(c)];
        const auto X_sel = restrict_columns(prob.X, selected);

        SvmTrainConfig svm_cfg;
        svm_cfg.C = cfg.C;
        svm_cfg.kernel = KernelType::Rbf;
        svm_cfg.gamma = cfg.gamma ? *cfg.gamma : scale_gamma(X_sel);
        svm_cfg.tol = cfg.tol;
        svm_cfg.max_epochs = cfg.max_epochs;
        svm_cfg.seed = derive_seed(cfg.seed, "svm/" + taxonomy.classes[static_cast<std::size_t>(c)]);

        BinarySvmModel model = train_binary_svm(X_sel, prob.y, svm_cfg);

        // Platt calibration on the real training vectors only
        std::vector<double> decisions(prob.n_real);
        std::vector<int> labels(prob.y.begin(), prob.y.begin() + static_cast<long>(prob.n_real));
        for (std::size_t i = 0; i < prob.n_real; ++i) {
            decisions[i] = svm_decision(model, X_sel[i]);
        }
        const PlattResult platt = fit_platt(decisions, labels);
        model.platt_a = platt.a;
        model.platt_b = platt.b;
        ensemble.models[static_cast<std::size_t>(c)] = std::move(model);

        // free the per-class copies as we go
        prob.X.clear();
        prob.X.shrink_to_fit();
    }

    // training-set confidences -> per-coverage thresholds
    if (!cfg.coverage_grid.empty()) {
        std::vector<double> max_conf(X.size());
        for (std::size_t i = 0; i < X.size(); ++i) {
            max_conf[i] = classify(ensemble, X[i]).max_confidence;
        }
        for (double coverage : cfg.coverage_grid) {
            ensemble.coverage_thresholds.emplace_back(
                coverage, calibrate_threshold(max_conf, coverage));
        }
    }
    return ensemble;
}

ClassificationResult classify(const OaaEnsemble& ensemble, std::span<const double> x) {
    if (static_cast<int>(x.size()) != ensemble.input_dim) {
        throw DimensionMismatchError("classify: input has dimension " +
                                     std::to_string(x.size()) + ", ensemble expects " +
                                     std::to_string(ensemble.input_dim));
    }
    const auto x_sel = restrict_vector(x, ensemble.selection.selected);

    ClassificationResult result;
    result.confidences.resize(ensemble.models.size());
    for (std::size_t c = 0; c < ensemble.models.size(); ++c) {
        const auto& model = ensemble.models[c];
        result.confidences[c] =
            platt_probability(svm_decision(model, x_sel), model.platt_a, model.platt_b);
    }
    result.predicted = 0;
    for (std::size_t c = 1; c < result.confidences.size(); ++c) {
        if (result.confidences[c] > result.confidences[static_cast<std::size_t>(result.predicted)]) {
            result.predicted = static_cast<int>(c);
        }
    }
    result.max_confidence = result.confidences[static_cast<std::size_t>(result.predicted)];
    result.rejected = false;
    return result;
}

ClassificationResult classify_with_rejection(const OaaEnsemble& ensemble,
                                             std::span<const double> x,
                                             double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw ValidationError("classify_with_rejection: threshold must be in [0,1]");
    }
    ClassificationResult result = classify(ensemble, x);
    result.rejected = result.max_confidence < threshold;
    return result;
}

double calibrate_threshold(const std::vector<double>& max_confidences,
                           double target_coverage) {
    if (max_confidences.empty()) throw EmptyInputError("calibrate_threshold: empty input");
    if (target_coverage <= 0.0 || target_coverage > 1.0) {
        throw ValidationError("calibrate_threshold: coverage must be in (0,1]");
    }
    const std::size_t n = max_confidences.size();
    // number of samples to classify; the 1e-9 guards round-off like 0.8*10
    auto k = static_cast<std::size_t>(
        std::ceil(target_coverage * static_cast<double>(n) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, n);

    std::vector<double> sorted(max_confidences);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return sorted[k - 1];
}

// ---- model serialization ----

namespace {

json model_to_json(const BinarySvmModel& m) {
    json j;
    j["kernel"] = m.kernel == KernelType::Rbf ? "rbf" : "linear";
    j["gamma"] = m.gamma;
    j["C"] = m.C;
    j["bias"] = m.bias;
    j["platt_a"] = m.platt_a;
    j["platt_b"] = m.platt_b;
    j["dual_coeffs"] = m.dual_coeffs;
    j["support_vectors"] = m.support_vectors;
    return j;
}

BinarySvmModel model_from_json(const json& j) {
    BinarySvmModel m;
    m.kernel = j.at("kernel").get<std::string>() == "linear" ? KernelType::Linear
                                                             : KernelType::Rbf;
    m.gamma = j.at("gamma").get<double>();
    m.C = j.at("C").get<double>();
    m.bias = j.at("bias").get<double>();
    m.platt_a = j.at("platt_a").get<double>();
    m.platt_b = j.at("platt_b").get<double>();
    m.dual_coeffs = j.at("dual_coeffs").get<std::vector<double>>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    return m;
}

} // namespace

void save_ensemble(const OaaEnsemble& ensemble, const std::filesystem::path& path) {
    json j;
    j["format_version"] = 1;
    j["taxonomy"] = {{"name", ensemble.taxonomy.name},
                     {"classes", ensemble.taxonomy.classes}};
    j["input_dim"] = ensemble.input_dim;
    j["norm_policy"] = std::string(to_string(ensemble.norm_policy));
    j["default_threshold"] = ensemble.default_threshold;
    j["seed"] = ensemble.seed;
    j["selection"] = {{"selected", ensemble.selection.selected},
                      {"elimination_order", ensemble.selection.elimination_order}};
    json thresholds = json::array();
    for (const auto& [coverage, threshold] : ensemble.coverage_thresholds) {
        thresholds.push_back({{"coverage", coverage}, {"threshold", threshold}});
    }
    j["coverage_thresholds"] = thresholds;
    json models = json::array();
    for (const auto& m : ensemble.models) models.push_back(model_to_json(m));
    j["models"] = models;

    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("short write: " + path.string());
}

OaaEnsemble load_ensemble(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw FormatError("bad model file " + path.string() + ": " + e.what());
    }
    try {
        OaaEnsemble ensemble;
        if (j.at("format_version").get<int>() != 1) {
            throw FormatError("unsupported model format_version in " + path.string());
        }
        ensemble.taxonomy.name = j.at("taxonomy").at("name").get<std::string>();
        ensemble.taxonomy.classes =
            j.at("taxonomy").at("classes").get<std::vector<std::string>>();
        ensemble.input_dim = j.at("input_dim").get<int>();
        const auto policy = parse_norm_policy(j.at("norm_policy").get<std::string>());
        if (!policy) throw FormatError("bad norm_policy in " + path.string());
        ensemble.norm_policy = *policy;
        ensemble.default_threshold = j.at("default_threshold").get<double>();
        ensemble.seed = j.at("seed").get<std::uint64_t>();
        ensemble.selection.selected =
            j.at("selection").at("selected").get<std::vector<int>>();
        ensemble.selection.elimination_order =
            j.at("selection").at("elimination_order").get<std::vector<int>>();
        for (const auto& row : j.at("coverage_thresholds")) {
            ensemble.coverage_thresholds.emplace_back(row.at("coverage").get<double>(),
                                                      row.at("threshold").get<double>());
        }
        for (const auto& mj : j.at("models")) {
            ensemble.models.push_back(model_from_json(mj));
        }
        if (ensemble.models.size() != ensemble.taxonomy.classes.size()) {
            throw FormatError("model count does not match taxonomy in " + path.string());
        }
        return ensemble;
    } catch (const json::exception& e) {
        throw FormatError("bad model file " + path.string() + ": " + e.what());
    }
}

std::string classification_csv_header(const Taxonomy& taxonomy) {
    std::string header = "utterance_id,taxonomy,predicted,max_confidence,rejected";
    for (const auto& cls : taxonomy.classes) header += ",conf_" + cls;
    return header;
}

std::string classification_csv_row(const Taxonomy& taxonomy,
                                   const ClassificationResult& result) {
    std::ostringstream out;
    out << csv::escape_field(result.utterance_id) << ',' << taxonomy.name << ','
        << taxonomy.classes[static_cast<std::size_t>(result.predicted)] << ','
        << csv::format_double(result.max_confidence) << ','
        << (result.rejected ? "true" : "false");
    for (double c : result.confidences) out << ',' << csv::format_double(c);
    return out.str();
}

} // namespace emovox
