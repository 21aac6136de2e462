#include "emovox/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "emovox/csv.hpp"
#include "emovox/errors.hpp"

namespace emovox {

EnsembleConfig RunConfig::ensemble_config() const {
    EnsembleConfig cfg;
    cfg.C = svm_c;
    cfg.gamma = gamma;
    cfg.tol = svm_tol;
    cfg.max_epochs = max_epochs;
    cfg.rfe_target_k = rfe_target_k;
    cfg.rfe_step = rfe_step;
    cfg.smote_k = smote_k;
    cfg.smote_policy = smote_policy;
    cfg.norm_policy = norm_policy;
    cfg.default_threshold = threshold;
    cfg.coverage_grid = coverage;
    cfg.seed = seed;
    return cfg;
}

int RunConfig::effective_jobs() const {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_coverage_list(const std::string& value, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const double v = csv::parse_double(item, where);
        if (v <= 0.0 || v > 1.0) {
            throw ValidationError(where + ": coverage values must be in (0,1], got " + item);
        }
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(where + ": empty coverage list");
    return out;
}

} // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());

    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw FormatError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "taxonomy") {
            if (value != "emotion6" && value != "apn" && value != "pnn" && value != "all") {
                throw ValidationError(where + ": unknown taxonomy '" + value + "'");
            }
            cfg.taxonomy = value;
        } else if (key == "svm_c") {
            cfg.svm_c = csv::parse_double(value, where);
            if (cfg.svm_c <= 0.0) throw ValidationError(where + ": svm_c must be positive");
        } else if (key == "gamma") {
            if (value == "scale") cfg.gamma.reset();
            else {
                cfg.gamma = csv::parse_double(value, where);
                if (*cfg.gamma <= 0.0) throw ValidationError(where + ": gamma must be positive");
            }
        } else if (key == "svm_tol") {
            cfg.svm_tol = csv::parse_double(value, where);
            if (cfg.svm_tol <= 0.0) throw ValidationError(where + ": svm_tol must be positive");
        } else if (key == "max_epochs") {
            cfg.max_epochs = std::stoi(value);
            if (cfg.max_epochs <= 0) throw ValidationError(where + ": max_epochs must be positive");
        } else if (key == "rfe_target_k") {
            cfg.rfe_target_k = std::stoi(value);
            if (cfg.rfe_target_k < 1) throw ValidationError(where + ": rfe_target_k must be >= 1");
        } else if (key == "rfe_step") {
            cfg.rfe_step = csv::parse_double(value, where);
            if (cfg.rfe_step <= 0.0 || cfg.rfe_step > 1.0) {
                throw ValidationError(where + ": rfe_step must be in (0,1]");
            }
        } else if (key == "smote_k") {
            cfg.smote_k = std::stoi(value);
            if (cfg.smote_k < 1) throw ValidationError(where + ": smote_k must be >= 1");
        } else if (key == "smote_policy") {
            const auto policy = parse_smote_policy(value);
            if (!policy) throw ValidationError(where + ": unknown smote_policy '" + value + "'");
            cfg.smote_policy = *policy;
        } else if (key == "norm_policy") {
            const auto policy = parse_norm_policy(value);
            if (!policy) throw ValidationError(where + ": unknown norm_policy '" + value + "'");
            cfg.norm_policy = *policy;
        } else if (key == "coverage") {
            cfg.coverage = parse_coverage_list(value, where);
        } else if (key == "threshold") {
            cfg.threshold = csv::parse_double(value, where);
            if (cfg.threshold < 0.0 || cfg.threshold > 1.0) {
                throw ValidationError(where + ": threshold must be in [0,1]");
            }
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "jobs") {
            cfg.jobs = std::stoi(value);
            if (cfg.jobs < 0) throw ValidationError(where + ": jobs must be >= 0");
        } else {
            throw FormatError(where + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out << "taxonomy = " << taxonomy << "\n";
    out << "svm_c = " << csv::format_double(svm_c) << "\n";
    out << "gamma = " << (gamma ? csv::format_double(*gamma) : std::string("scale")) << "\n";
    out << "svm_tol = " << csv::format_double(svm_tol) << "\n";
    out << "max_epochs = " << max_epochs << "\n";
    out << "rfe_target_k = " << rfe_target_k << "\n";
    out << "rfe_step = " << csv::format_double(rfe_step) << "\n";
    out << "smote_k = " << smote_k << "\n";
    out << "smote_policy = " << to_string(smote_policy) << "\n";
    out << "norm_policy = " << to_string(norm_policy) << "\n";
    out << "coverage = ";
    for (std::size_t i = 0; i < coverage.size(); ++i) {
        if (i) out << ",";
        out << csv::format_double(coverage[i]);
    }
    out << "\n";
    out << "threshold = " << csv::format_double(threshold) << "\n";
    out << "seed = " << seed << "\n";
    out << "jobs = " << jobs << "\n";
    return out.str();
}

void RunConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file: " + path.string());
    out << serialize();
    if (!out) throw IoError("short write: " + path.string());
}

} // namespace emovox
