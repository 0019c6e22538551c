#pragma once

#include "drimv/baselines.hpp"
#include "drimv/classifier.hpp"
#include "drimv/dataset.hpp"
#include "drimv/explain.hpp"
#include "drimv/metrics.hpp"
#include "drimv/representation.hpp"
#include "drimv/serialize.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace drimv {

namespace fs = std::filesystem;

struct RunConfig {
    DrlConfig drl;
    ClassifierConfig classifier;

    void validate() const {
        drl.validate();
        classifier.validate();
    }
};

/// {"representation": {...}, "classifier": {...}}; either section may be omitted.
RunConfig run_config_from_json(const json& j);
RunConfig load_run_config(const std::optional<fs::path>& path);

/// Normalizes on `train`, learns the dual representation, then the fuzzy ensemble.
TrainedModel train_model(const MultiViewDataset& train, const RunConfig& cfg);

/// Transforms `data` with the frozen bases and predicts with the stored ensemble.
Prediction predict_model(const TrainedModel& model, const MultiViewDataset& data);

// --- commands ----------------------------------------------------------------

fs::path cmd_mask(const fs::path& manifest, double rate, std::uint64_t seed, const fs::path& out_dir);

TrainedModel cmd_train(const fs::path& manifest, const std::optional<fs::path>& config, const fs::path& out);

/// Writes one row per instance: score_0..score_{C-1}, label.
Prediction cmd_predict(const fs::path& model, const fs::path& manifest, const fs::path& out);

enum class Method { Drimv, Mean, Knn, Svt };
enum class Variant { Full, NoCommon, NoSpecific, NoCooperation };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct BenchOptions {
    fs::path manifest;
    std::vector<double> rates{0.1, 0.3, 0.5, 0.7};
    Index reps = 10;
    std::optional<fs::path> config;
    fs::path out_dir;
    double test_fraction = 0.3;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    Method method = Method::Drimv;
    Variant variant = Variant::Full;
    Index knn_k = 5;
    std::optional<fs::path> grid;
};

struct BenchCell {
    std::size_t rate_index = 0;
    double rate = 0.0;
    Index rep = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    MetricReport metrics;
    std::string error;
};

struct BenchResult {
    std::vector<BenchCell> cells;  // sorted by (rate index, rep)
    json aggregate;
    bool all_ok() const;
};

/// Runs the cells in memory; does not touch the filesystem beyond reading inputs.
BenchResult run_bench(const MultiViewDataset& source, const BenchOptions& opt);

/// run_bench plus results.csv, summary.json and errors.json in opt.out_dir.
BenchResult cmd_bench(const BenchOptions& opt);

/// Applies the variant switches to a run config.
RunConfig apply_variant(RunConfig cfg, Variant v);

/// Cartesian product of a grid document {"representation": {key: [values]}, "classifier": {...}}.
std::vector<RunConfig> expand_grid(const RunConfig& base, const json& grid);

struct StatsReport {
    std::vector<std::string> algorithms;
    std::vector<double> settings;  // rates
    Matrix table;                  // settings x algorithms
    FriedmanResult friedman;
    HolmResult holm;
    std::string text;
    json json_report;
};

StatsReport stats_from_table(const std::vector<std::string>& algorithms, const std::vector<double>& settings,
                             const Matrix& table, const std::string& control);

/// Each input is "path" or "name=path" (name defaults to the file stem). Settings are the
/// per-rate means of `metric` over successful repetitions.
StatsReport cmd_stats(const std::vector<std::string>& inputs, const std::string& control, const std::string& metric);

struct ExplainOutput {
    RuleReport report;
    std::optional<DecisionTrace> trace;
    json json_report;
};

/// Explains `view` (an ensemble view name). `instance` indexes the training rows stored in the model.
ExplainOutput cmd_explain(const fs::path& model, const std::string& view, const std::optional<fs::path>& names,
                          std::optional<Index> instance, const std::optional<fs::path>& out);

/// Design matrix of ensemble view `v` for the training instances stored in the model.
Matrix training_design(const TrainedModel& model, Index v);

}  // namespace drimv
