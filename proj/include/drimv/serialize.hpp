#pragma once

#include "drimv/classifier.hpp"
#include "drimv/dataset.hpp"
#include "drimv/representation.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace drimv {

using nlohmann::json;

/// Matrices are stored as {"rows", "cols", "data"} with data in row-major order.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json to_json(const DrlConfig& cfg);
json to_json(const ClassifierConfig& cfg);
/// Keys absent from `j` keep the value already in `cfg`. tol accepts a number or "inf".
void merge_config(DrlConfig& cfg, const json& j);
void merge_config(ClassifierConfig& cfg, const json& j);

/// Everything needed to predict on new data.
struct TrainedModel {
    DrlConfig drl_config;
    ClassifierConfig classifier_config;
    NormalizationStats normalization;
    DrlModel representation;
    ViewEnsemble ensemble;
    int n_classes = 0;
};

json to_json(const TrainedModel& model);
TrainedModel model_from_json(const json& j);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

/// Reads a whole JSON file; parse errors become InvalidArgument naming the file.
json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace drimv
