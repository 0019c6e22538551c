#pragma once

#include "drimv/classifier.hpp"
#include "drimv/fuzzy.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace drimv {

/// Default ordered vocabulary (smallest center first) for K fuzzy sets per feature.
std::vector<std::string> default_vocabulary(Index K);

struct LinguisticLabels {
    /// labels[k][j]: term of rule k on feature j.
    std::vector<std::vector<std::string>> labels;
    /// Some feature had equal centers; those were ordered by rule index.
    bool degenerate = false;
};

/// Ranks the K centers of every feature ascending and assigns the vocabulary by rank.
LinguisticLabels linguistic_labels(const Antecedent& ant,
                                   const std::optional<std::vector<std::string>>& vocabulary = std::nullopt);

struct RuleReport {
    std::string text;
    nlohmann::json json;
};

/// IF-THEN report of one view. Empty `feature_names` means f0..f{d-1}.
RuleReport rule_report(const ViewEnsemble& ens, Index view, std::vector<std::string> feature_names = {});

struct DecisionTrace {
    Vector strengths;              // normalized firing strengths
    Matrix rule_outputs;           // K x C, f_k(x)
    Matrix contributions;          // K x C, strengths(k) * f_k(x)
    Eigen::RowVectorXd combined;   // sum of contributions
    Eigen::RowVectorXd decision;   // one-hot of the argmax
    int label = 0;
    Index dominant_rule = 0;       // argmax_k strengths(k) * ||f_k(x)||
};

DecisionTrace decision_trace(const ViewEnsemble& ens, Index view, const Eigen::Ref<const Eigen::RowVectorXd>& x);

nlohmann::json to_json(const DecisionTrace& trace);

}  // namespace drimv
