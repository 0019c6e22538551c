#pragma once

#include "drimv/common.hpp"

#include <string>
#include <vector>

namespace drimv {

double accuracy(const std::vector<int>& labels, const std::vector<int>& predictions);

/// Binary F1 for `positive_class` when n_classes <= 2, macro-averaged otherwise.
/// A class with precision + recall = 0 scores 0.
double f1_score(const std::vector<int>& labels, const std::vector<int>& predictions, int n_classes,
                int positive_class = 1);

/// Mann-Whitney AUC with average ranks on ties. `positive[i]` marks the positive instances.
double auc_binary(const std::vector<bool>& positive, const std::vector<double>& scores);

/// Positive-class column for two classes, one-vs-rest macro average otherwise.
double auc_score(const std::vector<int>& labels, const Matrix& scores, int positive_class = 1);

struct MetricReport {
    double acc = 0.0;
    double auc = 0.0;
    double f1 = 0.0;
};

MetricReport evaluate(const std::vector<int>& labels, const std::vector<int>& predictions, const Matrix& scores,
                      int n_classes, int positive_class = 1);

struct Summary {
    double mean = 0.0;
    double variance = 0.0;  // sample variance (n - 1); 0 for a single value
};

Summary summarize(const std::vector<double>& values);

/// "0.9471±0.0009"
std::string format_summary(const Summary& s, int digits = 4);

// --- rank statistics -------------------------------------------------------

/// Average ranks of `values` with rank 1 for the largest (ties share the mean rank).
Vector descending_ranks(const Eigen::Ref<const Vector>& values);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);
double chi_square_sf(double x, double df);
double normal_sf(double z);

struct FriedmanResult {
    Vector average_ranks;
    double statistic = 0.0;
    Index dof = 0;
    double p_value = 1.0;
    Index n_settings = 0;
    bool degenerate = false;  // every setting fully tied
};

/// results: n settings x k algorithms, higher is better.
FriedmanResult friedman_test(const Matrix& results);

struct HolmComparison {
    Index algorithm = 0;
    Index position = 0;  // number of hypotheses still open at this step
    double z = 0.0;
    double p = 1.0;
    double threshold = 0.0;
    bool reject = false;
};

struct HolmResult {
    Index control = 0;
    std::vector<HolmComparison> comparisons;  // ascending p
};

/// Two-sided z tests of each algorithm against `control` followed by Holm's step-down procedure.
HolmResult holm_posthoc(const Eigen::Ref<const Vector>& average_ranks, Index n_settings, Index control,
                        double alpha = 0.05);

}  // namespace drimv
