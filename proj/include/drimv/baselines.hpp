#pragma once

#include "drimv/common.hpp"
#include "drimv/dataset.hpp"

#include <optional>
#include <vector>

namespace drimv {

/// A dataset whose missing rows were filled. `data` reports every row as present;
/// `imputed[v][i]` records which rows were filled.
struct ImputedDataset {
    MultiViewDataset data;
    std::vector<std::vector<bool>> imputed;
    /// Rows that fell back to mean imputation (KNN found no donor sharing a view).
    std::vector<std::vector<bool>> fallback;
};

/// Fills each missing row with the column means of the view's present rows.
ImputedDataset mean_impute(const MultiViewDataset& ds);

/// Fills a missing row with the mean of the k nearest donors' rows, where distance is
/// Euclidean over the views observed by both instances.
ImputedDataset knn_impute(const MultiViewDataset& ds, Index k);

struct SvtParams {
    std::optional<double> tau;   // default 5 * sqrt(rows * cols)
    std::optional<double> step;  // default 1.2 * rows * cols / |observed|
    Index max_iters = 500;
    double tol = 1e-4;
};

struct SvtResult {
    Matrix completed;
    Index iterations = 0;
    bool converged = false;
    double residual = 0.0;
};

/// Singular value thresholding on a matrix with an observation mask (true = observed).
SvtResult svt_matrix(const Matrix& M, const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& observed,
                     const SvtParams& params = {});

/// Completes the horizontally concatenated views; observed entries are the present rows.
ImputedDataset svt_complete(const MultiViewDataset& ds, const SvtParams& params = {});

}  // namespace drimv
