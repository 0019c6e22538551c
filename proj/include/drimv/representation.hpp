#pragma once

#include "drimv/common.hpp"
#include "drimv/dataset.hpp"
#include "drimv/graphs.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace drimv {

/// Hyperparameters of the dual representation learner.
struct DrlConfig {
    Index latent_dim = 10;
    double lambda1 = 1.0;  // orthogonality between specific and common representations
    double lambda2 = 1.0;  // first-order (Laplacian) similarity
    double lambda3 = 1.0;  // second-order (reconstruction) similarity
    Index neighbors = 5;
    Index max_iters = 100;
    double tol = 1e-6;
    double ridge = 1e-8;
    /// Rebuild graphs every k iterations; 0 freezes the graphs built at initialization.
    Index graph_refresh = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Per-view state. Shapes: Bs, Bc are m x d; Hs is m x N; U, observed, imputed are N x d.
struct ViewFactors {
    std::string name;
    Matrix Bs;
    Matrix Bc;
    Matrix Hs;
    Matrix U;
    Matrix observed;  // zero-filled X^v
    Matrix imputed;   // X^v + E^v U^v
    std::vector<Index> missing;
};

struct DrlModel {
    std::vector<ViewFactors> views;
    Matrix Hc;  // m x N
    /// Present-row feature means of the training data, used as imputation warm start.
    std::vector<Vector> feature_means;
    double initial_objective = 0.0;
    std::vector<double> objective_trace;
    bool converged = false;
    std::vector<std::string> warnings;

    Index n_instances() const { return Hc.cols(); }
    Index latent_dim() const { return Hc.rows(); }
    Index n_views() const { return static_cast<Index>(views.size()); }
};

/// Graph operators for one epoch: one per specific representation plus the common one.
struct GraphSet {
    std::vector<GraphOperators> specific;
    GraphOperators common;
};

DrlModel init_model(const MultiViewDataset& ds, const DrlConfig& cfg);

GraphSet refresh_graphs(const DrlModel& model, const DrlConfig& cfg);

/// Closed-form update of the free (missing) rows of U^v; refreshes the imputed view.
void update_U(DrlModel& model, Index v, const GraphSet& graphs, const DrlConfig& cfg);
void update_Hs(DrlModel& model, Index v, const DrlConfig& cfg);
void update_Bs(DrlModel& model, Index v, const DrlConfig& cfg);
/// Per-view form: (Hc Hc^T + eps I)^{-1} (Hc X~^v - Hc Hs^vT Bs^v).
void update_Bc(DrlModel& model, Index v, const DrlConfig& cfg);
void update_Hc(DrlModel& model, const DrlConfig& cfg);

/// Squared-norm objective for fixed graphs.
double objective(const DrlModel& model, const GraphSet& graphs, const DrlConfig& cfg);

/// Sum over views of ||X~ - Hs^T Bs - Hc^T Bc||_F^2.
double data_term(const DrlModel& model);

DrlModel fit(const MultiViewDataset& ds, const DrlConfig& cfg);

/// Test phase: bases frozen, learns U, Hs and Hc for unseen instances.
/// The returned model shares the trained bases and holds test-sized representations.
DrlModel transform(const DrlModel& model, const MultiViewDataset& test, const DrlConfig& cfg);

}  // namespace drimv
