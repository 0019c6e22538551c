#pragma once

#include "drimv/common.hpp"
#include "drimv/dataset.hpp"
#include "drimv/fuzzy.hpp"
#include "drimv/representation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace drimv {

enum class AlignmentMode {
    Mean,  // average of the other views' predictions
    Sum,   // unaveraged sum over the other views
};

enum class ViewRole { Imputed, Common, Specific };

std::string to_string(ViewRole role);
ViewRole view_role_from_string(const std::string& s);
std::string to_string(AlignmentMode mode);
AlignmentMode alignment_mode_from_string(const std::string& s);

struct ClassifierConfig {
    Index rules = 4;
    double beta = 1.0;   // cooperation between view predictions
    double gamma = 1.0;  // entropy temperature of the view weights
    double delta = 1.0;  // consequent ridge
    Index max_iters = 100;
    double tol = 1e-6;
    AlignmentMode alignment = AlignmentMode::Mean;
    double width_scale = 1.0;
    double width_floor = kDefaultWidthFloor;
    /// Ablation switches for the hidden views.
    bool use_common = true;
    bool use_specific = true;
    std::uint64_t seed = 0;

    void validate() const;
};

/// An input view before fuzzy mapping (rows = instances).
struct DesignView {
    ViewRole role = ViewRole::Imputed;
    std::string name;
    Matrix data;
};

struct FuzzyView {
    ViewRole role = ViewRole::Imputed;
    std::string name;
    Antecedent antecedent;
    Matrix consequent;  // K(1+d) x C
};

struct ViewEnsemble {
    std::vector<FuzzyView> views;
    Vector alpha;
    int n_classes = 0;
    Index sweeps = 0;
    bool converged = false;
    std::vector<double> objective_trace;

    Index n_views() const { return static_cast<Index>(views.size()); }
    /// Index of the first view with the given name, or -1.
    Index find_view(const std::string& name) const;
};

/// Imputed views 1..V, then Z_c = Hc^T and Z_s = [Hs^1T, ..., Hs^VT] unless ablated.
std::vector<DesignView> assemble_views(const DrlModel& model, const ClassifierConfig& cfg);

/// Only the (already imputed) raw views of a dataset; used with the baseline imputers.
std::vector<DesignView> assemble_views(const MultiViewDataset& ds);

/// Fuzzy-maps each design view with the ensemble's antecedents.
std::vector<Matrix> map_views(const ViewEnsemble& ens, const std::vector<DesignView>& views);

/// Aggregate of the other views' predictions for view v.
Matrix alignment_target(const std::vector<Matrix>& predictions, Index v, AlignmentMode mode);

/// One Gauss-Seidel sweep of closed-form consequent solves in view order.
void update_consequents(ViewEnsemble& ens, const std::vector<Matrix>& mapped, const Matrix& Y,
                        const ClassifierConfig& cfg);

/// alpha = softmax(-loss / gamma) with loss_v = ||X_g^v P^v - Y||_F^2.
void update_weights(ViewEnsemble& ens, const std::vector<Matrix>& mapped, const Matrix& Y,
                    const ClassifierConfig& cfg);

Vector view_losses(const ViewEnsemble& ens, const std::vector<Matrix>& mapped, const Matrix& Y);

double ensemble_objective(const ViewEnsemble& ens, const std::vector<Matrix>& mapped, const Matrix& Y,
                          const ClassifierConfig& cfg);

/// Estimates antecedents per view, then alternates consequent and weight updates.
ViewEnsemble fit_ensemble(const std::vector<DesignView>& views, const Matrix& Y, const ClassifierConfig& cfg);

struct Prediction {
    Matrix scores;  // N x C
    std::vector<int> labels;
};

/// Row-wise argmax; ties go to the lowest class index.
std::vector<int> argmax_rows(const Matrix& scores);

Prediction predict(const ViewEnsemble& ens, const std::vector<DesignView>& views);

/// Unweighted output X_g^v P^v of one view.
Matrix view_scores(const ViewEnsemble& ens, Index v, const Matrix& data);

}  // namespace drimv
