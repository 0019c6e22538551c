#pragma once

#include "drimv/common.hpp"

namespace drimv {

/// Gaussian IF-part of a K-rule TSK system over d features.
struct Antecedent {
    Matrix centers;  // K x d
    Matrix widths;   // K x d, strictly positive

    Index rules() const { return centers.rows(); }
    Index features() const { return centers.cols(); }
};

constexpr double kDefaultWidthFloor = 1e-4;

/// Deterministic variance-partition clustering: repeatedly split the cluster with the
/// largest within-cluster sum of squares at the mean of its highest-variance feature.
Matrix varpart_centers(const Matrix& X, Index K);

/// Centers from varpart_centers; widths q = h * (variance of the nearest-center cluster) + floor.
Antecedent estimate_antecedent(const Matrix& X, Index K, double h = 1.0,
                               double width_floor = kDefaultWidthFloor);

/// exp(-(x - e)^2 / (2q))
double membership(double x, double center, double width);

struct FiringStrengths {
    Vector raw;         // product of memberships per rule
    Vector normalized;  // sums to one
    /// Raw strengths all underflowed to zero; normalized values still come from log space.
    bool raw_underflow = false;
    /// Log-strengths were not finite, so the uniform 1/K fallback was used.
    bool uniform_fallback = false;
};

FiringStrengths firing_strengths(const Eigen::Ref<const Eigen::RowVectorXd>& x, const Antecedent& ant);

/// Maps each row x to [mu~^1 [1,x], ..., mu~^K [1,x]] (N x K(1+d)).
Matrix fuzzy_map(const Matrix& X, const Antecedent& ant);

/// Linearized TSK output X_g * P_g.
Matrix tsk_output(const Matrix& Xg, const Matrix& Pg);

}  // namespace drimv
