#pragma once

#include "drimv/common.hpp"

#include <optional>

namespace drimv {

/// How the Gaussian kernel width is chosen for a p-NN graph.
struct BandwidthRule {
    /// When unset, sigma is the median of the neighbor distances actually used.
    std::optional<double> fixed_sigma;

    static BandwidthRule median() { return {}; }
    static BandwidthRule fixed(double sigma) { return {sigma}; }
};

/// Directed p-nearest-neighbor graph with Gaussian weights.
/// Row i holds the weights of i's p nearest neighbors; diagonal is zero.
struct SimilarityGraph {
    Matrix weights;
    Index neighbors = 0;
    double sigma = 1.0;
    /// Set when the median bandwidth collapsed to zero and sigma = 1 was used instead.
    bool bandwidth_fallback = false;
};

struct GraphOperators {
    Matrix laplacian;       // D - sym(G)
    Matrix reconstruction;  // (I - W)^T (I - W), W = row-normalized G
    SimilarityGraph graph;
};

/// Exact Euclidean p-NN graph over the rows of `points`. Neighbor ties go to the lower index.
SimilarityGraph knn_graph(const Matrix& points, Index p, const BandwidthRule& rule = BandwidthRule::median());

/// Laplacian of the symmetrized graph (G + G^T)/2.
Matrix laplacian(const SimilarityGraph& g);

/// Rows of G with positive sum are rescaled to sum to one; rows summing to zero are left as zero.
Matrix row_normalized(const SimilarityGraph& g);

Matrix reconstruction_operator(const SimilarityGraph& g);

/// Builds both operators from instance representations (rows = instances).
/// p is clamped to N-1; with N < 2 both operators are zero matrices.
GraphOperators build_operators(const Matrix& points, Index p, const BandwidthRule& rule = BandwidthRule::median());

}  // namespace drimv
