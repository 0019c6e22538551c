#include "drimv/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace drimv {

SimilarityGraph knn_graph(const Matrix& points, Index p, const BandwidthRule& rule) {
    const Index n = points.rows();
    if (n < 2) throw InvalidArgument("knn_graph needs at least 2 points");
    if (p < 1 || p > n - 1) throw InvalidArgument("neighbor count must lie in [1, N-1]");

    Matrix dist2(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            const double d = (points.row(i) - points.row(j)).squaredNorm();
            dist2(i, j) = d;
            dist2(j, i) = d;
        }
    }

    std::vector<std::vector<Index>> nbrs(static_cast<std::size_t>(n));
    std::vector<double> used;
    used.reserve(static_cast<std::size_t>(n * p));
    std::vector<Index> order;
    for (Index i = 0; i < n; ++i) {
        order.resize(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        order.erase(order.begin() + i);
        std::partial_sort(order.begin(), order.begin() + p, order.end(), [&](Index a, Index b) {
            return dist2(i, a) < dist2(i, b) || (dist2(i, a) == dist2(i, b) && a < b);
        });
        auto& row = nbrs[static_cast<std::size_t>(i)];
        row.assign(order.begin(), order.begin() + p);
        for (Index j : row) used.push_back(std::sqrt(dist2(i, j)));
    }

    SimilarityGraph g;
    g.neighbors = p;
    if (rule.fixed_sigma) {
        if (!(*rule.fixed_sigma > 0.0)) throw InvalidArgument("fixed bandwidth must be positive");
        g.sigma = *rule.fixed_sigma;
    } else {
        const auto mid = used.begin() + static_cast<std::ptrdiff_t>(used.size() / 2);
        std::nth_element(used.begin(), mid, used.end());
        double median = *mid;
        if (used.size() % 2 == 0) {
            median = 0.5 * (median + *std::max_element(used.begin(), mid));
        }
        g.sigma = median;
        if (!(median > 0.0) || !std::isfinite(median)) {
            g.sigma = 1.0;
            g.bandwidth_fallback = true;
        }
    }

    const double denom = 2.0 * g.sigma * g.sigma;
    g.weights = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j : nbrs[static_cast<std::size_t>(i)]) g.weights(i, j) = std::exp(-dist2(i, j) / denom);
    }
    return g;
}

Matrix laplacian(const SimilarityGraph& g) {
    const Matrix sym = 0.5 * (g.weights + g.weights.transpose());
    Matrix lap = -sym;
    lap.diagonal() += sym.rowwise().sum();
    return lap;
}

Matrix row_normalized(const SimilarityGraph& g) {
    Matrix w = g.weights;
    for (Index i = 0; i < w.rows(); ++i) {
        const double s = w.row(i).sum();
        if (s > 0.0) w.row(i) /= s;
    }
    return w;
}

Matrix reconstruction_operator(const SimilarityGraph& g) {
    const Index n = g.weights.rows();
    const Matrix lambda = Matrix::Identity(n, n) - row_normalized(g);
    return lambda.transpose() * lambda;
}

GraphOperators build_operators(const Matrix& points, Index p, const BandwidthRule& rule) {
    const Index n = points.rows();
    GraphOperators ops;
    if (n < 2) {
        ops.laplacian = Matrix::Zero(n, n);
        ops.reconstruction = Matrix::Zero(n, n);
        ops.graph.weights = Matrix::Zero(n, n);
        return ops;
    }
    ops.graph = knn_graph(points, std::clamp<Index>(p, 1, n - 1), rule);
    ops.laplacian = laplacian(ops.graph);
    ops.reconstruction = reconstruction_operator(ops.graph);
    return ops;
}

}  // namespace drimv
