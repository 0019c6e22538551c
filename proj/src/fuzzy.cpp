#include "drimv/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace drimv {

namespace {

using Cluster = std::vector<Index>;

double cluster_sse(const Matrix& X, const Cluster& c) {
    if (c.size() < 2) return 0.0;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(X.cols());
    for (Index i : c) mean += X.row(i);
    mean /= static_cast<double>(c.size());
    double sse = 0.0;
    for (Index i : c) sse += (X.row(i) - mean).squaredNorm();
    return sse;
}

Eigen::RowVectorXd cluster_mean(const Matrix& X, const Cluster& c) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(X.cols());
    for (Index i : c) mean += X.row(i);
    return mean / static_cast<double>(c.size());
}

}  // namespace

Matrix varpart_centers(const Matrix& X, Index K) {
    const Index n = X.rows();
    if (K < 1) throw InvalidArgument("rule count must be >= 1");
    if (K > n) throw InvalidArgument("rule count " + std::to_string(K) + " exceeds instance count " + std::to_string(n));

    std::vector<Cluster> clusters(1);
    clusters[0].resize(static_cast<std::size_t>(n));
    std::iota(clusters[0].begin(), clusters[0].end(), Index{0});

    while (static_cast<Index>(clusters.size()) < K) {
        std::size_t target = 0;
        double best = -1.0;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            const double sse = cluster_sse(X, clusters[c]);
            if (sse > best) {
                best = sse;
                target = c;
            }
        }
        Cluster& src = clusters[target];
        Cluster left;
        Cluster right;
        if (best > 0.0) {
            const Eigen::RowVectorXd mean = cluster_mean(X, src);
            Index feature = 0;
            double top = -1.0;
            for (Index j = 0; j < X.cols(); ++j) {
                double var = 0.0;
                for (Index i : src) var += (X(i, j) - mean(j)) * (X(i, j) - mean(j));
                if (var > top) {
                    top = var;
                    feature = j;
                }
            }
            for (Index i : src) (X(i, feature) <= mean(feature) ? left : right).push_back(i);
        }
        if (left.empty() || right.empty()) {
            // No spread left to split on: halve the largest cluster by index order.
            std::size_t largest = 0;
            for (std::size_t c = 1; c < clusters.size(); ++c) {
                if (clusters[c].size() > clusters[largest].size()) largest = c;
            }
            Cluster& big = clusters[largest];
            const auto half = static_cast<std::ptrdiff_t>(big.size() / 2);
            left.assign(big.begin(), big.begin() + half);
            right.assign(big.begin() + half, big.end());
            big = std::move(left);
            clusters.push_back(std::move(right));
            continue;
        }
        src = std::move(left);
        clusters.push_back(std::move(right));
    }

    Matrix centers(K, X.cols());
    for (Index k = 0; k < K; ++k) centers.row(k) = cluster_mean(X, clusters[static_cast<std::size_t>(k)]);
    return centers;
}

Antecedent estimate_antecedent(const Matrix& X, Index K, double h, double width_floor) {
    if (!(width_floor > 0.0)) throw InvalidArgument("width floor must be positive");
    if (h < 0.0) throw InvalidArgument("width scale must be >= 0");
    Antecedent ant;
    ant.centers = varpart_centers(X, K);
    const Index d = X.cols();

    Matrix sq = Matrix::Zero(K, d);
    Vector count = Vector::Zero(K);
    for (Index i = 0; i < X.rows(); ++i) {
        Index nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (Index k = 0; k < K; ++k) {
            const double dist = (X.row(i) - ant.centers.row(k)).squaredNorm();
            if (dist < best) {
                best = dist;
                nearest = k;
            }
        }
        sq.row(nearest) += (X.row(i) - ant.centers.row(nearest)).array().square().matrix();
        count(nearest) += 1.0;
    }
    ant.widths.resize(K, d);
    for (Index k = 0; k < K; ++k) {
        for (Index j = 0; j < d; ++j) {
            const double var = count(k) > 0.0 ? sq(k, j) / count(k) : 0.0;
            ant.widths(k, j) = h * var + width_floor;
        }
    }
    return ant;
}

double membership(double x, double center, double width) {
    const double diff = x - center;
    return std::exp(-diff * diff / (2.0 * width));
}

FiringStrengths firing_strengths(const Eigen::Ref<const Eigen::RowVectorXd>& x, const Antecedent& ant) {
    const Index K = ant.rules();
    if (x.size() != ant.features()) {
        throw InvalidArgument("input has " + std::to_string(x.size()) + " features, antecedent expects " +
                              std::to_string(ant.features()));
    }
    Vector logs(K);
    for (Index k = 0; k < K; ++k) {
        double s = 0.0;
        for (Index j = 0; j < x.size(); ++j) {
            const double diff = x(j) - ant.centers(k, j);
            s -= diff * diff / (2.0 * ant.widths(k, j));
        }
        logs(k) = s;
    }
    FiringStrengths out;
    // std::exp per entry: the vectorized exp clamps large negative inputs to a denormal instead of 0.
    out.raw = logs.unaryExpr([](double l) { return std::exp(l); });
    out.raw_underflow = out.raw.maxCoeff() < std::numeric_limits<double>::min();
    const double top = logs.maxCoeff();
    if (!std::isfinite(top)) {
        out.normalized = Vector::Constant(K, 1.0 / static_cast<double>(K));
        out.uniform_fallback = true;
        return out;
    }
    out.normalized = (logs.array() - top).unaryExpr([](double l) { return std::exp(l); }).matrix();
    out.normalized /= out.normalized.sum();
    return out;
}

Matrix fuzzy_map(const Matrix& X, const Antecedent& ant) {
    const Index K = ant.rules();
    const Index d = ant.features();
    if (X.cols() != d) {
        throw InvalidArgument("fuzzy_map: data has " + std::to_string(X.cols()) + " columns, antecedent expects " +
                              std::to_string(d));
    }
    Matrix xg(X.rows(), K * (1 + d));
    for (Index i = 0; i < X.rows(); ++i) {
        const auto fs = firing_strengths(X.row(i), ant);
        for (Index k = 0; k < K; ++k) {
            const double w = fs.normalized(k);
            xg(i, k * (1 + d)) = w;
            xg.block(i, k * (1 + d) + 1, 1, d) = w * X.row(i);
        }
    }
    return xg;
}

Matrix tsk_output(const Matrix& Xg, const Matrix& Pg) {
    if (Xg.cols() != Pg.rows()) {
        throw InvalidArgument("tsk_output: fuzzy features " + std::to_string(Xg.cols()) + " vs consequent rows " +
                              std::to_string(Pg.rows()));
    }
    return Xg * Pg;
}

}  // namespace drimv
