#pragma once
// Independent reference computations used only by the tests. Everything here is written
// with explicit loops or a different factorization than the library so the two can disagree.

#include "drimv/classifier.hpp"
#include "drimv/dataset.hpp"
#include "drimv/fuzzy.hpp"
#include "drimv/graphs.hpp"
#include "drimv/representation.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

namespace oracle {

using drimv::Index;
using drimv::Matrix;
using drimv::Vector;

// sum_i sum_j G_ij ||x_i - x_j||^2
inline double pairwise_sum(const Matrix& X, const Matrix& G) {
    double s = 0.0;
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.rows(); ++j) {
            double d2 = 0.0;
            for (Index c = 0; c < X.cols(); ++c) d2 += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
            s += G(i, j) * d2;
        }
    }
    return s;
}

inline Matrix row_normalize(const Matrix& G) {
    Matrix W = G;
    for (Index i = 0; i < G.rows(); ++i) {
        double r = 0.0;
        for (Index j = 0; j < G.cols(); ++j) r += G(i, j);
        for (Index j = 0; j < G.cols(); ++j) W(i, j) = r > 0.0 ? G(i, j) / r : 0.0;
    }
    return W;
}

// sum_i ||x_i - sum_j W_ij x_j||^2
inline double reconstruction_sum(const Matrix& X, const Matrix& W) {
    double s = 0.0;
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index c = 0; c < X.cols(); ++c) {
            double r = X(i, c);
            for (Index j = 0; j < X.rows(); ++j) r -= W(i, j) * X(j, c);
            s += r * r;
        }
    }
    return s;
}

inline double frob2(const Matrix& A) {
    double s = 0.0;
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j) s += A(i, j) * A(i, j);
    return s;
}

// The representation objective from the graph weights alone (operators rebuilt by brute force).
inline double drl_objective(const drimv::DrlModel& m, const drimv::GraphSet& g, const drimv::DrlConfig& cfg) {
    double j = 0.0;
    const Matrix Wc = row_normalize(g.common.graph.weights);
    for (std::size_t v = 0; v < m.views.size(); ++v) {
        const auto& f = m.views[v];
        j += frob2(f.imputed - f.Hs.transpose() * f.Bs - m.Hc.transpose() * f.Bc);
        j += cfg.lambda1 * frob2(f.Hs.transpose() * m.Hc);
        const Matrix& Gs = g.specific[v].graph.weights;
        j += cfg.lambda2 * 0.5 * (pairwise_sum(f.imputed, Gs) + pairwise_sum(f.imputed, g.common.graph.weights));
        j += cfg.lambda3 * (reconstruction_sum(f.imputed, row_normalize(Gs)) + reconstruction_sum(f.imputed, Wc));
    }
    return j;
}

// --- analytic gradients of the representation objective (frozen graphs) ---------------

inline Matrix residual(const drimv::DrlModel& m, std::size_t v) {
    const auto& f = m.views[v];
    return f.imputed - f.Hs.transpose() * f.Bs - m.Hc.transpose() * f.Bc;
}

inline Matrix grad_Hs(const drimv::DrlModel& m, std::size_t v, const drimv::DrlConfig& cfg) {
    const auto& f = m.views[v];
    return -2.0 * f.Bs * residual(m, v).transpose() + 2.0 * cfg.lambda1 * m.Hc * m.Hc.transpose() * f.Hs;
}

inline Matrix grad_Bs(const drimv::DrlModel& m, std::size_t v) {
    return -2.0 * m.views[v].Hs * residual(m, v);
}

inline Matrix grad_Bc(const drimv::DrlModel& m, std::size_t v) { return -2.0 * m.Hc * residual(m, v); }

inline Matrix grad_Hc(const drimv::DrlModel& m, const drimv::DrlConfig& cfg) {
    Matrix g = Matrix::Zero(m.Hc.rows(), m.Hc.cols());
    for (std::size_t v = 0; v < m.views.size(); ++v) {
        const auto& f = m.views[v];
        g += -2.0 * f.Bc * residual(m, v).transpose() + 2.0 * cfg.lambda1 * f.Hs * f.Hs.transpose() * m.Hc;
    }
    return g;
}

// Gradient with respect to the missing rows of U^v (present rows are zero).
inline Matrix grad_U(const drimv::DrlModel& m, std::size_t v, const drimv::GraphSet& g, const drimv::DrlConfig& cfg) {
    const auto& f = m.views[v];
    const Index n = f.imputed.rows();
    // A = lambda2 (L_s + L_c) + lambda3 (Atilde_s + Atilde_c), assembled from the weights.
    auto lap = [](const Matrix& G) {
        const Matrix S = 0.5 * (G + G.transpose());
        Matrix L = -S;
        for (Index i = 0; i < S.rows(); ++i) L(i, i) += S.row(i).sum();
        return L;
    };
    auto rec = [n](const Matrix& G) {
        const Matrix IW = Matrix::Identity(n, n) - row_normalize(G);
        return Matrix(IW.transpose() * IW);
    };
    const Matrix& Gs = g.specific[v].graph.weights;
    const Matrix& Gc = g.common.graph.weights;
    const Matrix A = cfg.lambda2 * (lap(Gs) + lap(Gc)) + cfg.lambda3 * (rec(Gs) + rec(Gc));
    const Matrix full = 2.0 * residual(m, v) + 2.0 * A * f.imputed;
    Matrix out = Matrix::Zero(full.rows(), full.cols());
    for (Index i : f.missing) out.row(i) = full.row(i);
    return out;
}

/// Central differences of f with respect to every entry of X (X is restored afterwards).
inline Matrix central_difference(const std::function<double()>& f, Matrix& X, double h = 1e-5) {
    Matrix g(X.rows(), X.cols());
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.cols(); ++j) {
            const double keep = X(i, j);
            const double step = h * std::max(1.0, std::abs(keep));
            X(i, j) = keep + step;
            const double up = f();
            X(i, j) = keep - step;
            const double down = f();
            X(i, j) = keep;
            g(i, j) = (up - down) / (2.0 * step);
        }
    }
    return g;
}

// --- TSK ----------------------------------------------------------------------------

/// Rule-by-rule evaluation: products of Gaussian memberships, direct normalization,
/// per-rule affine consequents p_k^c [1, x].
inline Matrix tsk_rule_based(const Matrix& X, const drimv::Antecedent& ant, const Matrix& P) {
    const Index K = ant.centers.rows();
    const Index d = ant.centers.cols();
    const Index C = P.cols();
    Matrix Y = Matrix::Zero(X.rows(), C);
    for (Index i = 0; i < X.rows(); ++i) {
        std::vector<double> mu(static_cast<std::size_t>(K), 1.0);
        double total = 0.0;
        for (Index k = 0; k < K; ++k) {
            for (Index j = 0; j < d; ++j) {
                const double diff = X(i, j) - ant.centers(k, j);
                mu[static_cast<std::size_t>(k)] *= std::exp(-diff * diff / (2.0 * ant.widths(k, j)));
            }
            total += mu[static_cast<std::size_t>(k)];
        }
        for (Index k = 0; k < K; ++k) {
            const double w = mu[static_cast<std::size_t>(k)] / total;
            for (Index c = 0; c < C; ++c) {
                double f = P(k * (d + 1), c);
                for (Index j = 0; j < d; ++j) f += P(k * (d + 1) + 1 + j, c) * X(i, j);
                Y(i, c) += w * f;
            }
        }
    }
    return Y;
}

/// min ||G P - Y||^2 + delta ||P||^2 as an augmented least-squares problem solved by QR.
inline Matrix ridge_qr(const Matrix& G, const Matrix& Y, double delta) {
    const Index n = G.rows();
    const Index p = G.cols();
    Matrix A = Matrix::Zero(n + p, p);
    Matrix B = Matrix::Zero(n + p, Y.cols());
    A.topRows(n) = G;
    A.bottomRows(p) = std::sqrt(delta) * Matrix::Identity(p, p);
    B.topRows(n) = Y;
    return A.colPivHouseholderQr().solve(B);
}

/// Fraction of concordant (positive, negative) pairs, ties counted one half.
inline double auc_pairs(const std::vector<bool>& positive, const std::vector<double>& s) {
    double hits = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!positive[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (positive[j]) continue;
            pairs += 1.0;
            hits += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    }
    return hits / pairs;
}

// --- fixtures -------------------------------------------------------------------------

/// Random incomplete dataset with every instance keeping at least one view.
inline drimv::MultiViewDataset random_dataset(Index n, const std::vector<Index>& dims, int n_classes,
                                              double missing_rate, std::uint64_t seed) {
    drimv::Rng rng(seed);
    drimv::MultiViewDataset ds;
    ds.n_classes = n_classes;
    for (Index i = 0; i < n; ++i) ds.labels.push_back(static_cast<int>(i % n_classes));
    for (std::size_t v = 0; v < dims.size(); ++v) {
        drimv::ViewBlock b;
        b.name = "v" + std::to_string(v + 1);
        b.data = drimv::uniform_matrix(n, dims[v], rng);
        b.present.assign(static_cast<std::size_t>(n), true);
        ds.views.push_back(std::move(b));
    }
    return missing_rate > 0.0 ? drimv::apply_mask(ds, missing_rate, seed + 17) : ds;
}

/// Unique scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("drimv_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace oracle
