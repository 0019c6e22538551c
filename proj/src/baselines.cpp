#include "drimv/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace drimv {

namespace {

ImputedDataset start_from(const MultiViewDataset& ds) {
    validate(ds);
    ImputedDataset out;
    out.data = ds;
    for (const auto& v : ds.views) {
        std::vector<bool> miss(v.present.size());
        for (std::size_t i = 0; i < miss.size(); ++i) miss[i] = !v.present[i];
        out.imputed.push_back(miss);
        out.fallback.emplace_back(v.present.size(), false);
    }
    return out;
}

void mark_complete(ImputedDataset& out) {
    for (auto& v : out.data.views) v.present.assign(v.present.size(), true);
}

Eigen::RowVectorXd present_mean(const ViewBlock& v) {
    const auto rows = v.present_rows();
    if (rows.empty()) throw InvalidArgument("view '" + v.name + "' has no present rows");
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(v.dim());
    for (Index i : rows) mean += v.data.row(i);
    return mean / static_cast<double>(rows.size());
}

}  // namespace

ImputedDataset mean_impute(const MultiViewDataset& ds) {
    ImputedDataset out = start_from(ds);
    for (auto& v : out.data.views) {
        const Eigen::RowVectorXd mean = present_mean(v);
        for (Index i : v.missing_rows()) v.data.row(i) = mean;
    }
    mark_complete(out);
    return out;
}

ImputedDataset knn_impute(const MultiViewDataset& ds, Index k) {
    if (k < 1) throw InvalidArgument("k must be >= 1");
    ImputedDataset out = start_from(ds);
    const Index n = ds.n_instances();
    const auto n_views = ds.views.size();

    for (std::size_t v = 0; v < n_views; ++v) {
        const auto& target = ds.views[v];
        const auto donors = target.present_rows();
        if (donors.empty()) throw InvalidArgument("view '" + target.name + "' has no donors");
        Eigen::RowVectorXd fallback_mean;
        for (Index i = 0; i < n; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            if (target.present[ii]) continue;
            std::vector<std::pair<double, Index>> scored;
            for (Index j : donors) {
                const auto jj = static_cast<std::size_t>(j);
                double dist2 = 0.0;
                bool shared = false;
                for (std::size_t u = 0; u < n_views; ++u) {
                    const auto& view = ds.views[u];
                    if (!view.present[ii] || !view.present[jj]) continue;
                    shared = true;
                    dist2 += (view.data.row(i) - view.data.row(j)).squaredNorm();
                }
                if (shared) scored.emplace_back(dist2, j);
            }
            auto& row = out.data.views[v].data;
            if (scored.empty()) {
                if (fallback_mean.size() == 0) fallback_mean = present_mean(target);
                row.row(i) = fallback_mean;
                out.fallback[v][ii] = true;
                continue;
            }
            const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
            std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end());
            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(target.dim());
            for (std::size_t t = 0; t < take; ++t) acc += target.data.row(scored[t].second);
            row.row(i) = acc / static_cast<double>(take);
        }
    }
    mark_complete(out);
    return out;
}

SvtResult svt_matrix(const Matrix& M, const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& observed,
                     const SvtParams& params) {
    if (observed.rows() != M.rows() || observed.cols() != M.cols()) {
        throw InvalidArgument("observation mask shape differs from matrix");
    }
    const double n_obs = static_cast<double>(observed.count());
    if (n_obs == 0.0) throw InvalidArgument("no observed entries");
    const double size = static_cast<double>(M.rows() * M.cols());
    const double tau = params.tau.value_or(5.0 * std::sqrt(size));
    const double step = params.step.value_or(1.2 * size / n_obs);

    const Matrix mask = observed.cast<double>().matrix();
    const Matrix target = M.cwiseProduct(mask);
    const double target_norm = target.norm();

    SvtResult res;
    res.completed = Matrix::Zero(M.rows(), M.cols());
    if (observed.all()) {
        res.completed = M;
        res.converged = true;
        return res;
    }
    if (target_norm == 0.0) {
        res.converged = true;
        return res;
    }

    Matrix dual = Matrix::Zero(M.rows(), M.cols());
    double last = std::numeric_limits<double>::infinity();
    int growth = 0;
    for (Index it = 0; it < params.max_iters; ++it) {
        Eigen::BDCSVD<Matrix> svd(dual, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vector shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
        res.completed = svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
        const Matrix gap = (target - res.completed).cwiseProduct(mask);
        res.residual = gap.norm() / target_norm;
        res.iterations = it + 1;
        if (!std::isfinite(res.residual)) throw NumericalError("SVT produced non-finite values");
        if (res.residual < params.tol) {
            res.converged = true;
            break;
        }
        growth = res.residual > last ? growth + 1 : 0;
        if (growth >= 10) throw NumericalError("SVT diverged: residual grew for 10 consecutive iterations");
        last = res.residual;
        dual += step * gap;
    }
    return res;
}

ImputedDataset svt_complete(const MultiViewDataset& ds, const SvtParams& params) {
    ImputedDataset out = start_from(ds);
    const Index n = ds.n_instances();
    Index total = 0;
    for (const auto& v : ds.views) total += v.dim();

    Matrix stacked(n, total);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> observed(n, total);
    Index offset = 0;
    for (const auto& v : ds.views) {
        stacked.middleCols(offset, v.dim()) = v.data;
        for (Index i = 0; i < n; ++i) {
            observed.block(i, offset, 1, v.dim()).setConstant(v.present[static_cast<std::size_t>(i)]);
        }
        offset += v.dim();
    }

    const SvtResult res = svt_matrix(stacked, observed, params);
    offset = 0;
    for (auto& v : out.data.views) {
        for (Index i : v.missing_rows()) v.data.row(i) = res.completed.block(i, offset, 1, v.dim());
        offset += v.dim();
    }
    mark_complete(out);
    return out;
}

}  // namespace drimv
