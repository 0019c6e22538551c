#include "drimv/representation.hpp"

#include <cmath>

namespace drimv {

void DrlConfig::validate() const {
    if (latent_dim < 1) throw InvalidArgument("latent dimension must be >= 1");
    if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0) throw InvalidArgument("lambdas must be >= 0");
    if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
    if (!(ridge > 0.0)) throw InvalidArgument("ridge must be > 0");
    if (neighbors < 1) throw InvalidArgument("neighbor count must be >= 1");
    if (graph_refresh < 0) throw InvalidArgument("graph_refresh must be >= 0");
    if (std::isnan(tol) || tol < 0.0) throw InvalidArgument("tol must be >= 0");
}

namespace {

// Solves (lhs) X = rhs for symmetric positive definite lhs.
Matrix spd_solve(const Matrix& lhs, const Matrix& rhs, const char* what) {
    Eigen::LLT<Matrix> llt(lhs);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
    // Ridge below round-off for this scale; retry with pivoting.
    Eigen::LDLT<Matrix> ldlt(lhs);
    Matrix sol = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !sol.allFinite()) {
        throw NumericalError(std::string("singular system in ") + what);
    }
    return sol;
}

Matrix reconstruction(const DrlModel& model, const ViewFactors& f) {
    return f.Hs.transpose() * f.Bs + model.Hc.transpose() * f.Bc;
}

void refresh_imputed(ViewFactors& f) {
    f.imputed = f.observed;
    for (Index i : f.missing) f.imputed.row(i) = f.U.row(i);
}

void check_finite(const DrlModel& model, const char* stage) {
    bool ok = model.Hc.allFinite();
    for (const auto& f : model.views) {
        ok = ok && f.Hs.allFinite() && f.Bs.allFinite() && f.Bc.allFinite() && f.U.allFinite();
    }
    if (!ok) throw NumericalError(std::string("non-finite parameters after ") + stage);
}

// Builds the view states shared by training and test phases.
DrlModel blank_state(const MultiViewDataset& ds, Index m, const std::vector<Vector>& warm_means, Rng& rng) {
    DrlModel model;
    const Index n = ds.n_instances();
    model.Hc = uniform_matrix(m, n, rng);
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        const auto& view = ds.views[v];
        ViewFactors f;
        f.name = view.name;
        f.Hs = uniform_matrix(m, n, rng);
        f.observed = view.data;
        f.missing = view.missing_rows();
        f.U = Matrix::Zero(n, view.dim());
        for (Index i : f.missing) f.U.row(i) = warm_means[v].transpose();
        refresh_imputed(f);
        model.views.push_back(std::move(f));
    }
    return model;
}

}  // namespace

DrlModel init_model(const MultiViewDataset& ds, const DrlConfig& cfg) {
    cfg.validate();
    validate(ds);
    const Index m = cfg.latent_dim;

    std::vector<Vector> means;
    for (const auto& view : ds.views) {
        const auto rows = view.present_rows();
        Vector mean = Vector::Zero(view.dim());
        for (Index i : rows) mean += view.data.row(i).transpose();
        if (!rows.empty()) mean /= static_cast<double>(rows.size());
        means.push_back(mean);
    }

    Rng rng(cfg.seed);
    DrlModel model = blank_state(ds, m, means, rng);
    for (auto& f : model.views) {
        f.Bs = uniform_matrix(m, f.observed.cols(), rng);
        f.Bc = uniform_matrix(m, f.observed.cols(), rng);
    }
    model.feature_means = std::move(means);
    for (const auto& view : ds.views) {
        if (m > view.dim()) {
            model.warnings.push_back("latent dimension " + std::to_string(m) + " exceeds dimension " +
                                     std::to_string(view.dim()) + " of view '" + view.name +
                                     "' (over-parameterized)");
        }
    }
    return model;
}

GraphSet refresh_graphs(const DrlModel& model, const DrlConfig& cfg) {
    GraphSet g;
    for (const auto& f : model.views) {
        if (!f.Hs.allFinite()) throw NumericalError("non-finite specific representation");
        g.specific.push_back(build_operators(f.Hs.transpose(), cfg.neighbors));
    }
    if (!model.Hc.allFinite()) throw NumericalError("non-finite common representation");
    g.common = build_operators(model.Hc.transpose(), cfg.neighbors);
    return g;
}

void update_U(DrlModel& model, Index v, const GraphSet& graphs, const DrlConfig& cfg) {
    auto& f = model.views[static_cast<std::size_t>(v)];
    const auto& miss = f.missing;
    if (miss.empty()) return;
    const auto& spec = graphs.specific[static_cast<std::size_t>(v)];
    const Matrix reg = cfg.lambda2 * (spec.laplacian + graphs.common.laplacian) +
                       cfg.lambda3 * (spec.reconstruction + graphs.common.reconstruction);
    const Matrix target = reconstruction(model, f);
    // Observed rows enter the right-hand side through reg * X (missing rows of X are zero).
    const Matrix coupling = reg * f.observed;

    const auto k = static_cast<Index>(miss.size());
    Matrix lhs(k, k);
    Matrix rhs(k, f.observed.cols());
    for (Index a = 0; a < k; ++a) {
        for (Index b = 0; b < k; ++b) lhs(a, b) = reg(miss[a], miss[b]);
        lhs(a, a) += 1.0 + cfg.ridge;
        rhs.row(a) = target.row(miss[a]) - coupling.row(miss[a]);
    }
    const Matrix sol = spd_solve(lhs, rhs, "update_U");
    for (Index a = 0; a < k; ++a) f.U.row(miss[a]) = sol.row(a);
    refresh_imputed(f);
}

void update_Hs(DrlModel& model, Index v, const DrlConfig& cfg) {
    auto& f = model.views[static_cast<std::size_t>(v)];
    Matrix lhs = f.Bs * f.Bs.transpose() + cfg.lambda1 * (model.Hc * model.Hc.transpose());
    lhs.diagonal().array() += cfg.ridge;
    const Matrix rhs = f.Bs * f.imputed.transpose() - f.Bs * f.Bc.transpose() * model.Hc;
    f.Hs = spd_solve(lhs, rhs, "update_Hs");
}

void update_Bs(DrlModel& model, Index v, const DrlConfig& cfg) {
    auto& f = model.views[static_cast<std::size_t>(v)];
    Matrix lhs = f.Hs * f.Hs.transpose();
    lhs.diagonal().array() += cfg.ridge;
    const Matrix rhs = f.Hs * f.imputed - f.Hs * model.Hc.transpose() * f.Bc;
    f.Bs = spd_solve(lhs, rhs, "update_Bs");
}

void update_Bc(DrlModel& model, Index v, const DrlConfig& cfg) {
    auto& f = model.views[static_cast<std::size_t>(v)];
    Matrix lhs = model.Hc * model.Hc.transpose();
    lhs.diagonal().array() += cfg.ridge;
    const Matrix rhs = model.Hc * f.imputed - model.Hc * f.Hs.transpose() * f.Bs;
    f.Bc = spd_solve(lhs, rhs, "update_Bc");
}

void update_Hc(DrlModel& model, const DrlConfig& cfg) {
    const Index m = model.latent_dim();
    Matrix lhs = Matrix::Zero(m, m);
    Matrix rhs = Matrix::Zero(m, model.n_instances());
    for (const auto& f : model.views) {
        lhs += f.Bc * f.Bc.transpose() + cfg.lambda1 * (f.Hs * f.Hs.transpose());
        rhs += f.Bc * f.imputed.transpose() - f.Bc * f.Bs.transpose() * f.Hs;
    }
    lhs.diagonal().array() += cfg.ridge;
    model.Hc = spd_solve(lhs, rhs, "update_Hc");
}

double data_term(const DrlModel& model) {
    double j = 0.0;
    for (const auto& f : model.views) j += (f.imputed - reconstruction(model, f)).squaredNorm();
    return j;
}

double objective(const DrlModel& model, const GraphSet& graphs, const DrlConfig& cfg) {
    const Matrix hc_gram = model.Hc * model.Hc.transpose();
    double fit_term = 0.0;
    double orth = 0.0;
    double first = 0.0;
    double second = 0.0;
    for (std::size_t v = 0; v < model.views.size(); ++v) {
        const auto& f = model.views[v];
        const auto& spec = graphs.specific[v];
        fit_term += (f.imputed - reconstruction(model, f)).squaredNorm();
        // ||Hs^T Hc||_F^2 = <Hs Hs^T, Hc Hc^T>
        orth += (f.Hs * f.Hs.transpose()).cwiseProduct(hc_gram).sum();
        first += f.imputed.cwiseProduct((spec.laplacian + graphs.common.laplacian) * f.imputed).sum();
        second += f.imputed.cwiseProduct((spec.reconstruction + graphs.common.reconstruction) * f.imputed).sum();
    }
    const double j = fit_term + cfg.lambda1 * orth + cfg.lambda2 * first + cfg.lambda3 * second;
    if (!std::isfinite(j)) throw NumericalError("objective is not finite (divergence)");
    return j;
}

namespace {

bool refresh_due(const DrlConfig& cfg, Index iter) {
    return cfg.graph_refresh > 0 && iter > 0 && iter % cfg.graph_refresh == 0;
}

bool has_converged(double prev, double cur, double tol) {
    return std::abs(cur - prev) / std::max(cur, 1.0) < tol;
}

}  // namespace

DrlModel fit(const MultiViewDataset& ds, const DrlConfig& cfg) {
    DrlModel model = init_model(ds, cfg);
    GraphSet graphs = refresh_graphs(model, cfg);
    double prev = objective(model, graphs, cfg);
    model.initial_objective = prev;

    for (Index t = 0; t < cfg.max_iters; ++t) {
        if (refresh_due(cfg, t)) graphs = refresh_graphs(model, cfg);
        for (Index v = 0; v < model.n_views(); ++v) {
            update_U(model, v, graphs, cfg);
            update_Hs(model, v, cfg);
            update_Bs(model, v, cfg);
            update_Bc(model, v, cfg);
        }
        update_Hc(model, cfg);
        check_finite(model, "training iteration");
        const double cur = objective(model, graphs, cfg);
        model.objective_trace.push_back(cur);
        if (has_converged(prev, cur, cfg.tol)) {
            model.converged = true;
            break;
        }
        prev = cur;
    }
    return model;
}

DrlModel transform(const DrlModel& model, const MultiViewDataset& test, const DrlConfig& cfg) {
    cfg.validate();
    validate(test);
    if (test.n_views() != model.n_views()) {
        throw InvalidArgument("model has " + std::to_string(model.n_views()) + " views, data has " +
                              std::to_string(test.n_views()));
    }
    for (std::size_t v = 0; v < model.views.size(); ++v) {
        const Index expected = model.views[v].Bs.cols();
        const Index actual = test.views[v].dim();
        if (expected != actual) {
            throw InvalidArgument("view '" + test.views[v].name + "' has dimension " + std::to_string(actual) +
                                  ", model expects " + std::to_string(expected));
        }
    }

    Rng rng(derive_seed(cfg.seed, 0x7465737470686173ULL));
    DrlModel state = blank_state(test, model.latent_dim(), model.feature_means, rng);
    for (std::size_t v = 0; v < state.views.size(); ++v) {
        state.views[v].Bs = model.views[v].Bs;
        state.views[v].Bc = model.views[v].Bc;
        // Nothing observes the specific code of a missing view at test time; a random start
        // would survive every update, so it starts (and stays) at zero.
        for (Index i : state.views[v].missing) state.views[v].Hs.col(i).setZero();
    }
    state.feature_means = model.feature_means;

    GraphSet graphs = refresh_graphs(state, cfg);
    double prev = objective(state, graphs, cfg);
    state.initial_objective = prev;
    for (Index t = 0; t < cfg.max_iters; ++t) {
        if (refresh_due(cfg, t)) graphs = refresh_graphs(state, cfg);
        for (Index v = 0; v < state.n_views(); ++v) {
            update_U(state, v, graphs, cfg);
            update_Hs(state, v, cfg);
        }
        update_Hc(state, cfg);
        check_finite(state, "test iteration");
        const double cur = objective(state, graphs, cfg);
        state.objective_trace.push_back(cur);
        if (has_converged(prev, cur, cfg.tol)) {
            state.converged = true;
            break;
        }
        prev = cur;
    }
    return state;
}

}  // namespace drimv
