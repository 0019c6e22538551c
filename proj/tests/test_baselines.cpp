#include "drimv/baselines.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace drimv;

namespace {

void check_present_untouched(const MultiViewDataset& in, const ImputedDataset& out) {
    for (std::size_t v = 0; v < in.views.size(); ++v) {
        for (Index i : in.views[v].present_rows()) {
            CHECK((out.data.views[v].data.row(i).array() == in.views[v].data.row(i).array()).all());
        }
        CHECK(out.data.views[v].n_present() == in.n_instances());
        for (std::size_t i = 0; i < in.views[v].present.size(); ++i) {
            CHECK(out.imputed[v][i] == !in.views[v].present[i]);
        }
    }
}

double imputed_rmse(const MultiViewDataset& masked, const ImputedDataset& out, const MultiViewDataset& truth) {
    double se = 0.0;
    double count = 0.0;
    for (std::size_t v = 0; v < masked.views.size(); ++v) {
        for (Index i : masked.views[v].missing_rows()) {
            se += (out.data.views[v].data.row(i) - truth.views[v].data.row(i)).squaredNorm();
            count += static_cast<double>(masked.views[v].dim());
        }
    }
    return std::sqrt(se / count);
}

MultiViewDataset two_row_view() {
    MultiViewDataset ds;
    ds.n_classes = 1;
    ds.labels = {0, 0, 0};
    ViewBlock a{"a", Matrix::Zero(3, 2), {true, true, false}};
    a.data << 0, 2, 2, 0, 0, 0;
    ViewBlock b{"b", Matrix::Ones(3, 1), {true, true, true}};
    ds.views = {a, b};
    return ds;
}

}  // namespace

TEST_CASE("mean imputation fills column means") {
    const auto ds = two_row_view();
    const auto out = mean_impute(ds);
    CHECK(out.data.views[0].data(2, 0) == 1.0);
    CHECK(out.data.views[0].data(2, 1) == 1.0);
    check_present_untouched(ds, out);
}

TEST_CASE("mean imputation: identity on complete data, copy of a lone present row, idempotence") {
    const auto full = oracle::random_dataset(6, {3, 2}, 2, 0.0, 3);
    const auto same = mean_impute(full);
    for (std::size_t v = 0; v < 2; ++v) CHECK((same.data.views[v].data.array() == full.views[v].data.array()).all());

    auto lone = full;
    for (std::size_t i = 1; i < 6; ++i) lone.views[0].present[i] = false;
    canonicalize(lone);
    const auto out = mean_impute(lone);
    for (Index i = 1; i < 6; ++i) CHECK(out.data.views[0].data.row(i) == full.views[0].data.row(0));

    const auto masked = oracle::random_dataset(20, {3, 4}, 2, 0.4, 5);
    const auto once = mean_impute(masked);
    const auto twice = mean_impute(once.data);
    for (std::size_t v = 0; v < 2; ++v) CHECK((once.data.views[v].data.array() == twice.data.views[v].data.array()).all());
}

TEST_CASE("KNN imputation: exact donor copy, full neighbourhood is the mean") {
    MultiViewDataset ds;
    ds.n_classes = 1;
    ds.labels = {0, 0, 0, 0};
    ViewBlock a{"a", Matrix::Zero(4, 2), {true, true, true, true}};
    a.data << 0.1, 0.2, 0.9, 0.8, 0.1, 0.2, 0.5, 0.5;
    ViewBlock b{"b", Matrix::Zero(4, 2), {true, true, false, true}};
    b.data << 7, 8, 1, 2, 0, 0, 3, 3;
    ds.views = {a, b};

    const auto k1 = knn_impute(ds, 1);
    CHECK(k1.data.views[1].data(2, 0) == 7.0);
    CHECK(k1.data.views[1].data(2, 1) == 8.0);
    check_present_untouched(ds, k1);

    const auto all = knn_impute(ds, 3);
    const auto mean = mean_impute(ds);
    CHECK((all.data.views[1].data.row(2) - mean.data.views[1].data.row(2)).norm() <= 1e-14);
    CHECK_THROWS_AS(knn_impute(ds, 0), InvalidArgument);
}

TEST_CASE("KNN with k = 1 copies some present row; no shared view falls back to the mean") {
    const auto ds = oracle::random_dataset(25, {3, 2, 4}, 2, 0.5, 9);
    const auto out = knn_impute(ds, 1);
    check_present_untouched(ds, out);
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        for (Index i : ds.views[v].missing_rows()) {
            if (out.fallback[v][static_cast<std::size_t>(i)]) continue;
            bool found = false;
            for (Index j : ds.views[v].present_rows()) {
                found = found || (out.data.views[v].data.row(i).array() == ds.views[v].data.row(j).array()).all();
            }
            CHECK(found);
        }
    }

    // Instance 2 sees only view a; every donor of view b lacks view a.
    MultiViewDataset iso;
    iso.n_classes = 1;
    iso.labels = {0, 0, 0};
    ViewBlock a{"a", Matrix::Zero(3, 1), {false, false, true}};
    a.data(2, 0) = 1.0;
    ViewBlock b{"b", Matrix::Zero(3, 1), {true, true, false}};
    b.data << 2.0, 4.0, 0.0;
    iso.views = {a, b};
    const auto fb = knn_impute(iso, 1);
    CHECK(fb.fallback[1][2]);
    CHECK(fb.data.views[1].data(2, 0) == 3.0);
}

TEST_CASE("KNN beats the mean on structured data") {
    const auto full = gen_synthetic({});
    const auto masked = apply_mask(full, 0.3, 4);
    const auto stats = fit_normalizer(masked);
    const auto nm = apply_normalizer(masked, stats);
    const auto truth = apply_normalizer(full, stats);
    CHECK(imputed_rmse(nm, knn_impute(nm, 5), truth) <= imputed_rmse(nm, mean_impute(nm), truth));
}

TEST_CASE("SVT recovers a hidden part of a rank-1 matrix") {
    Rng rng(2);
    const Matrix u = uniform_matrix(8, 1, rng).array() + 0.5;
    const Matrix w = uniform_matrix(6, 1, rng).array() + 0.5;
    const Matrix M = u * w.transpose();
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> obs(8, 6);
    obs.setConstant(true);
    // Hide 30% of the entries (14 of 48) in a pattern that leaves every row and column observed.
    int hidden = 0;
    for (Index i = 0; i < 8 && hidden < 14; ++i) {
        for (Index j = 0; j < 6 && hidden < 14; ++j) {
            if ((i + 2 * j) % 3 == 0) {
                obs(i, j) = false;
                ++hidden;
            }
        }
    }
    SvtParams p;
    p.max_iters = 5000;
    p.tol = 1e-7;
    const auto res = svt_matrix(M, obs, p);
    double err = 0.0;
    double ref = 0.0;
    for (Index i = 0; i < 8; ++i) {
        for (Index j = 0; j < 6; ++j) {
            if (obs(i, j)) continue;
            err += std::pow(res.completed(i, j) - M(i, j), 2);
            ref += M(i, j) * M(i, j);
        }
    }
    CHECK(std::sqrt(err / ref) <= 1e-3);
}

TEST_CASE("SVT: identity without missing rows, zero fill as tau grows, present rows restored") {
    const auto full = oracle::random_dataset(6, {2, 3}, 1, 0.0, 6);
    const auto same = svt_complete(full);
    for (std::size_t v = 0; v < 2; ++v) CHECK((same.data.views[v].data.array() == full.views[v].data.array()).all());

    const auto masked = oracle::random_dataset(12, {2, 3}, 1, 0.4, 7);
    SvtParams huge;
    huge.tau = 1e12;
    huge.max_iters = 5;
    const auto zero = svt_complete(masked, huge);
    for (std::size_t v = 0; v < 2; ++v) {
        for (Index i : masked.views[v].missing_rows()) CHECK(zero.data.views[v].data.row(i).isZero(0.0));
    }
    check_present_untouched(masked, svt_complete(masked));
}
