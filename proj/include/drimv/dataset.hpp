#pragma once

#include "drimv/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace drimv {

/// One view: N rows of d features plus a per-row presence flag.
/// Rows with present[i] == false hold 0.0 in every column.
struct ViewBlock {
    std::string name;
    Matrix data;
    std::vector<bool> present;

    Index dim() const { return data.cols(); }
    Index n_present() const;
    /// Diagonal of the indicator matrix E (1 = missing).
    Vector indicator() const;
    std::vector<Index> missing_rows() const;
    std::vector<Index> present_rows() const;
};

struct MultiViewDataset {
    std::vector<ViewBlock> views;
    std::vector<int> labels;
    int n_classes = 0;

    Index n_instances() const { return static_cast<Index>(labels.size()); }
    Index n_views() const { return static_cast<Index>(views.size()); }
    std::vector<Index> dims() const;
    /// True when every view observes every instance.
    bool complete() const;
};

/// Throws InvalidArgument when any dataset invariant is broken.
void validate(const MultiViewDataset& ds);

/// Zero-fills the rows of missing instances in place.
void canonicalize(MultiViewDataset& ds);

MultiViewDataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes <dir>/manifest.json plus one CSV per view, labels.csv and mask.csv.
/// Returns the manifest path.
std::filesystem::path save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir);

/// Per-view per-feature ranges over present rows.
struct NormalizationStats {
    std::vector<Vector> min;
    std::vector<Vector> max;
};

NormalizationStats fit_normalizer(const MultiViewDataset& ds);
MultiViewDataset apply_normalizer(const MultiViewDataset& ds, const NormalizationStats& stats);
/// Inverse map of apply_normalizer for unclamped values (constant features map back to min).
MultiViewDataset invert_normalizer(const MultiViewDataset& ds, const NormalizationStats& stats);

/// Removes floor(rate * N) present instances per view, then repairs instances left with no view.
MultiViewDataset apply_mask(const MultiViewDataset& ds, double rate, std::uint64_t seed);

MultiViewDataset subset(const MultiViewDataset& ds, const std::vector<Index>& rows);

struct TrainTestSplit {
    std::vector<Index> train;
    std::vector<Index> test;
};

TrainTestSplit split_indices(const std::vector<int>& labels, int n_classes, double test_fraction,
                             std::uint64_t seed, bool stratified);

std::pair<MultiViewDataset, MultiViewDataset> split_train_test(const MultiViewDataset& ds,
                                                               double test_fraction,
                                                               std::uint64_t seed,
                                                               bool stratified);

Matrix one_hot(const std::vector<int>& labels, int n_classes);

struct SyntheticSpec {
    Index n = 200;
    Index n_views = 3;
    std::vector<Index> dims{8, 10, 12};
    Index latent_dim = 4;
    double noise_sd = 0.01;
    double class_sep = 6.0;
    int n_classes = 2;
    std::uint64_t seed = 1;
};

/// Planted common/specific factor model: X^v = Hs^vT Bs^v + Hc^T Bc^v + noise.
/// Class information lives in the common factor Hc.
MultiViewDataset gen_synthetic(const SyntheticSpec& spec);

}  // namespace drimv
