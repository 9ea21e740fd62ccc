#pragma once

#include "evopipe/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evopipe {

/// Tree depth used by classifier operators' random forests. The forest
/// operator's evolved hyperparameter is the tree count, not the depth.
inline constexpr int kForestMaxDepth = 10;

/// Depth of the two-feature probe trees scored by op_select_pairs. Depth 4 is
/// enough to fully partition two genotype-coded columns at thresholds {0,1}.
inline constexpr int kPairProbeDepth = 4;

/// Hands out SynF_<id> names, unique within one pipeline evaluation.
struct SyntheticFeatureCounter {
    int next_id = 1;

    std::string fresh() { return "SynF_" + std::to_string(next_id++); }
};

/// A classifier operator's output dataset plus what the report machinery
/// wants to know about the model fitted inside it.
struct ClassifyResult {
    Dataset output;
    std::vector<double> importances; // indexed by the INPUT dataset's columns
};

/// Fits a decision tree on the Train rows, writes its predictions for every
/// row into the guess column, and appends them as a persistent SynF feature.
Dataset op_classify_dt(const Dataset& ds, int max_depth, SyntheticFeatureCounter& counter,
                       std::uint64_t seed);
ClassifyResult op_classify_dt_detailed(const Dataset& ds, int max_depth,
                                       SyntheticFeatureCounter& counter, std::uint64_t seed);

/// Random-forest variant of op_classify_dt.
Dataset op_classify_rf(const Dataset& ds, int n_trees, SyntheticFeatureCounter& counter,
                       std::uint64_t seed);
ClassifyResult op_classify_rf_detailed(const Dataset& ds, int n_trees,
                                       SyntheticFeatureCounter& counter, std::uint64_t seed);

/// Scores every unordered feature pair by the training balanced accuracy of a
/// two-feature probe tree, then keeps the union of features appearing in the
/// top n_pairs pairs. Guess, labels, and partition pass through unchanged.
Dataset op_select_pairs(const Dataset& ds, int n_pairs);

/// Feature union by name of two datasets derived from the same root input.
/// Guess columns are dropped: a merge has no single most recent classifier.
Dataset op_combine(const Dataset& a, const Dataset& b);

} // namespace evopipe
