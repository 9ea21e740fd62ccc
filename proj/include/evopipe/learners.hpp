#pragma once

#include "evopipe/dataset.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace evopipe {

/// Binary CART classifier over integer features. Splits send value <= threshold
/// left, the rest right; candidate thresholds are the integer cuts {0, 1},
/// which fully separate genotype values {0,1,2} and binary synthetic features.
class DecisionTree {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        int threshold = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::array<std::int64_t, 2> counts{0, 0}; // training class counts reaching this node
        int majority = 0;
    };

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    int max_depth() const noexcept { return max_depth_; }
    std::size_t n_features_at_fit() const noexcept { return n_features_; }
    std::size_t max_feature_used() const noexcept { return max_feature_used_; }

    std::vector<int> predict(const Dataset& ds) const;
    int predict_row(const Dataset& ds, std::size_t row) const;

    /// Per-feature normalized impurity-decrease scores (sum 1, or all zeros
    /// for a split-free tree), indexed by the fitting dataset's columns.
    std::vector<double> gini_importance() const;

    /// Grows a tree on an explicit multiset of rows. mtry > 0 samples that many
    /// candidate features per split from `features` (the forest path);
    /// mtry == 0 considers all of them.
    static DecisionTree fit_on_rows(const Dataset& ds, const std::vector<std::size_t>& rows,
                                    const std::vector<std::size_t>& features, int mtry,
                                    int max_depth, std::uint64_t seed);

    static DecisionTree from_nodes(std::vector<Node> nodes, int max_depth,
                                   std::size_t n_features);

private:
    std::vector<Node> nodes_;
    int max_depth_ = 1;
    std::size_t n_features_ = 0;
    std::size_t max_feature_used_ = 0;
};

/// Bagged ensemble of CART trees; each tree sees a bootstrap sample of the
/// training rows and ceil(sqrt(F)) candidate features per split.
class RandomForest {
public:
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    const std::vector<std::uint64_t>& tree_seeds() const noexcept { return tree_seeds_; }

    /// Majority vote across trees; an exact tie votes label 0.
    std::vector<int> predict(const Dataset& ds) const;

    std::vector<double> gini_importance() const;

    static RandomForest fit(const Dataset& ds, int n_trees, int max_depth, std::uint64_t seed);

private:
    std::vector<DecisionTree> trees_;
    std::vector<std::uint64_t> tree_seeds_;
};

/// Fits on the Train rows of ds. feature_subset, when non-null, restricts the
/// columns the tree may split on (indices refer to ds columns). seed only
/// matters when per-split feature sampling is active, which it is not here.
DecisionTree fit_decision_tree(const Dataset& ds,
                               const std::vector<std::size_t>* feature_subset, int max_depth,
                               std::uint64_t seed);

RandomForest fit_random_forest(const Dataset& ds, int n_trees, int max_depth,
                               std::uint64_t seed);

std::vector<int> predict_tree(const DecisionTree& model, const Dataset& ds);
std::vector<int> predict_forest(const RandomForest& model, const Dataset& ds);

std::vector<double> gini_importance(const DecisionTree& model);
std::vector<double> gini_importance(const RandomForest& model);

} // namespace evopipe
