#include "evopipe/learners.hpp"

#include "evopipe/errors.hpp"
#include "evopipe/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace evopipe {

namespace {

// Children purity of a candidate split as the exact fraction
//   ((aL^2+bL^2)/nL + (aR^2+bR^2)/nR) = num/den,  den = nL*nR.
// Maximizing it minimizes the weighted Gini impurity of the children.
struct SplitScore {
    std::int64_t num = -1;
    std::int64_t den = 1;

    bool better_than(const SplitScore& other) const {
        return static_cast<__int128>(num) * other.den >
               static_cast<__int128>(other.num) * den;
    }
    bool equals(const SplitScore& other) const {
        return static_cast<__int128>(num) * other.den ==
               static_cast<__int128>(other.num) * den;
    }
};

SplitScore score_split(std::int64_t aL, std::int64_t bL, std::int64_t aR, std::int64_t bR) {
    const std::int64_t nL = aL + bL;
    const std::int64_t nR = aR + bR;
    return SplitScore{(aL * aL + bL * bL) * nR + (aR * aR + bR * bR) * nL, nL * nR};
}

// Row-major matrix of bucket codes (value <=0 -> 0, ==1 -> 1, >=2 -> 2).
// The two candidate thresholds are exactly the bucket boundaries, so split
// search and partitioning only ever need these codes, and a node's candidate
// features sit in one or two cache lines per row.
struct BucketMatrix {
    std::vector<std::int8_t> cells;
    std::size_t stride = 0;

    explicit BucketMatrix(const Dataset& ds)
        : cells(ds.n_rows() * ds.n_features()), stride(ds.n_features()) {
        for (std::size_t f = 0; f < ds.n_features(); ++f) {
            const auto& col = ds.column(f);
            for (std::size_t r = 0; r < col.size(); ++r) {
                const int v = col[r];
                cells[r * stride + f] = static_cast<std::int8_t>(v <= 0 ? 0 : v == 1 ? 1 : 2);
            }
        }
    }

    const std::int8_t* row(std::size_t r) const { return cells.data() + r * stride; }
};

struct Builder {
    const Dataset& ds;
    const BucketMatrix& buckets;
    const std::vector<std::size_t>& features;
    int mtry;
    int max_depth;
    Rng rng;
    std::vector<DecisionTree::Node> nodes;
    std::vector<std::size_t> feature_scratch;
    std::vector<std::size_t> rows;        // whole tree, partitioned in place
    std::vector<std::size_t> row_scratch; // stable-partition buffer

    static constexpr std::size_t kMaxCandidates = 64;

    // Builds the node owning rows[lo, hi).
    std::int32_t build(std::size_t lo, std::size_t hi, int depth) {
        DecisionTree::Node node;
        for (std::size_t t = lo; t < hi; ++t)
            ++node.counts[static_cast<std::size_t>(ds.labels()[rows[t]])];
        node.majority = node.counts[1] > node.counts[0] ? 1 : 0;

        const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
        int best_feature = -1, best_threshold = 0;
        SplitScore best;

        if (!pure && depth < max_depth) {
            const std::size_t n_candidates = pick_candidates();
            const std::int64_t tot[2] = {node.counts[0], node.counts[1]};
            // Histogram passes over chunks of candidates: bucket x label
            // counts for up to kMaxCandidates features per sweep of the rows.
            for (std::size_t start = 0; start < n_candidates; start += kMaxCandidates) {
                const std::size_t chunk = std::min(kMaxCandidates, n_candidates - start);
                std::int32_t cnt[kMaxCandidates][6];
                for (std::size_t c = 0; c < chunk; ++c)
                    for (int k = 0; k < 6; ++k) cnt[c][k] = 0;
                for (std::size_t t = lo; t < hi; ++t) {
                    const std::size_t r = rows[t];
                    const std::int8_t* cell = buckets.row(r);
                    const int y3 = 3 * ds.labels()[r];
                    for (std::size_t c = 0; c < chunk; ++c)
                        ++cnt[c][y3 + cell[feature_scratch[start + c]]];
                }
                for (std::size_t c = 0; c < chunk; ++c) {
                    const std::size_t f = feature_scratch[start + c];
                    for (int t = 0; t <= 1; ++t) {
                        const std::int64_t aL = t == 0 ? cnt[c][0] : cnt[c][0] + cnt[c][1];
                        const std::int64_t bL = t == 0 ? cnt[c][3] : cnt[c][3] + cnt[c][4];
                        const std::int64_t aR = tot[0] - aL;
                        const std::int64_t bR = tot[1] - bL;
                        if (aL + bL == 0 || aR + bR == 0) continue;
                        const SplitScore s = score_split(aL, bL, aR, bR);
                        const bool wins =
                            best_feature < 0 || s.better_than(best) ||
                            (s.equals(best) &&
                             (static_cast<int>(f) < best_feature ||
                              (static_cast<int>(f) == best_feature && t < best_threshold)));
                        if (wins) {
                            best = s;
                            best_feature = static_cast<int>(f);
                            best_threshold = t;
                        }
                    }
                }
            }
        }

        const auto index = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(node);
        if (best_feature < 0) return index; // leaf: pure, depth cap, or no usable split

        // Stable partition of rows[lo, hi): left block keeps value <= threshold.
        row_scratch.clear();
        std::size_t mid = lo;
        for (std::size_t t = lo; t < hi; ++t) {
            if (buckets.row(rows[t])[static_cast<std::size_t>(best_feature)] <= best_threshold)
                rows[mid++] = rows[t];
            else
                row_scratch.push_back(rows[t]);
        }
        std::copy(row_scratch.begin(), row_scratch.end(),
                  rows.begin() + static_cast<std::ptrdiff_t>(mid));

        nodes[index].feature = best_feature;
        nodes[index].threshold = best_threshold;
        const std::int32_t left = build(lo, mid, depth + 1);
        nodes[index].left = left;
        const std::int32_t right = build(mid, hi, depth + 1);
        nodes[index].right = right;
        return index;
    }

    // Places the candidate feature indices in feature_scratch[0..count).
    std::size_t pick_candidates() {
        if (mtry <= 0 || static_cast<std::size_t>(mtry) >= features.size())
            return feature_scratch.size();
        for (int i = 0; i < mtry; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(i) +
                rng.uniform_index(feature_scratch.size() - static_cast<std::size_t>(i));
            std::swap(feature_scratch[static_cast<std::size_t>(i)], feature_scratch[j]);
        }
        return static_cast<std::size_t>(mtry);
    }
};

double gini_from_counts(std::int64_t a, std::int64_t b) {
    const double n = static_cast<double>(a + b);
    if (n == 0.0) return 0.0;
    const double pa = static_cast<double>(a) / n;
    const double pb = static_cast<double>(b) / n;
    return 1.0 - pa * pa - pb * pb;
}

void normalize_or_zero(std::vector<double>& v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total > 0.0)
        for (double& x : v) x /= total;
    else
        std::fill(v.begin(), v.end(), 0.0);
}

} // namespace

namespace {

DecisionTree fit_with_buckets(const Dataset& ds, const BucketMatrix& buckets,
                              const std::vector<std::size_t>& rows,
                              const std::vector<std::size_t>& features, int mtry,
                              int max_depth, std::uint64_t seed) {
    if (rows.empty()) throw ContractError("fit_decision_tree: no training rows");
    if (max_depth < 1) throw ContractError("fit_decision_tree: max_depth must be >= 1");
    if (features.empty()) throw ContractError("fit_decision_tree: no features");

    Builder builder{ds, buckets, features, mtry, max_depth, Rng(seed), {}, features, rows, {}};
    builder.row_scratch.reserve(rows.size());
    builder.build(0, rows.size(), 0);
    return DecisionTree::from_nodes(std::move(builder.nodes), max_depth, ds.n_features());
}

} // namespace

DecisionTree DecisionTree::from_nodes(std::vector<Node> nodes, int max_depth,
                                      std::size_t n_features) {
    DecisionTree tree;
    tree.nodes_ = std::move(nodes);
    tree.max_depth_ = max_depth;
    tree.n_features_ = n_features;
    for (const auto& n : tree.nodes_)
        if (n.feature >= 0)
            tree.max_feature_used_ =
                std::max(tree.max_feature_used_, static_cast<std::size_t>(n.feature));
    return tree;
}

DecisionTree DecisionTree::fit_on_rows(const Dataset& ds, const std::vector<std::size_t>& rows,
                                       const std::vector<std::size_t>& features, int mtry,
                                       int max_depth, std::uint64_t seed) {
    const BucketMatrix buckets(ds);
    return fit_with_buckets(ds, buckets, rows, features, mtry, max_depth, seed);
}

namespace {

int walk_buckets(const std::vector<DecisionTree::Node>& nodes, const std::int8_t* cell) {
    std::int32_t i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = cell[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].majority;
}

} // namespace

std::vector<int> DecisionTree::predict(const Dataset& ds) const {
    if (max_feature_used_ >= ds.n_features())
        throw ContractError("predict_tree: dataset lacks a feature the model splits on");
    const BucketMatrix buckets(ds);
    std::vector<int> out(ds.n_rows());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) out[r] = walk_buckets(nodes_, buckets.row(r));
    return out;
}

int DecisionTree::predict_row(const Dataset& ds, std::size_t row) const {
    std::int32_t i = 0;
    while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        i = ds.column(static_cast<std::size_t>(n.feature))[row] <= n.threshold ? n.left
                                                                               : n.right;
    }
    return nodes_[static_cast<std::size_t>(i)].majority;
}

std::vector<double> DecisionTree::gini_importance() const {
    std::vector<double> scores(n_features_, 0.0);
    if (nodes_.empty()) return scores;
    const auto n_root = static_cast<double>(nodes_[0].counts[0] + nodes_[0].counts[1]);
    for (const Node& node : nodes_) {
        if (node.feature < 0) continue;
        const Node& l = nodes_[static_cast<std::size_t>(node.left)];
        const Node& r = nodes_[static_cast<std::size_t>(node.right)];
        const double n_node = static_cast<double>(node.counts[0] + node.counts[1]);
        const double n_l = static_cast<double>(l.counts[0] + l.counts[1]);
        const double n_r = static_cast<double>(r.counts[0] + r.counts[1]);
        const double decrease = gini_from_counts(node.counts[0], node.counts[1]) -
                                (n_l / n_node) * gini_from_counts(l.counts[0], l.counts[1]) -
                                (n_r / n_node) * gini_from_counts(r.counts[0], r.counts[1]);
        scores[static_cast<std::size_t>(node.feature)] += (n_node / n_root) * decrease;
    }
    normalize_or_zero(scores);
    return scores;
}

RandomForest RandomForest::fit(const Dataset& ds, int n_trees, int max_depth,
                               std::uint64_t seed) {
    if (n_trees < 1) throw ContractError("fit_random_forest: n_trees must be >= 1");
    const auto train = ds.train_rows();
    if (train.empty()) throw ContractError("fit_random_forest: no training rows");
    if (ds.n_features() == 0) throw ContractError("fit_random_forest: no features");

    std::vector<std::size_t> all_features(ds.n_features());
    std::iota(all_features.begin(), all_features.end(), 0);
    const int mtry = static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(ds.n_features()))));

    const BucketMatrix buckets(ds); // shared by every tree

    RandomForest forest;
    forest.trees_.reserve(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        const std::uint64_t tree_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
        Rng rng(tree_seed);
        std::vector<std::size_t> bootstrap(train.size());
        for (auto& r : bootstrap) r = train[rng.uniform_index(train.size())];
        forest.trees_.push_back(fit_with_buckets(ds, buckets, bootstrap, all_features, mtry,
                                                 max_depth, rng.next_u64()));
        forest.tree_seeds_.push_back(tree_seed);
    }
    return forest;
}

std::vector<int> RandomForest::predict(const Dataset& ds) const {
    for (const auto& tree : trees_)
        if (tree.max_feature_used() >= ds.n_features())
            throw ContractError("predict_forest: dataset lacks a feature the model splits on");
    const BucketMatrix buckets(ds);
    std::vector<int> ones(ds.n_rows(), 0);
    for (const auto& tree : trees_)
        for (std::size_t r = 0; r < ds.n_rows(); ++r)
            ones[r] += walk_buckets(tree.nodes(), buckets.row(r));
    std::vector<int> out(ds.n_rows());
    const auto n = static_cast<int>(trees_.size());
    for (std::size_t r = 0; r < out.size(); ++r)
        out[r] = 2 * ones[r] > n ? 1 : 0; // exact tie -> 0
    return out;
}

std::vector<double> RandomForest::gini_importance() const {
    if (trees_.empty()) return {};
    std::vector<double> avg(trees_.front().n_features_at_fit(), 0.0);
    for (const auto& tree : trees_) {
        const auto scores = tree.gini_importance();
        for (std::size_t f = 0; f < scores.size(); ++f) avg[f] += scores[f];
    }
    for (double& x : avg) x /= static_cast<double>(trees_.size());
    normalize_or_zero(avg);
    return avg;
}

DecisionTree fit_decision_tree(const Dataset& ds,
                               const std::vector<std::size_t>* feature_subset, int max_depth,
                               std::uint64_t seed) {
    std::vector<std::size_t> features;
    if (feature_subset) {
        features = *feature_subset;
        for (std::size_t f : features)
            if (f >= ds.n_features())
                throw ContractError("fit_decision_tree: feature subset index out of range");
    } else {
        features.resize(ds.n_features());
        std::iota(features.begin(), features.end(), 0);
    }
    return DecisionTree::fit_on_rows(ds, ds.train_rows(), features, 0, max_depth, seed);
}

RandomForest fit_random_forest(const Dataset& ds, int n_trees, int max_depth,
                               std::uint64_t seed) {
    return RandomForest::fit(ds, n_trees, max_depth, seed);
}

std::vector<int> predict_tree(const DecisionTree& model, const Dataset& ds) {
    return model.predict(ds);
}

std::vector<int> predict_forest(const RandomForest& model, const Dataset& ds) {
    return model.predict(ds);
}

std::vector<double> gini_importance(const DecisionTree& model) {
    return model.gini_importance();
}

std::vector<double> gini_importance(const RandomForest& model) {
    return model.gini_importance();
}

} // namespace evopipe
