#include "evopipe/operators.hpp"

#include "evopipe/errors.hpp"
#include "evopipe/learners.hpp"

#include <algorithm>
#include <cstddef>
#include <unordered_set>

namespace evopipe {

namespace {

void require_fittable(const Dataset& ds) {
    if (ds.n_features() == 0) throw PipelineFailure("classifier operator: no features");
    if (ds.train_rows().empty()) throw PipelineFailure("classifier operator: no Train rows");
}

Dataset attach_predictions(const Dataset& ds, std::vector<int> predictions,
                           SyntheticFeatureCounter& counter) {
    return ds.with_guess(predictions).with_extra_column(counter.fresh(),
                                                        std::move(predictions));
}

} // namespace

Dataset op_classify_dt(const Dataset& ds, int max_depth, SyntheticFeatureCounter& counter,
                       std::uint64_t seed) {
    require_fittable(ds);
    const DecisionTree model = fit_decision_tree(ds, nullptr, max_depth, seed);
    return attach_predictions(ds, model.predict(ds), counter);
}

ClassifyResult op_classify_dt_detailed(const Dataset& ds, int max_depth,
                                       SyntheticFeatureCounter& counter, std::uint64_t seed) {
    require_fittable(ds);
    const DecisionTree model = fit_decision_tree(ds, nullptr, max_depth, seed);
    return ClassifyResult{attach_predictions(ds, model.predict(ds), counter),
                          model.gini_importance()};
}

Dataset op_classify_rf(const Dataset& ds, int n_trees, SyntheticFeatureCounter& counter,
                       std::uint64_t seed) {
    require_fittable(ds);
    const RandomForest model = fit_random_forest(ds, n_trees, kForestMaxDepth, seed);
    return attach_predictions(ds, model.predict(ds), counter);
}

ClassifyResult op_classify_rf_detailed(const Dataset& ds, int n_trees,
                                       SyntheticFeatureCounter& counter, std::uint64_t seed) {
    require_fittable(ds);
    const RandomForest model = fit_random_forest(ds, n_trees, kForestMaxDepth, seed);
    return ClassifyResult{attach_predictions(ds, model.predict(ds), counter),
                          model.gini_importance()};
}

Dataset op_select_pairs(const Dataset& ds, int n_pairs) {
    if (n_pairs < 1) throw ContractError("op_select_pairs: n_pairs must be >= 1");
    if (ds.n_features() < 2) throw PipelineFailure("op_select_pairs: fewer than 2 features");
    const auto train = ds.train_rows();
    if (train.empty()) throw PipelineFailure("op_select_pairs: no Train rows");

    std::int64_t n0 = 0, n1 = 0;
    for (std::size_t r : train) (ds.labels()[r] == 0 ? n0 : n1)++;
    if (n0 == 0 || n1 == 0)
        throw PipelineFailure("op_select_pairs: single-class training rows");

    // The thresholds {0,1} split a column into the buckets <=0, ==1, >=2, and
    // the probe depth applies every useful cut, so the probe tree's training
    // predictions are exactly the per-(bucket,bucket) cell majorities. Scoring
    // the cells directly avoids building C(F,2) trees.
    const std::size_t n_train = train.size();
    const std::size_t F = ds.n_features();
    std::vector<std::int8_t> buckets(F * n_train);
    for (std::size_t f = 0; f < F; ++f) {
        const auto& col = ds.column(f);
        for (std::size_t t = 0; t < n_train; ++t) {
            const int v = col[train[t]];
            buckets[f * n_train + t] = static_cast<std::int8_t>(v <= 0 ? 0 : v == 1 ? 1 : 2);
        }
    }
    std::vector<std::int8_t> y_train(n_train);
    for (std::size_t t = 0; t < n_train; ++t)
        y_train[t] = static_cast<std::int8_t>(ds.labels()[train[t]]);

    struct PairScore {
        // Balanced accuracy as the exact integer c0*n1 + c1*n0 (shared denominator).
        std::int64_t score;
        std::size_t i, j;
    };
    std::vector<PairScore> scores;
    scores.reserve(F * (F - 1) / 2);

    for (std::size_t i = 0; i + 1 < F; ++i) {
        const std::int8_t* bi = buckets.data() + i * n_train;
        for (std::size_t j = i + 1; j < F; ++j) {
            const std::int8_t* bj = buckets.data() + j * n_train;
            std::int64_t cells[9][2] = {};
            for (std::size_t t = 0; t < n_train; ++t)
                ++cells[bi[t] * 3 + bj[t]][y_train[t]];
            std::int64_t c0 = 0, c1 = 0;
            for (const auto& cell : cells)
                (cell[0] >= cell[1] ? c0 : c1) += cell[cell[0] >= cell[1] ? 0 : 1];
            scores.push_back(PairScore{c0 * n1 + c1 * n0, i, j});
        }
    }

    std::stable_sort(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(n_pairs),
                                                   scores.size());
    std::unordered_set<std::size_t> keep;
    for (std::size_t k = 0; k < take; ++k) {
        keep.insert(scores[k].i);
        keep.insert(scores[k].j);
    }
    std::vector<std::size_t> kept;
    for (std::size_t f = 0; f < ds.n_features(); ++f)
        if (keep.count(f)) kept.push_back(f);
    return ds.with_feature_subset(kept);
}

Dataset op_combine(const Dataset& a, const Dataset& b) {
    if (a.n_rows() != b.n_rows())
        throw PipelineFailure("op_combine: row count mismatch");
    if (a.labels() != b.labels())
        throw PipelineFailure("op_combine: label mismatch");
    if (a.partition() != b.partition())
        throw PipelineFailure("op_combine: partition mismatch");

    Dataset out = a.without_guess();
    std::unordered_set<std::string> have(a.feature_names().begin(), a.feature_names().end());
    for (std::size_t f = 0; f < b.n_features(); ++f)
        if (!have.count(b.feature_name(f)))
            out = out.with_extra_column(b.feature_name(f), b.column(f));
    return out;
}

} // namespace evopipe
