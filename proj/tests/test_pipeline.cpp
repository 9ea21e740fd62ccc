#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "evopipe/errors.hpp"
#include "evopipe/learners.hpp"
#include "evopipe/operators.hpp"
#include "evopipe/pipeline.hpp"

#include <set>

using namespace evopipe;

namespace {

Dataset make_split(int n_features, int n_rows, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> names;
    std::vector<std::vector<int>> cols;
    for (int f = 0; f < n_features; ++f) {
        names.push_back("snp" + std::to_string(f + 1));
        std::vector<int> col(static_cast<std::size_t>(n_rows));
        for (auto& v : col) v = rng.uniform_int(0, 2);
        cols.push_back(std::move(col));
    }
    std::vector<int> labels(static_cast<std::size_t>(n_rows));
    for (auto& y : labels) y = rng.uniform_int(0, 1);
    labels[0] = 0;
    labels[1] = 1;
    return stratified_split(Dataset(names, cols, labels), 0.75, seed);
}

Dataset separable_split() {
    // snp1 alone separates the classes
    std::vector<int> predictive, noise, labels;
    for (int r = 0; r < 24; ++r) {
        const int y = r % 2;
        predictive.push_back(y == 1 ? 2 : 0);
        noise.push_back((r * 7) % 3);
        labels.push_back(y);
    }
    return stratified_split(Dataset({"snp1", "snp2"}, {predictive, noise}, labels), 0.75, 5);
}

} // namespace

TEST_CASE("complexity counts operator nodes only") {
    CHECK(complexity(parse_pipeline("(dt input depth=5)")) == 1);
    CHECK(complexity(parse_pipeline(
              "(rf (combine (dt input depth=3) (pairs input n=2)) trees=20)")) == 4);
}

TEST_CASE("serialization fixed points") {
    const std::string text = "(dt input depth=5)";
    const PipelineTree tree = parse_pipeline(text);
    CHECK(serialize_pipeline(tree) == text);
    CHECK(tree.root.kind == NodeKind::ClassifyDT);
    CHECK(tree.root.param == 5);
    REQUIRE(tree.root.children.size() == 1);
    CHECK(tree.root.children[0].kind == NodeKind::Input);
}

TEST_CASE("parse accepts arbitrary whitespace and canonicalizes") {
    const PipelineTree tree =
        parse_pipeline("  (rf\n   (combine input\t input)   trees=42 ) ");
    CHECK(serialize_pipeline(tree) == "(rf (combine input input) trees=42)");
}

TEST_CASE("parse rejects invalid pipelines with positions") {
    // root must be a classifier
    CHECK_THROWS_AS(parse_pipeline("(pairs input n=3)"), ParseError);
    // unknown operator
    CHECK_THROWS_AS(parse_pipeline("(boost input depth=3)"), ParseError);
    // out-of-range hyperparameter
    CHECK_THROWS_AS(parse_pipeline("(dt input depth=11)"), ParseError);
    CHECK_THROWS_AS(parse_pipeline("(rf input trees=9)"), ParseError);
    // malformed structure
    CHECK_THROWS_AS(parse_pipeline("(dt input depth=3"), ParseError);
    CHECK_THROWS_AS(parse_pipeline("(dt input)"), ParseError);
    CHECK_THROWS_AS(parse_pipeline("(dt input depth=3) junk"), ParseError);
    CHECK_THROWS_AS(parse_pipeline(""), ParseError);
    CHECK_THROWS_AS(parse_pipeline("(combine input input)"), ParseError);

    try {
        parse_pipeline("(dt input depth=zap)");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 10);
        CHECK(std::string(e.what()).find("byte 10") != std::string::npos);
    }
}

TEST_CASE("1000 random pipelines round-trip through text") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const PipelineTree tree = random_pipeline(seed, 4);
        const PipelineTree back = parse_pipeline(serialize_pipeline(tree));
        CHECK(back == tree);
    }
}

TEST_CASE("random_pipeline always satisfies the genome invariants") {
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const PipelineTree tree = random_pipeline(seed, 4);
        CAPTURE(seed);
        REQUIRE(validity_error(tree).empty());
    }
}

TEST_CASE("random_pipeline is deterministic and honors max_depth 1") {
    CHECK(random_pipeline(42, 4) == random_pipeline(42, 4));
    const PipelineTree tiny = random_pipeline(7, 1);
    CHECK(is_classifier(tiny.root.kind));
    REQUIRE(tiny.root.children.size() == 1);
    CHECK(tiny.root.children[0].kind == NodeKind::Input);
}

TEST_CASE("models-only generation draws no selector or combine nodes") {
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        const PipelineTree tree = random_pipeline(seed, 4, OperatorSet::ModelsOnly);
        for (std::size_t i = 0; i < node_count(tree); ++i) {
            const NodeKind kind = node_at(tree.root, i).kind;
            CHECK(kind != NodeKind::SelectPairs);
            CHECK(kind != NodeKind::Combine);
        }
    }
}

TEST_CASE("evaluate_pipeline hits 1.0 on separable data") {
    const Dataset ds = separable_split();
    const Fitness fitness = evaluate_pipeline(parse_pipeline("(dt input depth=3)"), ds, 1);
    REQUIRE_FALSE(fitness.is_failed());
    CHECK(fitness.value() == doctest::Approx(1.0));
}

TEST_CASE("evaluate_pipeline equals a hand-executed operator trace") {
    const Dataset ds = make_split(4, 12, 31);
    const PipelineTree tree =
        parse_pipeline("(dt (combine (rf (pairs input n=2) trees=12) input) depth=4)");
    const std::uint64_t eval_seed = 99;

    // Manual bottom-up replay using the operator layer directly, deriving each
    // classifier seed from its serialized subtree exactly as documented.
    SyntheticFeatureCounter counter;
    const Dataset selected = op_select_pairs(ds, 2);
    const std::uint64_t rf_seed =
        derive_seed(eval_seed, hash_bytes("(rf (pairs input n=2) trees=12)"));
    const Dataset rf_out = op_classify_rf(selected, 12, counter, rf_seed);
    const Dataset combined = op_combine(rf_out, ds);
    const std::uint64_t dt_seed = derive_seed(
        eval_seed,
        hash_bytes("(dt (combine (rf (pairs input n=2) trees=12) input) depth=4)"));
    const Dataset final_out = op_classify_dt(combined, 4, counter, dt_seed);

    std::vector<int> y, g;
    for (std::size_t r : final_out.test_rows()) {
        y.push_back(final_out.labels()[r]);
        g.push_back(final_out.guess()[r]);
    }
    const double expected = balanced_accuracy(y, g);

    const Fitness fitness = evaluate_pipeline(tree, ds, eval_seed);
    REQUIRE_FALSE(fitness.is_failed());
    CHECK(fitness.value() == doctest::Approx(expected));
}

TEST_CASE("evaluate_pipeline is deterministic and does not mutate the input") {
    const Dataset ds = make_split(5, 40, 33);
    const PipelineTree tree = parse_pipeline("(rf (dt input depth=2) trees=15)");
    const Fitness a = evaluate_pipeline(tree, ds, 7);
    const Fitness b = evaluate_pipeline(tree, ds, 7);
    CHECK(a == b);
    CHECK_FALSE(ds.has_guess());
    CHECK(ds.n_features() == 5);
}

TEST_CASE("operator failures surface as Failed fitness, not exceptions") {
    // the selector sees a single feature and fails; the pipeline absorbs it
    std::vector<int> only, labels;
    for (int r = 0; r < 12; ++r) {
        only.push_back(r % 3);
        labels.push_back(r % 2);
    }
    const Dataset ds = stratified_split(Dataset({"snp1"}, {only}, labels), 0.75, 2);
    const Fitness fitness =
        evaluate_pipeline(parse_pipeline("(dt (pairs input n=3) depth=3)"), ds, 1);
    CHECK(fitness.is_failed());
}

TEST_CASE("evaluate_pipeline rejects unsplit data and invalid trees") {
    Rng rng(3);
    std::vector<int> col(10), labels(10);
    for (auto& v : col) v = rng.uniform_int(0, 2);
    for (auto& y : labels) y = rng.uniform_int(0, 1);
    labels[0] = 0;
    labels[1] = 1;
    const Dataset unsplit({"snp1"}, {col}, labels);
    CHECK_THROWS_AS(evaluate_pipeline(parse_pipeline("(dt input depth=3)"), unsplit, 1),
                    ContractError);

    PipelineTree bad;
    bad.root.kind = NodeKind::SelectPairs;
    bad.root.param = 1;
    bad.root.children.push_back(PipelineNode{});
    const Dataset ds = make_split(3, 12, 3);
    CHECK_THROWS_AS(evaluate_pipeline(bad, ds, 1), ContractError);
}

TEST_CASE("Failed fitness sorts below every numeric fitness") {
    CHECK(Fitness::failed() < Fitness::of(0.0));
    CHECK(Fitness::failed() < Fitness::of(1.0));
    CHECK_FALSE(Fitness::of(0.0) < Fitness::failed());
    CHECK_FALSE(Fitness::failed() < Fitness::failed());
    CHECK(Fitness::of(0.3) < Fitness::of(0.4));
    CHECK(Fitness::failed() == Fitness::failed());
    CHECK_THROWS_AS(Fitness::failed().value(), ContractError);
}

TEST_CASE("crossval_pipeline returns k disjoint covering folds") {
    const Dataset ds = make_split(3, 24, 41).without_guess();
    const auto scores = crossval_pipeline(parse_pipeline("(dt input depth=3)"), ds, 4, 9);
    CHECK(scores.size() == 4);

    // reconstruct the fold partition exactly as documented: per class,
    // seeded shuffle dealt round-robin
    std::vector<int> fold_of(ds.n_rows(), -1);
    for (int cls : {0, 1}) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < ds.n_rows(); ++r)
            if (ds.labels()[r] == cls) rows.push_back(r);
        Rng rng(derive_seed(9, 0xF01D, static_cast<std::uint64_t>(cls)));
        shuffle(rows, rng);
        for (std::size_t i = 0; i < rows.size(); ++i)
            fold_of[rows[i]] = static_cast<int>(i % 4);
    }
    std::set<std::size_t> seen;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        CHECK(fold_of[r] >= 0);
        CHECK(fold_of[r] < 4);
        seen.insert(r);
    }
    CHECK(seen.size() == ds.n_rows());
}

TEST_CASE("crossval of a constant-prediction pipeline scores 0.5 per fold") {
    // single constant feature forces single-leaf trees: every prediction is
    // the training majority, so each fold's balanced accuracy is 0.5
    std::vector<int> constant(20, 1), labels;
    for (int r = 0; r < 20; ++r) labels.push_back(r < 8 ? 1 : 0);
    const Dataset ds({"snp1"}, {constant}, labels);
    const auto scores = crossval_pipeline(parse_pipeline("(dt input depth=3)"), ds, 4, 3);
    for (const auto& s : scores) {
        REQUIRE_FALSE(s.is_failed());
        CHECK(s.value() == doctest::Approx(0.5));
    }
}

TEST_CASE("crossval rejects classes smaller than k") {
    const Dataset ds = make_split(3, 12, 43); // ~6 per class
    CHECK_THROWS_AS(crossval_pipeline(parse_pipeline("(dt input depth=3)"), ds, 8, 1),
                    DataError);
    CHECK_THROWS_AS(crossval_pipeline(parse_pipeline("(dt input depth=3)"), ds, 1, 1),
                    ContractError);
}

TEST_CASE("node_at walks preorder") {
    const PipelineTree tree =
        parse_pipeline("(rf (combine (dt input depth=3) input) trees=20)");
    CHECK(node_count(tree) == 5);
    CHECK(node_at(tree.root, 0).kind == NodeKind::ClassifyRF);
    CHECK(node_at(tree.root, 1).kind == NodeKind::Combine);
    CHECK(node_at(tree.root, 2).kind == NodeKind::ClassifyDT);
    CHECK(node_at(tree.root, 3).kind == NodeKind::Input);
    CHECK(node_at(tree.root, 4).kind == NodeKind::Input);
    CHECK_THROWS_AS(node_at(tree.root, 5), ContractError);
}

TEST_CASE("guess consulted for fitness comes from the root classifier") {
    const Dataset ds = separable_split();
    // the traced run exposes each classifier's guess accuracy in execution
    // order; the fitness must equal the last (root) step's accuracy
    const PipelineTree tree = parse_pipeline("(rf (dt input depth=3) trees=10)");
    const TraceResult trace = evaluate_pipeline_traced(tree, ds, 11);
    REQUIRE_FALSE(trace.fitness.is_failed());
    REQUIRE(trace.steps.size() == 2);
    CHECK(trace.steps.back().kind == NodeKind::ClassifyRF);
    CHECK(trace.steps.back().test_accuracy == doctest::Approx(trace.fitness.value()));
}
