#pragma once

#include "evopipe/dataset.hpp"
#include "evopipe/rng.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace evopipe {

enum class NodeKind { Input, ClassifyDT, ClassifyRF, SelectPairs, Combine };

bool is_classifier(NodeKind kind);

/// Inclusive hyperparameter range for one node kind.
struct HyperRange {
    int lo;
    int hi;

    bool contains(int v) const noexcept { return v >= lo && v <= hi; }
};

inline constexpr HyperRange kDepthRange{1, 10};   // ClassifyDT max_depth
inline constexpr HyperRange kTreesRange{10, 500}; // ClassifyRF n_trees
inline constexpr HyperRange kPairsRange{1, 50};   // SelectPairs n_pairs
inline constexpr std::size_t kMaxTreeSize = 50;   // nodes per pipeline, bloat cap

/// One node of a pipeline genome. Children are dataset-valued subtrees; the
/// integer hyperparameter (depth / trees / n) is an attribute, not a child.
struct PipelineNode {
    NodeKind kind = NodeKind::Input;
    int param = 0;
    std::vector<PipelineNode> children;

    bool operator==(const PipelineNode&) const = default;
};

struct PipelineTree {
    PipelineNode root;

    bool operator==(const PipelineTree&) const = default;
};

/// Which node kinds generation and mutation may draw from.
enum class OperatorSet { Full, ModelsOnly };

std::size_t node_count(const PipelineNode& node);
std::size_t node_count(const PipelineTree& tree);

/// Preorder access; index 0 is the node itself.
PipelineNode& node_at(PipelineNode& root, std::size_t preorder_index);
const PipelineNode& node_at(const PipelineNode& root, std::size_t preorder_index);

/// Empty string when the tree satisfies every genome invariant (classifier
/// root, hyperparameters in range, size cap, correct arities); otherwise a
/// description of the first violation.
std::string validity_error(const PipelineTree& tree);
bool is_valid(const PipelineTree& tree);

/// Operator count: every node except InputLeaf.
int complexity(const PipelineTree& tree);

/// Grow-method generation. The root is always a classifier; deeper nodes are
/// drawn uniformly from the operator set until max_depth forces InputLeaf.
/// Retries internally until the size cap is met, so the result is always valid.
PipelineTree random_pipeline(std::uint64_t seed, int max_depth,
                             OperatorSet set = OperatorSet::Full);

/// Unrestricted-root variant used by the mutation operators.
PipelineNode grow_random_node(Rng& rng, int max_depth, OperatorSet set);

/// Canonical S-expression form:
///   (dt <child> depth=<int>) | (rf <child> trees=<int>)
///   | (pairs <child> n=<int>) | (combine <child> <child>) | input
std::string serialize_pipeline(const PipelineTree& tree);
std::string serialize_node(const PipelineNode& node);

/// Whitespace-insensitive inverse of serialize_pipeline. Rejects, with a byte
/// offset, anything that is not a valid pipeline: syntax errors, unknown
/// operators, out-of-range hyperparameters, a non-classifier root.
PipelineTree parse_pipeline(const std::string& text);

/// Test-set balanced accuracy, or Failed when an operator could not run.
/// Failed compares below every numeric fitness.
class Fitness {
public:
    static Fitness failed() { return Fitness(); }
    static Fitness of(double v) {
        Fitness f;
        f.failed_ = false;
        f.value_ = v;
        return f;
    }

    bool is_failed() const noexcept { return failed_; }
    double value() const;

    friend bool operator==(const Fitness& a, const Fitness& b) {
        return a.failed_ == b.failed_ && (a.failed_ || a.value_ == b.value_);
    }
    friend bool operator<(const Fitness& a, const Fitness& b) {
        if (a.failed_) return !b.failed_;
        if (b.failed_) return false;
        return a.value_ < b.value_;
    }

private:
    Fitness() = default;

    double value_ = 0.0;
    bool failed_ = true;
};

std::string to_string(const Fitness& f);

struct Individual {
    PipelineTree genome;
    Fitness fitness = Fitness::failed();
    int complexity = 0;
};

/// Executes the tree bottom-up on independent copies of ds and returns the
/// balanced accuracy of the root classifier's guesses over the Test rows.
/// Every stochastic operator draws its seed from (eval_seed, the operator's
/// serialized subtree), so a subtree's result does not depend on where in the
/// pipeline it sits.
Fitness evaluate_pipeline(const PipelineTree& tree, const Dataset& ds,
                          std::uint64_t eval_seed);

/// What the report machinery records at each classifier node, in execution
/// order (children before parents, left before right).
struct TraceStep {
    std::size_t step = 0; // 1-based
    NodeKind kind = NodeKind::ClassifyDT;
    int param = 0;
    double test_accuracy = 0.0;
    std::vector<std::pair<std::string, double>> importances; // input-column name -> score
};

struct TraceResult {
    Fitness fitness = Fitness::failed();
    std::vector<TraceStep> steps;
};

TraceResult evaluate_pipeline_traced(const PipelineTree& tree, const Dataset& ds,
                                     std::uint64_t eval_seed);

/// Stratified k-fold scores; each fold re-runs evaluate_pipeline with that
/// fold marked Test and the rest Train.
std::vector<Fitness> crossval_pipeline(const PipelineTree& tree, const Dataset& ds, int k,
                                       std::uint64_t seed);

} // namespace evopipe
