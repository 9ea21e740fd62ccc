#include "evopipe/pipeline.hpp"

#include "evopipe/errors.hpp"
#include "evopipe/operators.hpp"

#include <cctype>
#include <sstream>

namespace evopipe {

bool is_classifier(NodeKind kind) {
    return kind == NodeKind::ClassifyDT || kind == NodeKind::ClassifyRF;
}

namespace {

std::size_t expected_arity(NodeKind kind) {
    switch (kind) {
    case NodeKind::Input: return 0;
    case NodeKind::Combine: return 2;
    default: return 1;
    }
}

const HyperRange* param_range(NodeKind kind) {
    switch (kind) {
    case NodeKind::ClassifyDT: return &kDepthRange;
    case NodeKind::ClassifyRF: return &kTreesRange;
    case NodeKind::SelectPairs: return &kPairsRange;
    default: return nullptr;
    }
}

const char* kind_name(NodeKind kind) {
    switch (kind) {
    case NodeKind::Input: return "input";
    case NodeKind::ClassifyDT: return "dt";
    case NodeKind::ClassifyRF: return "rf";
    case NodeKind::SelectPairs: return "pairs";
    case NodeKind::Combine: return "combine";
    }
    return "?";
}

std::string node_error(const PipelineNode& node) {
    if (node.children.size() != expected_arity(node.kind)) {
        std::ostringstream msg;
        msg << kind_name(node.kind) << " node has " << node.children.size()
            << " children, expected " << expected_arity(node.kind);
        return msg.str();
    }
    if (const HyperRange* range = param_range(node.kind); range && !range->contains(node.param)) {
        std::ostringstream msg;
        msg << kind_name(node.kind) << " hyperparameter " << node.param << " outside ["
            << range->lo << "," << range->hi << "]";
        return msg.str();
    }
    for (const auto& child : node.children)
        if (auto err = node_error(child); !err.empty()) return err;
    return {};
}

} // namespace

std::size_t node_count(const PipelineNode& node) {
    std::size_t n = 1;
    for (const auto& c : node.children) n += node_count(c);
    return n;
}

std::size_t node_count(const PipelineTree& tree) { return node_count(tree.root); }

PipelineNode& node_at(PipelineNode& root, std::size_t preorder_index) {
    if (preorder_index == 0) return root;
    std::size_t skipped = 1;
    for (auto& child : root.children) {
        const std::size_t sz = node_count(child);
        if (preorder_index < skipped + sz) return node_at(child, preorder_index - skipped);
        skipped += sz;
    }
    throw ContractError("node_at: preorder index out of range");
}

const PipelineNode& node_at(const PipelineNode& root, std::size_t preorder_index) {
    return node_at(const_cast<PipelineNode&>(root), preorder_index);
}

std::string validity_error(const PipelineTree& tree) {
    if (!is_classifier(tree.root.kind)) return "root must be a classifier";
    if (node_count(tree) > kMaxTreeSize) {
        std::ostringstream msg;
        msg << "tree has " << node_count(tree) << " nodes, cap is " << kMaxTreeSize;
        return msg.str();
    }
    return node_error(tree.root);
}

bool is_valid(const PipelineTree& tree) { return validity_error(tree).empty(); }

int complexity(const PipelineTree& tree) {
    int ops = 0;
    const auto count = [&](const PipelineNode& n, const auto& self) -> void {
        if (n.kind != NodeKind::Input) ++ops;
        for (const auto& c : n.children) self(c, self);
    };
    count(tree.root, count);
    return ops;
}

// ---------------------------------------------------------------------------
// Random generation

namespace {

int sample_param(NodeKind kind, Rng& rng) {
    const HyperRange* range = param_range(kind);
    return range ? rng.uniform_int(range->lo, range->hi) : 0;
}

} // namespace

PipelineNode grow_random_node(Rng& rng, int max_depth, OperatorSet set) {
    static constexpr NodeKind kFull[] = {NodeKind::Input, NodeKind::ClassifyDT,
                                         NodeKind::ClassifyRF, NodeKind::SelectPairs,
                                         NodeKind::Combine};
    static constexpr NodeKind kModelsOnly[] = {NodeKind::Input, NodeKind::ClassifyDT,
                                               NodeKind::ClassifyRF};

    PipelineNode node;
    if (max_depth <= 0) return node; // InputLeaf

    if (set == OperatorSet::Full)
        node.kind = kFull[rng.uniform_index(std::size(kFull))];
    else
        node.kind = kModelsOnly[rng.uniform_index(std::size(kModelsOnly))];
    node.param = sample_param(node.kind, rng);
    for (std::size_t i = 0; i < expected_arity(node.kind); ++i)
        node.children.push_back(grow_random_node(rng, max_depth - 1, set));
    return node;
}

PipelineTree random_pipeline(std::uint64_t seed, int max_depth, OperatorSet set) {
    if (max_depth < 1) throw ContractError("random_pipeline: max_depth must be >= 1");
    Rng rng(derive_seed(seed, 0x9e6e));
    for (;;) {
        PipelineTree tree;
        tree.root.kind = rng.bernoulli(0.5) ? NodeKind::ClassifyDT : NodeKind::ClassifyRF;
        tree.root.param = sample_param(tree.root.kind, rng);
        tree.root.children.push_back(grow_random_node(rng, max_depth - 1, set));
        if (node_count(tree) <= kMaxTreeSize) return tree;
    }
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void serialize_into(const PipelineNode& node, std::ostringstream& out) {
    switch (node.kind) {
    case NodeKind::Input:
        out << "input";
        return;
    case NodeKind::ClassifyDT:
        out << "(dt ";
        serialize_into(node.children[0], out);
        out << " depth=" << node.param << ')';
        return;
    case NodeKind::ClassifyRF:
        out << "(rf ";
        serialize_into(node.children[0], out);
        out << " trees=" << node.param << ')';
        return;
    case NodeKind::SelectPairs:
        out << "(pairs ";
        serialize_into(node.children[0], out);
        out << " n=" << node.param << ')';
        return;
    case NodeKind::Combine:
        out << "(combine ";
        serialize_into(node.children[0], out);
        out << ' ';
        serialize_into(node.children[1], out);
        out << ')';
        return;
    }
}

} // namespace

std::string serialize_node(const PipelineNode& node) {
    std::ostringstream out;
    serialize_into(node, out);
    return out.str();
}

std::string serialize_pipeline(const PipelineTree& tree) { return serialize_node(tree.root); }

namespace {

struct Parser {
    const std::string& text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        std::ostringstream full;
        full << msg << " at byte " << at;
        throw ParseError(full.str(), at);
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }

    std::string next_symbol(std::size_t& at) {
        skip_ws();
        at = pos;
        std::size_t end = pos;
        while (end < text.size() && text[end] != '(' && text[end] != ')' &&
               !std::isspace(static_cast<unsigned char>(text[end])))
            ++end;
        if (end == pos) fail("expected a symbol", pos);
        std::string sym = text.substr(pos, end - pos);
        pos = end;
        return sym;
    }

    void expect(char ch) {
        skip_ws();
        if (pos >= text.size() || text[pos] != ch)
            fail(std::string("expected '") + ch + "'", pos);
        ++pos;
    }

    int parse_param(const std::string& key, const HyperRange& range) {
        std::size_t at = 0;
        const std::string sym = next_symbol(at);
        const std::string prefix = key + "=";
        if (sym.rfind(prefix, 0) != 0) fail("expected " + prefix + "<int>", at);
        const std::string digits = sym.substr(prefix.size());
        std::size_t consumed = 0;
        int value = 0;
        try {
            value = std::stoi(digits, &consumed);
        } catch (const std::exception&) {
            consumed = 0;
        }
        if (consumed == 0 || consumed != digits.size())
            fail("malformed integer in " + sym, at);
        if (!range.contains(value)) {
            std::ostringstream msg;
            msg << key << "=" << value << " outside [" << range.lo << "," << range.hi << "]";
            fail(msg.str(), at);
        }
        return value;
    }

    PipelineNode parse_expr() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input", pos);
        if (text[pos] != '(') {
            std::size_t at = 0;
            const std::string sym = next_symbol(at);
            if (sym != "input") fail("unknown operator '" + sym + "'", at);
            return PipelineNode{};
        }
        const std::size_t open_at = pos;
        ++pos;
        std::size_t head_at = 0;
        const std::string head = next_symbol(head_at);

        PipelineNode node;
        if (head == "dt") {
            node.kind = NodeKind::ClassifyDT;
            node.children.push_back(parse_expr());
            node.param = parse_param("depth", kDepthRange);
        } else if (head == "rf") {
            node.kind = NodeKind::ClassifyRF;
            node.children.push_back(parse_expr());
            node.param = parse_param("trees", kTreesRange);
        } else if (head == "pairs") {
            node.kind = NodeKind::SelectPairs;
            node.children.push_back(parse_expr());
            node.param = parse_param("n", kPairsRange);
        } else if (head == "combine") {
            node.kind = NodeKind::Combine;
            node.children.push_back(parse_expr());
            node.children.push_back(parse_expr());
        } else if (head == "input") {
            fail("'input' takes no parentheses", open_at);
        } else {
            fail("unknown operator '" + head + "'", head_at);
        }
        expect(')');
        return node;
    }
};

} // namespace

PipelineTree parse_pipeline(const std::string& text) {
    Parser parser{text};
    PipelineTree tree;
    parser.skip_ws();
    const std::size_t root_at = parser.pos;
    tree.root = parser.parse_expr();
    if (!parser.at_end()) parser.fail("trailing input after pipeline", parser.pos);
    if (!is_classifier(tree.root.kind))
        parser.fail("root must be a classifier", root_at);
    if (const auto err = validity_error(tree); !err.empty()) parser.fail(err, root_at);
    return tree;
}

// ---------------------------------------------------------------------------
// Evaluation

double Fitness::value() const {
    if (failed_) throw ContractError("Fitness: no numeric value on a failed individual");
    return value_;
}

std::string to_string(const Fitness& f) {
    if (f.is_failed()) return "failed";
    std::ostringstream out;
    out.precision(6);
    out << f.value();
    return out.str();
}

namespace {

double test_balanced_accuracy(const Dataset& ds) {
    std::vector<int> y, g;
    for (std::size_t r : ds.test_rows()) {
        y.push_back(ds.labels()[r]);
        g.push_back(ds.guess()[r]);
    }
    return balanced_accuracy(y, g);
}

struct Executor {
    explicit Executor(std::uint64_t seed) : eval_seed(seed) {}

    std::uint64_t eval_seed;
    SyntheticFeatureCounter counter;
    std::vector<TraceStep>* trace = nullptr;

    Dataset exec(const PipelineNode& node, const Dataset& input) {
        switch (node.kind) {
        case NodeKind::Input:
            return input;
        case NodeKind::SelectPairs:
            return op_select_pairs(exec(node.children[0], input), node.param);
        case NodeKind::Combine: {
            Dataset left = exec(node.children[0], input);
            Dataset right = exec(node.children[1], input);
            return op_combine(left, right);
        }
        case NodeKind::ClassifyDT:
        case NodeKind::ClassifyRF: {
            Dataset child = exec(node.children[0], input);
            // The operator seed depends only on the subtree itself, so a
            // subtree evaluated standalone reproduces its in-pipeline result.
            const std::uint64_t seed =
                derive_seed(eval_seed, hash_bytes(serialize_node(node)));
            if (!trace) {
                return node.kind == NodeKind::ClassifyDT
                           ? op_classify_dt(child, node.param, counter, seed)
                           : op_classify_rf(child, node.param, counter, seed);
            }
            ClassifyResult result =
                node.kind == NodeKind::ClassifyDT
                    ? op_classify_dt_detailed(child, node.param, counter, seed)
                    : op_classify_rf_detailed(child, node.param, counter, seed);
            TraceStep step;
            step.step = trace->size() + 1;
            step.kind = node.kind;
            step.param = node.param;
            step.test_accuracy = test_balanced_accuracy(result.output);
            for (std::size_t f = 0; f < result.importances.size(); ++f)
                step.importances.emplace_back(child.feature_name(f), result.importances[f]);
            trace->push_back(std::move(step));
            return std::move(result.output);
        }
        }
        throw ContractError("exec: unreachable node kind");
    }
};

void check_evaluable(const PipelineTree& tree, const Dataset& ds) {
    if (const auto err = validity_error(tree); !err.empty())
        throw ContractError("evaluate_pipeline: invalid tree: " + err);
    if (!ds.has_both_partitions())
        throw ContractError("evaluate_pipeline: dataset must have Train and Test rows");
}

} // namespace

Fitness evaluate_pipeline(const PipelineTree& tree, const Dataset& ds,
                          std::uint64_t eval_seed) {
    check_evaluable(tree, ds);
    try {
        Executor executor(eval_seed);
        const Dataset out = executor.exec(tree.root, ds);
        return Fitness::of(test_balanced_accuracy(out));
    } catch (const PipelineFailure&) {
        return Fitness::failed();
    }
}

TraceResult evaluate_pipeline_traced(const PipelineTree& tree, const Dataset& ds,
                                     std::uint64_t eval_seed) {
    check_evaluable(tree, ds);
    TraceResult result;
    Executor executor(eval_seed);
    executor.trace = &result.steps;
    try {
        const Dataset out = executor.exec(tree.root, ds);
        result.fitness = Fitness::of(test_balanced_accuracy(out));
    } catch (const PipelineFailure&) {
        result.fitness = Fitness::failed();
    }
    return result;
}

std::vector<Fitness> crossval_pipeline(const PipelineTree& tree, const Dataset& ds, int k,
                                       std::uint64_t seed) {
    if (k < 2) throw ContractError("crossval_pipeline: k must be >= 2");

    // Stratified fold assignment: shuffle each class, deal round-robin.
    std::vector<int> fold_of(ds.n_rows(), -1);
    for (int cls : {0, 1}) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < ds.n_rows(); ++r)
            if (ds.labels()[r] == cls) rows.push_back(r);
        if (rows.size() < static_cast<std::size_t>(k)) {
            std::ostringstream msg;
            msg << "crossval_pipeline: class " << cls << " has " << rows.size()
                << " rows, fewer than k=" << k;
            throw DataError(msg.str());
        }
        Rng rng(derive_seed(seed, 0xF01D, static_cast<std::uint64_t>(cls)));
        shuffle(rows, rng);
        for (std::size_t i = 0; i < rows.size(); ++i)
            fold_of[rows[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }

    std::vector<Fitness> scores;
    scores.reserve(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        std::vector<Split> partition(ds.n_rows());
        for (std::size_t r = 0; r < ds.n_rows(); ++r)
            partition[r] = fold_of[r] == f ? Split::Test : Split::Train;
        const Dataset fold_ds = ds.with_partition(std::move(partition));
        scores.push_back(
            evaluate_pipeline(tree, fold_ds, derive_seed(seed, 0xCF0, static_cast<std::uint64_t>(f))));
    }
    return scores;
}

} // namespace evopipe
