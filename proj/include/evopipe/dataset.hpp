#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace evopipe {

enum class Split : std::uint8_t { Train, Test };

/// Immutable tabular dataset: integer feature columns, binary labels, a
/// train/test partition flag per row, and an optional per-row guess column
/// holding the most recent classifier's predictions. Operators never modify
/// a dataset in place; they build new ones.
class Dataset {
public:
    Dataset(std::vector<std::string> feature_names,
            std::vector<std::vector<int>> columns,
            std::vector<int> labels);

    std::size_t n_rows() const noexcept { return labels_.size(); }
    std::size_t n_features() const noexcept { return columns_.size(); }

    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    const std::string& feature_name(std::size_t f) const { return feature_names_.at(f); }
    const std::vector<int>& column(std::size_t f) const { return *columns_.at(f); }
    const std::vector<int>& labels() const noexcept { return labels_; }
    const std::vector<Split>& partition() const noexcept { return partition_; }

    bool has_guess() const noexcept { return guess_.has_value(); }
    const std::vector<int>& guess() const;

    std::vector<std::size_t> train_rows() const;
    std::vector<std::size_t> test_rows() const;
    bool has_both_partitions() const;

    /// Value-building helpers used by the pipeline operators.
    Dataset with_guess(std::vector<int> guess) const;
    Dataset without_guess() const;
    Dataset with_partition(std::vector<Split> partition) const;
    Dataset with_extra_column(std::string name, std::vector<int> values) const;
    Dataset with_feature_subset(const std::vector<std::size_t>& keep) const;

    bool same_content(const Dataset& other) const;

private:
    // Columns are immutable once built and shared between the dataset values
    // an evaluation produces, so "copying" a dataset never copies cell data.
    using ColumnPtr = std::shared_ptr<const std::vector<int>>;

    std::vector<std::string> feature_names_;
    std::vector<ColumnPtr> columns_; // columns_[f][row]
    std::vector<int> labels_;
    std::vector<Split> partition_;
    std::optional<std::vector<int>> guess_;
};

/// Reads a comma-separated file with a header row; the column literally named
/// `class` becomes the labels, every other column a feature. All cells must be
/// integers. Partition comes back all-Train, guess absent.
Dataset load_csv(const std::string& path);

/// Inverse of load_csv on dataset content (features + labels; partition and
/// guess are volatile and not persisted).
void write_csv(const Dataset& ds, const std::string& path);

/// Marks round(train_fraction * class_count) rows of each class as Train
/// (round half up, clamped so every class keeps at least one row on each
/// side), the rest as Test. Row order is untouched; the assignment is a pure
/// function of (ds, train_fraction, seed).
Dataset stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// (sensitivity + specificity) / 2.
double balanced_accuracy(const std::vector<int>& labels, const std::vector<int>& guesses);

} // namespace evopipe
