#include "evopipe/dataset.hpp"

#include "evopipe/errors.hpp"
#include "evopipe/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace evopipe {

namespace {

void check_invariants(const std::vector<std::string>& names, std::size_t n_columns,
                      const std::vector<int>& labels) {
    if (names.size() != n_columns)
        throw ContractError("dataset: feature name count does not match column count");
    std::unordered_set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second)
            throw ContractError("dataset: duplicate feature name '" + n + "'");
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y == 0) has0 = true;
        else if (y == 1) has1 = true;
        else throw ContractError("dataset: label outside {0,1}");
    }
    if (labels.empty() || !has0 || !has1)
        throw DataError("dataset: both classes must be present");
}

} // namespace

Dataset::Dataset(std::vector<std::string> feature_names,
                 std::vector<std::vector<int>> columns,
                 std::vector<int> labels)
    : feature_names_(std::move(feature_names)),
      labels_(std::move(labels)),
      partition_(labels_.size(), Split::Train) {
    check_invariants(feature_names_, columns.size(), labels_);
    columns_.reserve(columns.size());
    for (auto& col : columns) {
        if (col.size() != labels_.size())
            throw ContractError("dataset: ragged column length");
        columns_.push_back(std::make_shared<const std::vector<int>>(std::move(col)));
    }
}

const std::vector<int>& Dataset::guess() const {
    if (!guess_) throw ContractError("dataset: guess column absent");
    return *guess_;
}

std::vector<std::size_t> Dataset::train_rows() const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < partition_.size(); ++r)
        if (partition_[r] == Split::Train) rows.push_back(r);
    return rows;
}

std::vector<std::size_t> Dataset::test_rows() const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < partition_.size(); ++r)
        if (partition_[r] == Split::Test) rows.push_back(r);
    return rows;
}

bool Dataset::has_both_partitions() const {
    bool train = false, test = false;
    for (Split s : partition_)
        (s == Split::Train ? train : test) = true;
    return train && test;
}

Dataset Dataset::with_guess(std::vector<int> guess) const {
    if (guess.size() != n_rows())
        throw ContractError("dataset: guess length mismatch");
    for (int g : guess)
        if (g != 0 && g != 1) throw ContractError("dataset: guess value outside {0,1}");
    Dataset out = *this;
    out.guess_ = std::move(guess);
    return out;
}

Dataset Dataset::without_guess() const {
    Dataset out = *this;
    out.guess_.reset();
    return out;
}

Dataset Dataset::with_partition(std::vector<Split> partition) const {
    if (partition.size() != n_rows())
        throw ContractError("dataset: partition length mismatch");
    Dataset out = *this;
    out.partition_ = std::move(partition);
    return out;
}

Dataset Dataset::with_extra_column(std::string name, std::vector<int> values) const {
    if (values.size() != n_rows())
        throw ContractError("dataset: new column length mismatch");
    Dataset out = *this;
    for (const auto& n : out.feature_names_)
        if (n == name) throw ContractError("dataset: duplicate feature name '" + name + "'");
    out.feature_names_.push_back(std::move(name));
    out.columns_.push_back(std::make_shared<const std::vector<int>>(std::move(values)));
    return out;
}

Dataset Dataset::with_feature_subset(const std::vector<std::size_t>& keep) const {
    std::unordered_set<std::size_t> seen;
    for (std::size_t f : keep)
        if (!seen.insert(f).second)
            throw ContractError("dataset: duplicate index in feature subset");
    Dataset out = *this;
    out.feature_names_.clear();
    out.columns_.clear();
    for (std::size_t f : keep) {
        out.feature_names_.push_back(feature_names_.at(f));
        out.columns_.push_back(columns_.at(f));
    }
    return out;
}

bool Dataset::same_content(const Dataset& other) const {
    if (feature_names_ != other.feature_names_ || labels_ != other.labels_) return false;
    for (std::size_t f = 0; f < columns_.size(); ++f)
        if (*columns_[f] != *other.columns_[f]) return false;
    return true;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

int parse_int_cell(const std::string& cell, std::size_t line_no, std::size_t col_no) {
    std::size_t pos = 0;
    int value = 0;
    try {
        value = std::stoi(cell, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != cell.size()) {
        std::ostringstream msg;
        msg << "non-integer cell '" << cell << "' at row " << line_no << ", column " << col_no;
        throw ParseError(msg.str(), line_no * 10000 + col_no);
    }
    return value;
}

} // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_line(line);
    std::size_t class_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "class") {
            class_col = i;
            break;
        }
    if (class_col == header.size())
        throw FormatError("missing 'class' column in '" + path + "'");

    std::vector<std::string> names;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != class_col) names.push_back(header[i]);

    std::vector<std::vector<int>> columns(names.size());
    std::vector<int> labels;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "row " << line_no << " has " << cells.size() << " cells, expected "
                << header.size();
            throw FormatError(msg.str());
        }
        std::size_t f = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const int v = parse_int_cell(cells[i], line_no, i + 1);
            if (i == class_col)
                labels.push_back(v);
            else
                columns[f++].push_back(v);
        }
    }

    for (int y : labels)
        if (y != 0 && y != 1) throw DataError("label outside {0,1} in '" + path + "'");
    const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
    const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
    if (!has0 || !has1)
        throw DataError("fewer than 2 distinct labels in '" + path + "'");

    return Dataset(std::move(names), std::move(columns), std::move(labels));
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    for (std::size_t f = 0; f < ds.n_features(); ++f) out << ds.feature_name(f) << ',';
    out << "class\n";
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        for (std::size_t f = 0; f < ds.n_features(); ++f) out << ds.column(f)[r] << ',';
        out << ds.labels()[r] << '\n';
    }
    if (!out) throw FormatError("write failed for '" + path + "'");
}

Dataset stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ContractError("stratified_split: train_fraction must be in (0,1)");

    std::vector<Split> partition(ds.n_rows(), Split::Test);
    for (int cls : {0, 1}) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < ds.n_rows(); ++r)
            if (ds.labels()[r] == cls) rows.push_back(r);
        if (rows.size() < 2)
            throw DataError("stratified_split: class with fewer than 2 rows");

        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
        shuffle(rows, rng);

        // Round half up, then clamp so each class lands on both sides.
        auto n_train = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(rows.size()) + 0.5));
        n_train = std::min(std::max<std::size_t>(n_train, 1), rows.size() - 1);
        for (std::size_t i = 0; i < n_train; ++i) partition[rows[i]] = Split::Train;
    }
    return ds.with_partition(std::move(partition));
}

double balanced_accuracy(const std::vector<int>& labels, const std::vector<int>& guesses) {
    if (labels.size() != guesses.size())
        throw ContractError("balanced_accuracy: length mismatch");
    std::size_t n0 = 0, n1 = 0, c0 = 0, c1 = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 0) {
            ++n0;
            if (guesses[i] == 0) ++c0;
        } else {
            ++n1;
            if (guesses[i] == 1) ++c1;
        }
    }
    if (n0 == 0 || n1 == 0)
        throw ContractError("balanced_accuracy: labels must contain both classes");
    const double recall0 = static_cast<double>(c0) / static_cast<double>(n0);
    const double recall1 = static_cast<double>(c1) / static_cast<double>(n1);
    return 0.5 * (recall0 + recall1);
}

} // namespace evopipe
