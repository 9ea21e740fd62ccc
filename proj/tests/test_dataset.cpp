#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "evopipe/dataset.hpp"
#include "evopipe/errors.hpp"
#include "evopipe/rng.hpp"

#include <cstdio>
#include <fstream>
#include <string>

using namespace evopipe;

namespace {

std::string temp_path(const std::string& name) {
    return "test_dataset_tmp_" + name;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

Dataset toy(int n0, int n1) {
    std::vector<int> labels;
    std::vector<int> col;
    for (int i = 0; i < n0; ++i) {
        labels.push_back(0);
        col.push_back(i % 3);
    }
    for (int i = 0; i < n1; ++i) {
        labels.push_back(1);
        col.push_back((i + 1) % 3);
    }
    return Dataset({"snp1"}, {col}, labels);
}

} // namespace

TEST_CASE("load_csv reads a minimal well-formed file") {
    const auto path = temp_path("minimal.csv");
    write_file(path, "snp1,snp2,class\n0,1,0\n1,2,1\n2,0,0\n1,1,1\n");
    const Dataset ds = load_csv(path);
    CHECK(ds.n_features() == 2);
    CHECK(ds.n_rows() == 4);
    CHECK(ds.feature_name(0) == "snp1");
    CHECK(ds.labels() == std::vector<int>{0, 1, 0, 1});
    CHECK(ds.column(1) == std::vector<int>{1, 2, 0, 1});
    CHECK_FALSE(ds.has_guess());
    CHECK(ds.test_rows().empty()); // partition starts all-Train
    std::remove(path.c_str());
}

TEST_CASE("load_csv accepts class column anywhere") {
    const auto path = temp_path("classmid.csv");
    write_file(path, "a,class,b\n0,1,2\n1,0,1\n");
    const Dataset ds = load_csv(path);
    CHECK(ds.feature_names() == std::vector<std::string>{"a", "b"});
    CHECK(ds.labels() == std::vector<int>{1, 0});
    CHECK(ds.column(1) == std::vector<int>{2, 1});
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects a file without a class header") {
    const auto path = temp_path("noclass.csv");
    write_file(path, "snp1,snp2\n0,1\n1,0\n");
    CHECK_THROWS_AS(load_csv(path), FormatError);
    std::remove(path.c_str());
}

TEST_CASE("load_csv reports cell coordinates for non-integer cells") {
    const auto path = temp_path("badcell.csv");
    write_file(path, "snp1,class\n0,0\nx,1\n");
    try {
        load_csv(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
        CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects single-class files") {
    const auto path = temp_path("oneclass.csv");
    write_file(path, "snp1,class\n0,1\n1,1\n");
    CHECK_THROWS_AS(load_csv(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects ragged rows") {
    const auto path = temp_path("ragged.csv");
    write_file(path, "snp1,snp2,class\n0,1,0\n1,1\n");
    CHECK_THROWS_AS(load_csv(path), FormatError);
    std::remove(path.c_str());
}

TEST_CASE("write_csv then load_csv is identity on content") {
    Rng rng(99);
    std::vector<std::string> names;
    std::vector<std::vector<int>> cols;
    for (int f = 0; f < 7; ++f) {
        names.push_back("snp" + std::to_string(f + 1));
        std::vector<int> col;
        for (int r = 0; r < 23; ++r) col.push_back(rng.uniform_int(0, 2));
        cols.push_back(col);
    }
    std::vector<int> labels;
    for (int r = 0; r < 23; ++r) labels.push_back(rng.uniform_int(0, 1));
    labels[0] = 0;
    labels[1] = 1;
    const Dataset ds(names, cols, labels);

    const auto path = temp_path("roundtrip.csv");
    write_csv(ds, path);
    const Dataset back = load_csv(path);
    CHECK(ds.same_content(back));
    std::remove(path.c_str());
}

TEST_CASE("stratified_split keeps exact per-class counts") {
    const Dataset ds = toy(100, 100);
    const Dataset split = stratified_split(ds, 0.75, 7);
    int train0 = 0, train1 = 0;
    for (std::size_t r = 0; r < split.n_rows(); ++r)
        if (split.partition()[r] == Split::Train)
            (split.labels()[r] == 0 ? train0 : train1)++;
    CHECK(train0 == 75);
    CHECK(train1 == 75);
}

TEST_CASE("stratified_split rounds half up per class") {
    const Dataset ds = toy(101, 50);
    const Dataset split = stratified_split(ds, 0.75, 3);
    int train0 = 0;
    for (std::size_t r = 0; r < split.n_rows(); ++r)
        if (split.partition()[r] == Split::Train && split.labels()[r] == 0) ++train0;
    CHECK(train0 == 76); // round(75.75) = 76
}

TEST_CASE("stratified_split is deterministic and seed-sensitive") {
    const Dataset ds = toy(40, 60);
    const Dataset a = stratified_split(ds, 0.6, 11);
    const Dataset b = stratified_split(ds, 0.6, 11);
    const Dataset c = stratified_split(ds, 0.6, 12);
    CHECK(a.partition() == b.partition());
    CHECK(a.partition() != c.partition());
}

TEST_CASE("stratified_split keeps every class on both sides") {
    const Dataset ds = toy(2, 2);
    const Dataset split = stratified_split(ds, 0.75, 1);
    int train0 = 0, test0 = 0, train1 = 0, test1 = 0;
    for (std::size_t r = 0; r < split.n_rows(); ++r) {
        const bool train = split.partition()[r] == Split::Train;
        if (split.labels()[r] == 0)
            (train ? train0 : test0)++;
        else
            (train ? train1 : test1)++;
    }
    CHECK(train0 == 1);
    CHECK(test0 == 1);
    CHECK(train1 == 1);
    CHECK(test1 == 1);
}

TEST_CASE("stratified_split rejects tiny classes and bad fractions") {
    CHECK_THROWS_AS(stratified_split(toy(1, 5), 0.75, 1), DataError);
    CHECK_THROWS_AS(stratified_split(toy(5, 5), 0.0, 1), ContractError);
    CHECK_THROWS_AS(stratified_split(toy(5, 5), 1.0, 1), ContractError);
}

TEST_CASE("balanced_accuracy basics") {
    CHECK(balanced_accuracy({1, 1, 0, 0}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(balanced_accuracy({1, 1, 0, 0}, {0, 0, 0, 0}) == doctest::Approx(0.5));
    // recall(1) = 1/2, recall(0) = 2/2
    CHECK(balanced_accuracy({1, 1, 0, 0}, {1, 0, 0, 0}) == doctest::Approx(0.75));
}

TEST_CASE("balanced_accuracy contract errors") {
    CHECK_THROWS_AS(balanced_accuracy({1, 0}, {1}), ContractError);
    CHECK_THROWS_AS(balanced_accuracy({1, 1}, {1, 1}), ContractError);
}

TEST_CASE("balanced_accuracy is invariant under permutation and class swap") {
    Rng rng(5);
    std::vector<int> labels, guesses;
    for (int i = 0; i < 50; ++i) {
        labels.push_back(rng.uniform_int(0, 1));
        guesses.push_back(rng.uniform_int(0, 1));
    }
    labels[0] = 0;
    labels[1] = 1;
    const double base = balanced_accuracy(labels, guesses);

    std::vector<std::size_t> perm(labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    shuffle(perm, rng);
    std::vector<int> plabels, pguesses;
    for (std::size_t i : perm) {
        plabels.push_back(labels[i]);
        pguesses.push_back(guesses[i]);
    }
    CHECK(balanced_accuracy(plabels, pguesses) == doctest::Approx(base));

    std::vector<int> slabels, sguesses;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        slabels.push_back(1 - labels[i]);
        sguesses.push_back(1 - guesses[i]);
    }
    CHECK(balanced_accuracy(slabels, sguesses) == doctest::Approx(base));
}

TEST_CASE("dataset rejects malformed construction") {
    CHECK_THROWS_AS(Dataset({"a", "a"}, {{0, 1}, {0, 1}}, {0, 1}), ContractError);
    CHECK_THROWS_AS(Dataset({"a"}, {{0}}, {0, 1}), ContractError);
    CHECK_THROWS_AS(Dataset({"a"}, {{0, 1}}, {0, 2}), ContractError);
    CHECK_THROWS_AS(Dataset({"a"}, {{0, 1}}, {0, 0}), DataError);
}
