#pragma once

#include "evopipe/evolve.hpp"
#include "evopipe/simdata.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evopipe {

enum class GridMode { Gp, RandomSearch, ModelsOnly, RfBaseline };

GridMode parse_grid_mode(const std::string& name);
std::string to_string(GridMode mode);

/// One experiment sweep: heritabilities x sample sizes x replicates, each
/// replicate dataset shared by every requested mode so comparisons are paired.
struct GridConfig {
    std::vector<double> heritabilities{0.1, 0.2, 0.4};
    std::vector<int> sample_sizes{200, 400, 800, 1600};
    int replicates = 30;
    std::vector<GridMode> modes{GridMode::Gp};
    double maf = 0.2;
    double prevalence = 0.3;
    int n_snps = 100;
    CombineRule combine = CombineRule::Sum;
    int population_size = 100;
    int generations = 100;
    double train_fraction = 0.75;
    int cv_folds = 10;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string data_dir; // when set, replicate datasets are cached as CSV here

    void validate() const;
};

struct GridRow {
    double h2 = 0.0;
    int n_samples = 0;
    int replicate = 0;
    GridMode mode = GridMode::Gp;
    std::uint64_t seed = 0;
    std::string status = "ok"; // or the failure description
    Fitness holdout = Fitness::failed();
    std::vector<Fitness> cv_scores;
    int complexity = 0;
    std::string pipeline;
};

/// Runs every (cell, replicate, mode) combination; failures are recorded in
/// the row's status and do not stop the sweep. Rows come back in canonical
/// (h2, n, replicate, mode) order regardless of --jobs scheduling.
std::vector<GridRow> run_grid(const GridConfig& cfg);

void write_grid_csv(const std::vector<GridRow>& rows, const std::string& path);

} // namespace evopipe
