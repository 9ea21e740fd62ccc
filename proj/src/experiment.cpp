#include "evopipe/experiment.hpp"

#include "evopipe/errors.hpp"
#include "evopipe/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace evopipe {

GridMode parse_grid_mode(const std::string& name) {
    if (name == "gp") return GridMode::Gp;
    if (name == "random" || name == "random-search") return GridMode::RandomSearch;
    if (name == "models-only") return GridMode::ModelsOnly;
    if (name == "rf-baseline") return GridMode::RfBaseline;
    throw ContractError("unknown grid mode '" + name + "'");
}

std::string to_string(GridMode mode) {
    switch (mode) {
    case GridMode::Gp: return "gp";
    case GridMode::RandomSearch: return "random";
    case GridMode::ModelsOnly: return "models-only";
    case GridMode::RfBaseline: return "rf-baseline";
    }
    return "?";
}

void GridConfig::validate() const {
    if (heritabilities.empty() || sample_sizes.empty() || modes.empty())
        throw ContractError("grid: heritabilities, sizes and modes must be non-empty");
    if (replicates < 1) throw ContractError("grid: replicates must be >= 1");
    for (double h2 : heritabilities)
        if (!(h2 > 0.0 && h2 < 1.0)) throw ContractError("grid: h2 must lie in (0,1)");
    for (int n : sample_sizes)
        if (n < 2 || n % 2 != 0) throw ContractError("grid: sample sizes must be even");
    if (jobs < 1) throw ContractError("grid: jobs must be >= 1");
}

namespace {

struct Task {
    double h2;
    int n_samples;
    int replicate;
};

std::uint64_t dataset_seed(const GridConfig& cfg, const Task& task) {
    return derive_seed(cfg.seed, 0xD5EE, static_cast<std::uint64_t>(std::llround(task.h2 * 1e6)),
                       derive_seed(static_cast<std::uint64_t>(task.n_samples),
                                   static_cast<std::uint64_t>(task.replicate)));
}

std::uint64_t mode_seed(std::uint64_t ds_seed, GridMode mode) {
    return derive_seed(ds_seed, 0x33, static_cast<std::uint64_t>(mode));
}

std::string cache_name(const GridConfig& cfg, const Task& task) {
    std::ostringstream name;
    name << "sim_h2" << format_double(task.h2) << "_n" << task.n_samples << "_r"
         << task.replicate;
    return (std::filesystem::path(cfg.data_dir) / name.str()).string();
}

Dataset obtain_dataset(const GridConfig& cfg, const Task& task) {
    const std::uint64_t seed = dataset_seed(cfg, task);
    if (!cfg.data_dir.empty()) {
        const std::string base = cache_name(cfg, task);
        if (std::filesystem::exists(base + ".csv")) return load_csv(base + ".csv");
        SimOptions options;
        options.n_samples = task.n_samples;
        options.n_snps = cfg.n_snps;
        options.combine = cfg.combine;
        const SimResult sim =
            simulate_epistatic_dataset(task.h2, cfg.maf, cfg.prevalence, options, seed);
        write_csv(sim.dataset, base + ".csv");
        write_manifest(sim.manifest, base + ".manifest");
        return sim.dataset;
    }
    SimOptions options;
    options.n_samples = task.n_samples;
    options.n_snps = cfg.n_snps;
    options.combine = cfg.combine;
    return simulate_epistatic_dataset(task.h2, cfg.maf, cfg.prevalence, options, seed).dataset;
}

GridRow run_mode(const GridConfig& cfg, const Task& task, GridMode mode, const Dataset& ds,
                 std::uint64_t run_seed) {
    GridRow row;
    row.h2 = task.h2;
    row.n_samples = task.n_samples;
    row.replicate = task.replicate;
    row.mode = mode;
    row.seed = run_seed;

    const Dataset split = stratified_split(ds, cfg.train_fraction, derive_seed(run_seed, 1));
    PipelineTree best;
    if (mode == GridMode::RfBaseline) {
        best = parse_pipeline("(rf input trees=100)");
        row.holdout = evaluate_pipeline(best, split, run_seed);
    } else {
        GpConfig gp;
        gp.population_size = cfg.population_size;
        gp.generations = cfg.generations;
        gp.seed = run_seed;
        gp.mode = mode == GridMode::ModelsOnly ? SearchMode::ModelsOnly
                : mode == GridMode::RandomSearch ? SearchMode::RandomSearch
                                                 : SearchMode::Gp;
        const GpResult result = mode == GridMode::RandomSearch
                                    ? run_random_search(gp, split)
                                    : run_gp(gp, split);
        best = result.best_ever.genome;
        row.holdout = result.best_ever.fitness;
    }
    row.complexity = complexity(best);
    row.pipeline = serialize_pipeline(best);
    row.cv_scores = crossval_pipeline(best, ds, cfg.cv_folds, derive_seed(run_seed, 2));
    return row;
}

} // namespace

std::vector<GridRow> run_grid(const GridConfig& cfg) {
    cfg.validate();
    if (!cfg.data_dir.empty()) std::filesystem::create_directories(cfg.data_dir);

    std::vector<Task> tasks;
    for (double h2 : cfg.heritabilities)
        for (int n : cfg.sample_sizes)
            for (int r = 0; r < cfg.replicates; ++r) tasks.push_back(Task{h2, n, r});

    std::vector<std::vector<GridRow>> per_task(tasks.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));

    const auto work = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            const std::uint64_t ds_seed = dataset_seed(cfg, task);

            std::vector<GridRow>& rows = per_task[t];
            try {
                const Dataset ds = obtain_dataset(cfg, task);
                for (GridMode mode : cfg.modes) {
                    const std::uint64_t run_seed = mode_seed(ds_seed, mode);
                    try {
                        rows.push_back(run_mode(cfg, task, mode, ds, run_seed));
                    } catch (const std::exception& e) {
                        GridRow row;
                        row.h2 = task.h2;
                        row.n_samples = task.n_samples;
                        row.replicate = task.replicate;
                        row.mode = mode;
                        row.seed = run_seed;
                        row.status = std::string("error: ") + e.what();
                        rows.push_back(std::move(row));
                    }
                }
            } catch (const std::exception& e) {
                for (GridMode mode : cfg.modes) {
                    GridRow row;
                    row.h2 = task.h2;
                    row.n_samples = task.n_samples;
                    row.replicate = task.replicate;
                    row.mode = mode;
                    row.seed = mode_seed(ds_seed, mode);
                    row.status = std::string("error: ") + e.what();
                    rows.push_back(std::move(row));
                }
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    std::vector<GridRow> rows;
    for (auto& chunk : per_task)
        for (auto& row : chunk) rows.push_back(std::move(row));
    std::sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
        if (a.h2 != b.h2) return a.h2 < b.h2;
        if (a.n_samples != b.n_samples) return a.n_samples < b.n_samples;
        if (a.replicate != b.replicate) return a.replicate < b.replicate;
        return static_cast<int>(a.mode) < static_cast<int>(b.mode);
    });
    return rows;
}

void write_grid_csv(const std::vector<GridRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << "h2,n_samples,replicate,mode,seed,status,holdout_accuracy,cv_mean,cv_scores,"
           "complexity,pipeline\n";
    for (const auto& row : rows) {
        out << format_double(row.h2) << ',' << row.n_samples << ',' << row.replicate << ','
            << to_string(row.mode) << ',' << row.seed << ',' << row.status << ','
            << to_string(row.holdout) << ',';
        double sum = 0.0;
        std::size_t n = 0;
        std::ostringstream folds;
        for (std::size_t f = 0; f < row.cv_scores.size(); ++f) {
            folds << (f == 0 ? "" : ";") << to_string(row.cv_scores[f]);
            if (!row.cv_scores[f].is_failed()) {
                sum += row.cv_scores[f].value();
                ++n;
            }
        }
        out << (n > 0 ? format_double(sum / static_cast<double>(n)) : "failed") << ','
            << folds.str() << ',' << row.complexity << ',' << row.pipeline << '\n';
    }
}

} // namespace evopipe
