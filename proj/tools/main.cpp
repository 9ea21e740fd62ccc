#include "evopipe/dataset.hpp"
#include "evopipe/errors.hpp"
#include "evopipe/evolve.hpp"
#include "evopipe/experiment.hpp"
#include "evopipe/report.hpp"
#include "evopipe/simdata.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace evopipe;

PipelineTree load_pipeline(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_pipeline(text.str());
}

void save_pipeline(const PipelineTree& tree, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << serialize_pipeline(tree) << '\n';
}

struct SimulateArgs {
    double h2 = 0.0;
    double maf = 0.0;
    double prevalence = 0.3;
    int samples = 0;
    int snps = 100;
    std::string combine = "sum";
    std::uint64_t seed = 0;
    std::string out;
    std::string manifest;
};

int cmd_simulate(const SimulateArgs& args) {
    SimOptions options;
    options.n_samples = args.samples;
    options.n_snps = args.snps;
    options.combine = parse_combine_rule(args.combine);
    const SimResult sim =
        simulate_epistatic_dataset(args.h2, args.maf, args.prevalence, options, args.seed);
    write_csv(sim.dataset, args.out);
    write_manifest(sim.manifest, args.manifest.empty() ? args.out + ".manifest"
                                                       : args.manifest);
    return 0;
}

struct OptimizeArgs {
    std::string input;
    std::string mode = "gp";
    int pop = 100;
    int gens = 100;
    double mutation_rate = 0.90;
    double crossover_rate = 0.05;
    double elitism = 0.10;
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out;
    std::string log;
};

int cmd_optimize(const OptimizeArgs& args) {
    const Dataset ds = load_csv(args.input);
    const Dataset split = stratified_split(ds, args.train_fraction, derive_seed(args.seed, 1));

    GpConfig cfg;
    cfg.population_size = args.pop;
    cfg.generations = args.gens;
    cfg.mutation_rate = args.mutation_rate;
    cfg.crossover_rate = args.crossover_rate;
    cfg.elitism_fraction = args.elitism;
    cfg.seed = args.seed;
    cfg.mode = parse_search_mode(args.mode);

    const GpResult result = cfg.mode == SearchMode::RandomSearch
                                ? run_random_search(cfg, split, args.jobs)
                                : run_gp(cfg, split, args.jobs);

    save_pipeline(result.best_ever.genome, args.out);
    write_generation_log(result, cfg, args.log.empty() ? args.out + ".log.csv" : args.log);
    std::cout << "best_fitness=" << to_string(result.best_ever.fitness)
              << " complexity=" << result.best_ever.complexity << '\n';
    return 0;
}

struct EvaluateArgs {
    std::string pipeline;
    std::string input;
    int cv = 0;
    bool holdout = false;
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_evaluate(const EvaluateArgs& args) {
    const PipelineTree tree = load_pipeline(args.pipeline);
    const Dataset ds = load_csv(args.input);
    if (args.holdout) {
        const Dataset split =
            stratified_split(ds, args.train_fraction, derive_seed(args.seed, 1));
        const Fitness fitness = evaluate_pipeline(tree, split, args.seed);
        if (args.out.empty())
            std::cout << "holdout," << to_string(fitness) << '\n';
        else
            write_holdout_score(fitness, args.out);
    } else {
        const auto scores = crossval_pipeline(tree, ds, args.cv, args.seed);
        if (args.out.empty()) {
            for (std::size_t f = 0; f < scores.size(); ++f)
                std::cout << f + 1 << ',' << to_string(scores[f]) << '\n';
        } else {
            write_cv_scores(scores, args.out);
        }
    }
    return 0;
}

struct ReportArgs {
    std::string pipeline;
    std::string input;
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
    std::string out_prefix;
};

int cmd_report(const ReportArgs& args) {
    const PipelineTree tree = load_pipeline(args.pipeline);
    const Dataset ds = load_csv(args.input);
    const Dataset split = stratified_split(ds, args.train_fraction, derive_seed(args.seed, 1));
    const TraceResult trace = write_report(tree, split, args.seed, args.out_prefix);
    std::cout << "steps=" << trace.steps.size() << " fitness=" << to_string(trace.fitness)
              << '\n';
    return 0;
}

struct GridArgs {
    std::vector<double> h2;
    std::vector<int> sizes;
    int replicates = 30;
    std::vector<std::string> modes;
    double maf = 0.2;
    double prevalence = 0.3;
    int snps = 100;
    std::string combine = "sum";
    int pop = 100;
    int gens = 100;
    double train_fraction = 0.75;
    int cv = 10;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string data_dir;
    std::string out;
};

int cmd_grid(const GridArgs& args) {
    GridConfig cfg;
    cfg.heritabilities = args.h2;
    cfg.sample_sizes = args.sizes;
    cfg.replicates = args.replicates;
    cfg.modes.clear();
    for (const auto& m : args.modes) cfg.modes.push_back(parse_grid_mode(m));
    cfg.maf = args.maf;
    cfg.prevalence = args.prevalence;
    cfg.n_snps = args.snps;
    cfg.combine = parse_combine_rule(args.combine);
    cfg.population_size = args.pop;
    cfg.generations = args.gens;
    cfg.train_fraction = args.train_fraction;
    cfg.cv_folds = args.cv;
    cfg.seed = args.seed;
    cfg.jobs = args.jobs;
    cfg.data_dir = args.data_dir;

    const auto rows = run_grid(cfg);
    write_grid_csv(rows, args.out);
    std::cout << "rows=" << rows.size() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolves tree-shaped ML pipelines over genotype data and simulates "
                 "epistatic SNP datasets"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate an epistatic SNP dataset");
    simulate->add_option("--h2", sim.h2, "Per-model heritability target")->required();
    simulate->add_option("--maf", sim.maf, "Predictive SNP minor allele frequency")->required();
    simulate->add_option("--samples", sim.samples, "Row count (even; balanced classes)")
        ->required();
    simulate->add_option("--snps", sim.snps, "Total SNP columns (8 predictive)");
    simulate->add_option("--prevalence", sim.prevalence, "Population prevalence K");
    simulate->add_option("--combine", sim.combine, "Model combination: sum|mean");
    simulate->add_option("--seed", sim.seed, "Random seed")->required();
    simulate->add_option("--out", sim.out, "Output dataset CSV")->required();
    simulate->add_option("--manifest", sim.manifest, "Manifest path (default <out>.manifest)");

    OptimizeArgs opt;
    auto* optimize = app.add_subcommand("optimize", "Search for a high-fitness pipeline");
    optimize->add_option("--input", opt.input, "Dataset CSV")->required();
    optimize->add_option("--mode", opt.mode, "gp|random|models-only");
    optimize->add_option("--pop", opt.pop, "Population size");
    optimize->add_option("--gens", opt.gens, "Generations");
    optimize->add_option("--mutation-rate", opt.mutation_rate, "Per-individual mutation rate");
    optimize->add_option("--crossover-rate", opt.crossover_rate,
                         "Per-individual crossover rate");
    optimize->add_option("--elitism", opt.elitism, "Elite fraction");
    optimize->add_option("--train-fraction", opt.train_fraction, "Stratified Train share");
    optimize->add_option("--seed", opt.seed, "Random seed")->required();
    optimize->add_option("--jobs", opt.jobs, "Parallel fitness evaluations");
    optimize->add_option("--out", opt.out, "Best pipeline output file")->required();
    optimize->add_option("--log", opt.log, "Generation log CSV (default <out>.log.csv)");

    EvaluateArgs eval;
    auto* evaluate = app.add_subcommand("evaluate", "Score a pipeline file on a dataset");
    evaluate->add_option("--pipeline", eval.pipeline, "Pipeline S-expression file")->required();
    evaluate->add_option("--input", eval.input, "Dataset CSV")->required();
    auto* cv_opt = evaluate->add_option("--cv", eval.cv, "Stratified k-fold evaluation");
    auto* holdout_flag =
        evaluate->add_flag("--holdout", eval.holdout, "Single stratified holdout evaluation");
    cv_opt->excludes(holdout_flag);
    evaluate->add_option("--train-fraction", eval.train_fraction, "Holdout Train share");
    evaluate->add_option("--seed", eval.seed, "Random seed");
    evaluate->add_option("--out", eval.out, "Scores CSV (default stdout)");

    ReportArgs rep;
    auto* report = app.add_subcommand("report", "Per-classifier-step accuracy and importances");
    report->add_option("--pipeline", rep.pipeline, "Pipeline S-expression file")->required();
    report->add_option("--input", rep.input, "Dataset CSV")->required();
    report->add_option("--train-fraction", rep.train_fraction, "Stratified Train share");
    report->add_option("--seed", rep.seed, "Random seed");
    report->add_option("--out-prefix", rep.out_prefix, "Report file prefix")->required();

    GridArgs grid;
    auto* gridcmd = app.add_subcommand("grid", "Run the simulated experiment grid");
    gridcmd->add_option("--h2", grid.h2, "Heritabilities")->required()->delimiter(',');
    gridcmd->add_option("--sizes", grid.sizes, "Sample sizes")->required()->delimiter(',');
    gridcmd->add_option("--replicates", grid.replicates, "Replicates per cell");
    gridcmd->add_option("--modes", grid.modes, "gp,random,models-only,rf-baseline")
        ->required()
        ->delimiter(',');
    gridcmd->add_option("--maf", grid.maf, "Predictive SNP MAF");
    gridcmd->add_option("--prevalence", grid.prevalence, "Population prevalence K");
    gridcmd->add_option("--snps", grid.snps, "Total SNP columns");
    gridcmd->add_option("--combine", grid.combine, "Model combination: sum|mean");
    gridcmd->add_option("--pop", grid.pop, "Population size");
    gridcmd->add_option("--gens", grid.gens, "Generations");
    gridcmd->add_option("--train-fraction", grid.train_fraction, "Stratified Train share");
    gridcmd->add_option("--cv", grid.cv, "Cross-validation folds per result row");
    gridcmd->add_option("--seed", grid.seed, "Random seed")->required();
    gridcmd->add_option("--jobs", grid.jobs, "Concurrent replicates");
    gridcmd->add_option("--data-dir", grid.data_dir, "Dataset cache directory");
    gridcmd->add_option("--out", grid.out, "Results CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (optimize->parsed()) return cmd_optimize(opt);
        if (evaluate->parsed()) {
            if (!eval.holdout && eval.cv < 2)
                throw ContractError("evaluate: pass --holdout or --cv k (k >= 2)");
            return cmd_evaluate(eval);
        }
        if (report->parsed()) return cmd_report(rep);
        if (gridcmd->parsed()) return cmd_grid(grid);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
