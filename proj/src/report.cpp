#include "evopipe/report.hpp"

#include "evopipe/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace evopipe {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    return out;
}

const char* step_operator_name(NodeKind kind) {
    return kind == NodeKind::ClassifyDT ? "dt" : "rf";
}

} // namespace

TraceResult write_report(const PipelineTree& tree, const Dataset& split_ds,
                         std::uint64_t eval_seed, const std::string& prefix, int top_k) {
    TraceResult trace = evaluate_pipeline_traced(tree, split_ds, eval_seed);

    auto steps = open_out(prefix + "_steps.csv");
    steps << "step,operator,param,test_balanced_accuracy\n";
    for (const auto& s : trace.steps)
        steps << s.step << ',' << step_operator_name(s.kind) << ',' << s.param << ','
              << format_double(s.test_accuracy) << '\n';

    auto imp = open_out(prefix + "_importances.csv");
    imp << "step,rank,feature,importance\n";
    for (const auto& s : trace.steps) {
        auto ranked = s.importances;
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        const auto limit = std::min<std::size_t>(ranked.size(),
                                                 static_cast<std::size_t>(top_k));
        for (std::size_t r = 0; r < limit; ++r)
            imp << s.step << ',' << r + 1 << ',' << ranked[r].first << ','
                << format_double(ranked[r].second) << '\n';
    }
    return trace;
}

void write_generation_log(const GpResult& result, const GpConfig& cfg,
                          const std::string& path) {
    auto out = open_out(path);
    out << "# mode=" << to_string(cfg.mode) << " seed=" << cfg.seed
        << " population=" << cfg.population_size << " generations=" << cfg.generations
        << " mutation_rate=" << format_double(cfg.mutation_rate)
        << " crossover_rate=" << format_double(cfg.crossover_rate)
        << " elitism_fraction=" << format_double(cfg.elitism_fraction) << '\n';
    out << "# variation: " << result.variation_note << '\n';
    out << "generation,best_fitness,mean_fitness,mean_complexity,best_pipeline\n";
    for (const auto& row : result.log) {
        out << row.generation << ',' << to_string(row.best) << ',';
        if (row.mean_fitness)
            out << format_double(*row.mean_fitness);
        else
            out << "failed";
        out << ',' << format_double(row.mean_complexity) << ',' << row.best_pipeline << '\n';
    }
}

void write_holdout_score(const Fitness& fitness, const std::string& path) {
    auto out = open_out(path);
    out << "split,balanced_accuracy\n";
    out << "holdout," << to_string(fitness) << '\n';
}

void write_cv_scores(const std::vector<Fitness>& scores, const std::string& path) {
    auto out = open_out(path);
    out << "fold,balanced_accuracy\n";
    for (std::size_t f = 0; f < scores.size(); ++f)
        out << f + 1 << ',' << to_string(scores[f]) << '\n';
}

} // namespace evopipe
