#pragma once

#include "evopipe/evolve.hpp"
#include "evopipe/pipeline.hpp"

#include <string>
#include <vector>

namespace evopipe {

/// Shortest round-trippable decimal form, shared by every CSV writer.
std::string format_double(double v);

/// Replays the pipeline on the split dataset and writes
///   <prefix>_steps.csv        step,operator,param,test_balanced_accuracy
///   <prefix>_importances.csv  step,rank,feature,importance   (top_k per step)
/// one steps row per classifier node in execution order.
TraceResult write_report(const PipelineTree& tree, const Dataset& split_ds,
                         std::uint64_t eval_seed, const std::string& prefix, int top_k = 10);

/// generation,best_fitness,mean_fitness,mean_complexity,best_pipeline rows,
/// preceded by `#` header lines describing the run and the variation counts.
void write_generation_log(const GpResult& result, const GpConfig& cfg,
                          const std::string& path);

void write_holdout_score(const Fitness& fitness, const std::string& path);
void write_cv_scores(const std::vector<Fitness>& scores, const std::string& path);

} // namespace evopipe
