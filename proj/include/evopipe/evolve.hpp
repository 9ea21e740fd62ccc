#pragma once

#include "evopipe/dataset.hpp"
#include "evopipe/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace evopipe {

enum class SearchMode { Gp, RandomSearch, ModelsOnly };

SearchMode parse_search_mode(const std::string& name); // "gp" | "random" | "models-only"
std::string to_string(SearchMode mode);

struct GpConfig {
    int population_size = 100;
    int generations = 100;
    double mutation_rate = 0.90;
    double crossover_rate = 0.05;
    double elitism_fraction = 0.10;
    int tournament_size = 3; // fixed by the 3-way/2-way selection scheme
    std::uint64_t seed = 0;
    SearchMode mode = SearchMode::Gp;

    int elite_count() const;
    OperatorSet operator_set() const;
    void validate() const; // throws ContractError on a bad configuration
};

struct GenerationLog {
    int generation = 0;
    Fitness best = Fitness::failed();      // best of this generation
    Fitness best_ever = Fitness::failed(); // running best across the run
    std::optional<double> mean_fitness;    // over non-failed individuals
    double mean_complexity = 0.0;
    std::string best_pipeline; // serialized best of this generation
};

struct GpResult {
    Individual best_ever;
    std::vector<GenerationLog> log;
    std::string variation_note; // how the rate arithmetic was applied
};

/// 3-way tournament with 2-way parsimony: of three distinct uniform draws the
/// lowest-fitness one is discarded, then the less complex of the survivors
/// wins (equal complexity: higher fitness; equal both: uniform pick).
const Individual& tournament_select(const std::vector<Individual>& pop, Rng& rng);

/// Swaps a uniformly chosen subtree of a with one of b. Offspring violating a
/// genome invariant are rejected; after 50 attempts the parents come back
/// unchanged.
std::pair<PipelineTree, PipelineTree> crossover_one_point(const PipelineTree& a,
                                                          const PipelineTree& b, Rng& rng);

enum class MutationOp { Uniform, Insert, Shrink };

struct MutationOutcome {
    PipelineTree tree;
    MutationOp op;
};

/// Applies one of the three mutation operators, chosen with probability 1/3
/// each: uniform (replace a random subtree), insert (splice a random operator
/// chain above a random node), shrink (remove one operator, keeping its first
/// child). Invalid results are retried up to 50 times, then the tree comes
/// back unchanged.
PipelineTree mutate(const PipelineTree& tree, Rng& rng,
                    OperatorSet set = OperatorSet::Full);
MutationOutcome mutate_detailed(const PipelineTree& tree, Rng& rng,
                                OperatorSet set = OperatorSet::Full);

/// The full generational loop: elitism clones of the generation's best, the
/// rest tournament winners, crossover applied to a fixed count of the copies
/// and mutation to a fixed count of the untouched remainder. Returns the best
/// individual ever evaluated plus a per-generation log. Deterministic in
/// (cfg.seed, ds) regardless of jobs.
GpResult run_gp(const GpConfig& cfg, const Dataset& split_ds, int jobs = 1);

/// Evaluates population_size * generations independent random pipelines (or
/// budget_override when nonzero) with the same seed discipline as run_gp.
GpResult run_random_search(const GpConfig& cfg, const Dataset& split_ds, int jobs = 1,
                           int budget_override = 0);

} // namespace evopipe
