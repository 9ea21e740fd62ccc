#include "evopipe/evolve.hpp"

#include "evopipe/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace evopipe {

namespace {

constexpr int kInitDepth = 3;       // grow depth for random pipelines
constexpr int kMutSubtreeDepth = 3; // depth cap for subtrees built by uniform mutation
constexpr int kInsertChainMax = 3;  // longest operator chain spliced by insert mutation
constexpr int kVariationRetries = 50;

int round_count(double rate, int n) {
    return static_cast<int>(std::floor(rate * static_cast<double>(n) + 0.5));
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items are
/// independent and write only to their own slots, so scheduling cannot
/// change results.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

void evaluate_at(Individual& ind, const Dataset& ds, std::uint64_t eval_seed) {
    ind.fitness = evaluate_pipeline(ind.genome, ds, eval_seed);
    ind.complexity = complexity(ind.genome);
}

std::size_t best_index(const std::vector<Individual>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (pop[best].fitness < pop[i].fitness) best = i;
    return best;
}

GenerationLog log_generation(int gen, const std::vector<Individual>& pop,
                             const Fitness& best_ever) {
    GenerationLog row;
    row.generation = gen;
    const std::size_t bi = best_index(pop);
    row.best = pop[bi].fitness;
    row.best_ever = best_ever;
    row.best_pipeline = serialize_pipeline(pop[bi].genome);

    double fit_sum = 0.0;
    std::size_t fit_n = 0;
    double cx_sum = 0.0;
    for (const auto& ind : pop) {
        if (!ind.fitness.is_failed()) {
            fit_sum += ind.fitness.value();
            ++fit_n;
        }
        cx_sum += static_cast<double>(ind.complexity);
    }
    if (fit_n > 0) row.mean_fitness = fit_sum / static_cast<double>(fit_n);
    row.mean_complexity = cx_sum / static_cast<double>(pop.size());
    return row;
}

NodeKind random_operator_kind(Rng& rng, OperatorSet set) {
    static constexpr NodeKind kFull[] = {NodeKind::ClassifyDT, NodeKind::ClassifyRF,
                                         NodeKind::SelectPairs, NodeKind::Combine};
    static constexpr NodeKind kModelsOnly[] = {NodeKind::ClassifyDT, NodeKind::ClassifyRF};
    if (set == OperatorSet::Full) return kFull[rng.uniform_index(std::size(kFull))];
    return kModelsOnly[rng.uniform_index(std::size(kModelsOnly))];
}

int random_param(NodeKind kind, Rng& rng) {
    switch (kind) {
    case NodeKind::ClassifyDT: return rng.uniform_int(kDepthRange.lo, kDepthRange.hi);
    case NodeKind::ClassifyRF: return rng.uniform_int(kTreesRange.lo, kTreesRange.hi);
    case NodeKind::SelectPairs: return rng.uniform_int(kPairsRange.lo, kPairsRange.hi);
    default: return 0;
    }
}

PipelineTree apply_uniform(const PipelineTree& tree, Rng& rng, OperatorSet set) {
    PipelineTree out = tree;
    const std::size_t idx = rng.uniform_index(node_count(out));
    node_at(out.root, idx) = grow_random_node(rng, rng.uniform_int(1, kMutSubtreeDepth), set);
    return out;
}

PipelineTree apply_insert(const PipelineTree& tree, Rng& rng, OperatorSet set) {
    PipelineTree out = tree;
    const std::size_t idx = rng.uniform_index(node_count(out));
    PipelineNode& target = node_at(out.root, idx);
    PipelineNode chain = std::move(target);
    const int links = rng.uniform_int(1, kInsertChainMax);
    for (int i = 0; i < links; ++i) {
        PipelineNode wrapper;
        wrapper.kind = random_operator_kind(rng, set);
        wrapper.param = random_param(wrapper.kind, rng);
        if (wrapper.kind == NodeKind::Combine) {
            PipelineNode sibling = grow_random_node(rng, 2, set);
            if (rng.bernoulli(0.5)) {
                wrapper.children.push_back(std::move(chain));
                wrapper.children.push_back(std::move(sibling));
            } else {
                wrapper.children.push_back(std::move(sibling));
                wrapper.children.push_back(std::move(chain));
            }
        } else {
            wrapper.children.push_back(std::move(chain));
        }
        chain = std::move(wrapper);
    }
    target = std::move(chain);
    return out;
}

PipelineTree apply_shrink(const PipelineTree& tree, Rng& rng) {
    PipelineTree out = tree;
    std::vector<std::size_t> operators;
    const std::size_t total = node_count(out);
    for (std::size_t i = 0; i < total; ++i)
        if (node_at(out.root, i).kind != NodeKind::Input) operators.push_back(i);
    if (operators.empty()) return out;
    PipelineNode& victim = node_at(out.root, operators[rng.uniform_index(operators.size())]);
    PipelineNode child = std::move(victim.children.front());
    victim = std::move(child);
    return out;
}

} // namespace

SearchMode parse_search_mode(const std::string& name) {
    if (name == "gp") return SearchMode::Gp;
    if (name == "random" || name == "random-search") return SearchMode::RandomSearch;
    if (name == "models-only") return SearchMode::ModelsOnly;
    throw ContractError("unknown search mode '" + name + "'");
}

std::string to_string(SearchMode mode) {
    switch (mode) {
    case SearchMode::Gp: return "gp";
    case SearchMode::RandomSearch: return "random";
    case SearchMode::ModelsOnly: return "models-only";
    }
    return "?";
}

int GpConfig::elite_count() const {
    return round_count(elitism_fraction, population_size);
}

OperatorSet GpConfig::operator_set() const {
    return mode == SearchMode::ModelsOnly ? OperatorSet::ModelsOnly : OperatorSet::Full;
}

void GpConfig::validate() const {
    const auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!in_unit(mutation_rate) || !in_unit(crossover_rate) || !in_unit(elitism_fraction))
        throw ContractError("GpConfig: rates must lie in [0,1]");
    if (population_size < 10) throw ContractError("GpConfig: population_size must be >= 10");
    if (generations < 0) throw ContractError("GpConfig: generations must be >= 0");
    if (tournament_size != 3)
        throw ContractError("GpConfig: selection scheme is fixed at tournament size 3");
    if (elite_count() < 1) throw ContractError("GpConfig: elitism count must be >= 1");
    if (elite_count() >= population_size)
        throw ContractError("GpConfig: elitism swallows the whole population");
}

const Individual& tournament_select(const std::vector<Individual>& pop, Rng& rng) {
    const std::size_t n = pop.size();
    if (n < 3) throw ContractError("tournament_select: population smaller than 3");

    std::size_t draw[3];
    draw[0] = rng.uniform_index(n);
    do draw[1] = rng.uniform_index(n);
    while (draw[1] == draw[0]);
    do draw[2] = rng.uniform_index(n);
    while (draw[2] == draw[0] || draw[2] == draw[1]);

    // Discard the lowest fitness (earliest draw on ties).
    std::size_t worst = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (pop[draw[i]].fitness < pop[draw[worst]].fitness) worst = i;
    const Individual& a = pop[draw[(worst + 1) % 3]];
    const Individual& b = pop[draw[(worst + 2) % 3]];

    // Parsimony never promotes a failed survivor over a working one.
    if (a.fitness.is_failed() != b.fitness.is_failed())
        return a.fitness.is_failed() ? b : a;
    if (a.complexity != b.complexity) return a.complexity < b.complexity ? a : b;
    if (!(a.fitness == b.fitness)) return b.fitness < a.fitness ? a : b;
    return rng.bernoulli(0.5) ? a : b;
}

std::pair<PipelineTree, PipelineTree> crossover_one_point(const PipelineTree& a,
                                                          const PipelineTree& b, Rng& rng) {
    const std::size_t na = node_count(a);
    const std::size_t nb = node_count(b);
    for (int attempt = 0; attempt < kVariationRetries; ++attempt) {
        PipelineTree ca = a;
        PipelineTree cb = b;
        std::swap(node_at(ca.root, rng.uniform_index(na)),
                  node_at(cb.root, rng.uniform_index(nb)));
        if (is_valid(ca) && is_valid(cb)) return {std::move(ca), std::move(cb)};
    }
    return {a, b};
}

MutationOutcome mutate_detailed(const PipelineTree& tree, Rng& rng, OperatorSet set) {
    const auto op = static_cast<MutationOp>(rng.uniform_index(3));
    for (int attempt = 0; attempt < kVariationRetries; ++attempt) {
        PipelineTree candidate;
        switch (op) {
        case MutationOp::Uniform: candidate = apply_uniform(tree, rng, set); break;
        case MutationOp::Insert: candidate = apply_insert(tree, rng, set); break;
        case MutationOp::Shrink: candidate = apply_shrink(tree, rng); break;
        }
        if (is_valid(candidate)) return {std::move(candidate), op};
    }
    return {tree, op};
}

PipelineTree mutate(const PipelineTree& tree, Rng& rng, OperatorSet set) {
    return mutate_detailed(tree, rng, set).tree;
}

GpResult run_gp(const GpConfig& cfg, const Dataset& ds, int jobs) {
    cfg.validate();
    if (!ds.has_both_partitions())
        throw ContractError("run_gp: dataset must be split before the run");

    const OperatorSet opset = cfg.operator_set();
    const std::uint64_t eval_seed = cfg.seed;

    const int elites = cfg.elite_count();
    const int nonelite = cfg.population_size - elites;
    const int cross_pairs = round_count(cfg.crossover_rate, nonelite) / 2;
    const int crossed = 2 * cross_pairs;
    const int mutants = round_count(cfg.mutation_rate, nonelite - crossed);

    GpResult result;
    {
        std::ostringstream note;
        note << "elites=" << elites << " crossover_pairs=" << cross_pairs << " (" << crossed
             << " individuals) mutants=" << mutants << " untouched="
             << (nonelite - crossed - mutants);
        result.variation_note = note.str();
    }

    std::vector<Individual> pop(static_cast<std::size_t>(cfg.population_size));
    for (std::size_t i = 0; i < pop.size(); ++i)
        pop[i].genome = random_pipeline(derive_seed(cfg.seed, 0x6E40, i), kInitDepth, opset);
    parallel_for(pop.size(), jobs, [&](std::size_t i) { evaluate_at(pop[i], ds, eval_seed); });

    Individual best_ever = pop[best_index(pop)];
    result.log.push_back(log_generation(0, pop, best_ever.fitness));

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        Rng rng(derive_seed(cfg.seed, 0x9E4A, static_cast<std::uint64_t>(gen)));

        const Individual& champion = pop[best_index(pop)];
        std::vector<Individual> next;
        next.reserve(pop.size());
        for (int e = 0; e < elites; ++e) next.push_back(champion);
        for (int i = 0; i < nonelite; ++i) next.push_back(tournament_select(pop, rng));

        // Tournament winners land in random slots, so variating prefixes of
        // the non-elite block applies the rates to uniformly random copies.
        const auto base = static_cast<std::size_t>(elites);
        std::vector<std::size_t> dirty;
        for (int p = 0; p < cross_pairs; ++p) {
            auto& left = next[base + static_cast<std::size_t>(2 * p)];
            auto& right = next[base + static_cast<std::size_t>(2 * p + 1)];
            auto offspring = crossover_one_point(left.genome, right.genome, rng);
            left.genome = std::move(offspring.first);
            right.genome = std::move(offspring.second);
            dirty.push_back(base + static_cast<std::size_t>(2 * p));
            dirty.push_back(base + static_cast<std::size_t>(2 * p + 1));
        }
        for (int m = 0; m < mutants; ++m) {
            auto& ind = next[base + static_cast<std::size_t>(crossed + m)];
            ind.genome = mutate(ind.genome, rng, opset);
            dirty.push_back(base + static_cast<std::size_t>(crossed + m));
        }

        parallel_for(dirty.size(), jobs,
                     [&](std::size_t i) { evaluate_at(next[dirty[i]], ds, eval_seed); });
        pop = std::move(next);

        const std::size_t bi = best_index(pop);
        if (best_ever.fitness < pop[bi].fitness) best_ever = pop[bi];
        result.log.push_back(log_generation(gen, pop, best_ever.fitness));
    }

    result.best_ever = std::move(best_ever);
    return result;
}

GpResult run_random_search(const GpConfig& cfg, const Dataset& ds, int jobs,
                           int budget_override) {
    if (budget_override == 0) cfg.validate();
    if (!ds.has_both_partitions())
        throw ContractError("run_random_search: dataset must be split before the run");

    const OperatorSet opset = cfg.operator_set();
    const std::uint64_t eval_seed = cfg.seed;
    const long budget = budget_override > 0
                            ? budget_override
                            : static_cast<long>(cfg.population_size) * cfg.generations;
    if (budget < 1) throw ContractError("run_random_search: empty evaluation budget");

    std::vector<Individual> all(static_cast<std::size_t>(budget));
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i].genome = random_pipeline(derive_seed(cfg.seed, 0xAB5E, i), kInitDepth, opset);
    parallel_for(all.size(), jobs, [&](std::size_t i) { evaluate_at(all[i], ds, eval_seed); });

    GpResult result;
    result.variation_note = "random search, budget=" + std::to_string(budget);
    Individual best_ever = all[0];

    const std::size_t block = budget_override > 0
                                  ? all.size()
                                  : static_cast<std::size_t>(cfg.population_size);
    std::size_t i = 0;
    int block_no = 0;
    while (i < all.size()) {
        const std::size_t end = std::min(all.size(), i + block);
        std::vector<Individual> window(all.begin() + static_cast<std::ptrdiff_t>(i),
                                       all.begin() + static_cast<std::ptrdiff_t>(end));
        for (const auto& ind : window)
            if (best_ever.fitness < ind.fitness) best_ever = ind;
        result.log.push_back(log_generation(block_no, window, best_ever.fitness));
        i = end;
        ++block_no;
    }

    result.best_ever = std::move(best_ever);
    return result;
}

} // namespace evopipe
