#pragma once

#include "evopipe/dataset.hpp"
#include "evopipe/rng.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace evopipe {

/// Hardy-Weinberg genotype frequencies at minor-allele frequency q:
/// f(0) = (1-q)^2, f(1) = 2q(1-q), f(2) = q^2.
std::array<double, 3> hwe_frequencies(double maf);

/// A pure two-locus epistatic penetrance model: every single-locus marginal
/// penetrance equals the prevalence K (no main effects), while the table's
/// genotype-weighted variance delivers the target heritability
///   h^2 = sum_ij f(i) f(j) (p[i][j] - K)^2 / (K (1 - K)).
struct EpistaticModel {
    std::array<std::array<double, 3>, 3> penetrance{};
    double maf = 0.0;
    double prevalence = 0.0;
    double heritability = 0.0; // achieved, not target
};

double model_heritability(const std::array<std::array<double, 3>, 3>& penetrance, double maf,
                          double prevalence);

/// Largest absolute deviation of any single-locus marginal penetrance from K.
double model_purity_deviation(const std::array<std::array<double, 3>, 3>& penetrance,
                              double maf, double prevalence);

/// Random-search construction: sample a deviation table, project it onto the
/// zero-marginal constraint, rescale to the target heritability, clamp to
/// [0,1] and repeat until both invariants hold (purity within 1e-6, achieved
/// h^2 within 5% relative). Throws GenerationError when the attempt budget
/// runs out for an infeasible (h2, maf, K) combination.
EpistaticModel generate_epistatic_model(double h2, double maf, double prevalence, Rng& rng,
                                        int max_attempts = 100000);

/// How the four models' penetrances turn into one disease probability.
/// Mean averages the four tables; Sum adds the four deviations from
/// prevalence onto the base rate (clamped to [0,1]), which preserves the
/// per-model signal strength instead of dividing it by four.
enum class CombineRule { Mean, Sum };

CombineRule parse_combine_rule(const std::string& name);
std::string to_string(CombineRule rule);

struct SimOptions {
    int n_samples = 0;  // must be even; the sampler balances cases and controls
    int n_snps = 100;   // total columns; the first 8 logical ones are predictive
    double maf_lo = 0.05;
    double maf_hi = 0.5;
    CombineRule combine = CombineRule::Sum;
    bool shuffle_columns = true; // tests disable this to pin ground truth
};

struct SimManifest {
    std::uint64_t seed = 0;
    double h2_target = 0.0;
    double maf = 0.0;
    double prevalence = 0.0;
    int n_samples = 0;
    int n_snps = 0;
    CombineRule combine = CombineRule::Sum;
    std::array<EpistaticModel, 4> models{};
    std::array<std::array<int, 2>, 4> model_columns{}; // final column index per locus
};

struct SimResult {
    Dataset dataset;
    SimManifest manifest;
};

/// Samples a balanced case/control dataset: the eight predictive SNPs follow
/// the four models, the rest are HWE noise at uniform random MAFs, and
/// rejection sampling keeps exactly n_samples/2 rows per class. Column
/// positions are shuffled; ground truth goes into the manifest.
SimResult simulate_dataset(const std::array<EpistaticModel, 4>& models,
                           const SimOptions& options, std::uint64_t seed);

/// Generates the four same-parameter models and the dataset in one go.
SimResult simulate_epistatic_dataset(double h2, double maf, double prevalence,
                                     const SimOptions& options, std::uint64_t seed);

void write_manifest(const SimManifest& manifest, const std::string& path);

} // namespace evopipe
