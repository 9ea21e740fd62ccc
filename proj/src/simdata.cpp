#include "evopipe/simdata.hpp"

#include "evopipe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace evopipe {

std::array<double, 3> hwe_frequencies(double maf) {
    return {(1.0 - maf) * (1.0 - maf), 2.0 * maf * (1.0 - maf), maf * maf};
}

double model_heritability(const std::array<std::array<double, 3>, 3>& penetrance, double maf,
                          double prevalence) {
    const auto f = hwe_frequencies(maf);
    double var = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double d = penetrance[i][j] - prevalence;
            var += f[i] * f[j] * d * d;
        }
    return var / (prevalence * (1.0 - prevalence));
}

double model_purity_deviation(const std::array<std::array<double, 3>, 3>& penetrance,
                              double maf, double prevalence) {
    const auto f = hwe_frequencies(maf);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        double row = 0.0, col = 0.0;
        for (int j = 0; j < 3; ++j) {
            row += f[j] * penetrance[i][j];
            col += f[j] * penetrance[j][i];
        }
        worst = std::max({worst, std::abs(row - prevalence), std::abs(col - prevalence)});
    }
    return worst;
}

namespace {

using Table = std::array<std::array<double, 3>, 3>;

// Weighted double centering: removes every row and column marginal of the
// deviation table in one exact step (weights sum to 1).
void project_zero_marginals(Table& d, const std::array<double, 3>& f) {
    std::array<double, 3> row{}, col{};
    double grand = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            row[i] += f[j] * d[i][j];
            col[j] += f[i] * d[i][j];
            grand += f[i] * f[j] * d[i][j];
        }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d[i][j] += grand - row[i] - col[j];
}

double weighted_variance(const Table& d, const std::array<double, 3>& f) {
    double var = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) var += f[i] * f[j] * d[i][j] * d[i][j];
    return var;
}

} // namespace

EpistaticModel generate_epistatic_model(double h2, double maf, double prevalence, Rng& rng,
                                        int max_attempts) {
    if (!(h2 > 0.0 && h2 < 1.0))
        throw ContractError("generate_epistatic_model: h2 must lie in (0,1)");
    if (!(maf > 0.0 && maf <= 0.5))
        throw ContractError("generate_epistatic_model: maf must lie in (0,0.5]");
    if (!(prevalence > 0.0 && prevalence < 1.0))
        throw ContractError("generate_epistatic_model: prevalence must lie in (0,1)");

    const auto f = hwe_frequencies(maf);
    const double target_var = h2 * prevalence * (1.0 - prevalence);
    constexpr int kRefineIters = 100;
    constexpr double kPurityTol = 1e-6;
    constexpr double kRelH2Tol = 0.05;

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Table d;
        for (auto& row : d)
            for (auto& cell : row) cell = rng.uniform_real(-1.0, 1.0);

        for (int iter = 0; iter < kRefineIters; ++iter) {
            project_zero_marginals(d, f);
            const double var = weighted_variance(d, f);
            if (var < 1e-12) break; // centered away to nothing; resample
            const double scale = std::sqrt(target_var / var);
            bool clamped = false;
            for (auto& row : d)
                for (auto& cell : row) {
                    cell *= scale;
                    const double lo = -prevalence, hi = 1.0 - prevalence;
                    if (cell < lo) {
                        cell = lo;
                        clamped = true;
                    } else if (cell > hi) {
                        cell = hi;
                        clamped = true;
                    }
                }
            if (!clamped) break;
        }

        Table p;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) p[i][j] = prevalence + d[i][j];
        const double achieved = model_heritability(p, maf, prevalence);
        if (model_purity_deviation(p, maf, prevalence) <= kPurityTol &&
            std::abs(achieved - h2) <= kRelH2Tol * h2) {
            EpistaticModel model;
            model.penetrance = p;
            model.maf = maf;
            model.prevalence = prevalence;
            model.heritability = achieved;
            return model;
        }
    }

    std::ostringstream msg;
    msg << "generate_epistatic_model: no feasible table for h2=" << h2 << " maf=" << maf
        << " prevalence=" << prevalence << " within " << max_attempts << " attempts";
    throw GenerationError(msg.str());
}

CombineRule parse_combine_rule(const std::string& name) {
    if (name == "mean") return CombineRule::Mean;
    if (name == "sum") return CombineRule::Sum;
    throw ContractError("unknown combine rule '" + name + "'");
}

std::string to_string(CombineRule rule) {
    return rule == CombineRule::Mean ? "mean" : "sum";
}

namespace {

int sample_genotype(double maf, Rng& rng) {
    const auto f = hwe_frequencies(maf);
    const double u = rng.uniform01();
    if (u < f[0]) return 0;
    if (u < f[0] + f[1]) return 1;
    return 2;
}

double disease_probability(const std::array<EpistaticModel, 4>& models,
                           const std::array<int, 8>& genotypes, CombineRule rule) {
    if (rule == CombineRule::Mean) {
        double sum = 0.0;
        for (int m = 0; m < 4; ++m)
            sum += models[static_cast<std::size_t>(m)]
                       .penetrance[static_cast<std::size_t>(genotypes[2 * m])]
                                  [static_cast<std::size_t>(genotypes[2 * m + 1])];
        return sum / 4.0;
    }
    double base = 0.0, deviation = 0.0;
    for (int m = 0; m < 4; ++m) {
        const auto& model = models[static_cast<std::size_t>(m)];
        base += model.prevalence / 4.0;
        deviation += model.penetrance[static_cast<std::size_t>(genotypes[2 * m])]
                                     [static_cast<std::size_t>(genotypes[2 * m + 1])] -
                     model.prevalence;
    }
    return std::clamp(base + deviation, 0.0, 1.0);
}

} // namespace

SimResult simulate_dataset(const std::array<EpistaticModel, 4>& models,
                           const SimOptions& options, std::uint64_t seed) {
    if (options.n_samples < 2 || options.n_samples % 2 != 0)
        throw ContractError("simulate_dataset: n_samples must be even and positive");
    if (options.n_snps < 8)
        throw ContractError("simulate_dataset: need at least 8 SNP columns");
    if (!(options.maf_lo > 0.0 && options.maf_lo <= options.maf_hi && options.maf_hi <= 0.5))
        throw ContractError("simulate_dataset: bad noise MAF range");

    Rng rng(derive_seed(seed, 0xDA7A));
    const int n_noise = options.n_snps - 8;
    std::vector<double> noise_maf(static_cast<std::size_t>(n_noise));
    for (auto& q : noise_maf) q = rng.uniform_real(options.maf_lo, options.maf_hi);

    const int per_class = options.n_samples / 2;
    const long budget = 1000L * options.n_samples;
    int n_cases = 0, n_controls = 0;

    // Rows in logical column order: 8 predictive SNPs first, then noise.
    std::vector<std::vector<int>> rows;
    std::vector<int> labels;
    rows.reserve(static_cast<std::size_t>(options.n_samples));

    for (long draw = 0; n_cases < per_class || n_controls < per_class; ++draw) {
        if (draw >= budget)
            throw SimulationError("simulate_dataset: rejection sampling budget exhausted");
        std::vector<int> row(static_cast<std::size_t>(options.n_snps));
        std::array<int, 8> predictive{};
        for (int k = 0; k < 8; ++k) {
            predictive[static_cast<std::size_t>(k)] =
                sample_genotype(models[static_cast<std::size_t>(k / 2)].maf, rng);
            row[static_cast<std::size_t>(k)] = predictive[static_cast<std::size_t>(k)];
        }
        for (int k = 0; k < n_noise; ++k)
            row[static_cast<std::size_t>(8 + k)] =
                sample_genotype(noise_maf[static_cast<std::size_t>(k)], rng);

        const double prob = disease_probability(models, predictive, options.combine);
        const int label = rng.bernoulli(prob) ? 1 : 0;
        if (label == 1 && n_cases < per_class) {
            rows.push_back(std::move(row));
            labels.push_back(1);
            ++n_cases;
        } else if (label == 0 && n_controls < per_class) {
            rows.push_back(std::move(row));
            labels.push_back(0);
            ++n_controls;
        }
    }

    // Scatter logical columns across the table.
    std::vector<int> logical_at(static_cast<std::size_t>(options.n_snps));
    std::iota(logical_at.begin(), logical_at.end(), 0);
    if (options.shuffle_columns) shuffle(logical_at, rng);

    std::vector<std::string> names;
    std::vector<std::vector<int>> columns(static_cast<std::size_t>(options.n_snps));
    for (int c = 0; c < options.n_snps; ++c) {
        names.push_back("snp" + std::to_string(c + 1));
        auto& column = columns[static_cast<std::size_t>(c)];
        column.resize(rows.size());
        const auto logical = static_cast<std::size_t>(logical_at[static_cast<std::size_t>(c)]);
        for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][logical];
    }

    SimResult result{Dataset(std::move(names), std::move(columns), std::move(labels)), {}};
    result.manifest.seed = seed;
    result.manifest.h2_target = models[0].heritability;
    result.manifest.maf = models[0].maf;
    result.manifest.prevalence = models[0].prevalence;
    result.manifest.n_samples = options.n_samples;
    result.manifest.n_snps = options.n_snps;
    result.manifest.combine = options.combine;
    result.manifest.models = models;
    for (int c = 0; c < options.n_snps; ++c) {
        const int logical = logical_at[static_cast<std::size_t>(c)];
        if (logical < 8)
            result.manifest.model_columns[static_cast<std::size_t>(logical / 2)]
                                         [static_cast<std::size_t>(logical % 2)] = c;
    }
    return result;
}

SimResult simulate_epistatic_dataset(double h2, double maf, double prevalence,
                                     const SimOptions& options, std::uint64_t seed) {
    std::array<EpistaticModel, 4> models;
    for (int m = 0; m < 4; ++m) {
        Rng rng(derive_seed(seed, 0xE91, static_cast<std::uint64_t>(m)));
        models[static_cast<std::size_t>(m)] = generate_epistatic_model(h2, maf, prevalence, rng);
    }
    SimResult result = simulate_dataset(models, options, seed);
    result.manifest.h2_target = h2;
    return result;
}

void write_manifest(const SimManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out.precision(17);
    out << "seed=" << manifest.seed << '\n'
        << "h2_target=" << manifest.h2_target << '\n'
        << "maf=" << manifest.maf << '\n'
        << "prevalence=" << manifest.prevalence << '\n'
        << "n_samples=" << manifest.n_samples << '\n'
        << "n_snps=" << manifest.n_snps << '\n'
        << "combine=" << to_string(manifest.combine) << '\n';

    std::ostringstream all_columns;
    for (int m = 0; m < 4; ++m) {
        const auto& model = manifest.models[static_cast<std::size_t>(m)];
        const auto& cols = manifest.model_columns[static_cast<std::size_t>(m)];
        out << "model" << m << "_columns=" << cols[0] << ',' << cols[1] << '\n';
        out << "model" << m << "_h2=" << model.heritability << '\n';
        out << "model" << m << "_maf=" << model.maf << '\n';
        out << "model" << m << "_penetrance=";
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out << model.penetrance[static_cast<std::size_t>(i)]
                                       [static_cast<std::size_t>(j)]
                    << (i == 2 && j == 2 ? '\n' : ',');
        all_columns << (m == 0 ? "" : ",") << cols[0] << ',' << cols[1];
    }
    out << "predictive_columns=" << all_columns.str() << '\n';
    if (!out) throw FormatError("write failed for '" + path + "'");
}

} // namespace evopipe
