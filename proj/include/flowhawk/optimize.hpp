#pragma once
// Hyperparameter search: genetic algorithm over the per-classifier gene
// pools, plus grid and random search baselines.

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "flowhawk/dataset.hpp"
#include "flowhawk/metrics.hpp"

namespace flowhawk::optimize {

struct OptimizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct KindMismatch : OptimizeError {
  KindMismatch() : OptimizeError("chromosomes belong to different classifier kinds") {}
};
struct GridTooLarge : OptimizeError {
  GridTooLarge(std::uint64_t combos, std::uint64_t cap)
      : OptimizeError("grid enumerates " + std::to_string(combos) +
                      " combinations, above the cap of " + std::to_string(cap)) {}
};

// Gene-pool subset of the classifier schema (in_gene_pool entries only), in
// schema order. Chromosome gene i aligns with gene_pool(kind)[i].
const std::vector<classifiers::GeneSpec>& gene_pool(classifiers::Kind kind);

struct Chromosome {
  classifiers::Kind kind = classifiers::Kind::GaussianNB;
  std::vector<classifiers::Value> genes;

  classifiers::ClassifierSpec to_spec() const;
  std::string repr() const;  // "[100, 'gini', 2, 1, 0.000000, None]"
  bool operator==(const Chromosome&) const = default;
};

// The default hyperparameter values as a chromosome.
Chromosome default_chromosome(classifiers::Kind kind);
bool domain_valid(const Chromosome& c);

struct GAConfig {
  int population_size = 10;  // >= 4: the quarter refill needs it
  int generation_limit = 10;
  int cv_folds = 10;
  std::uint64_t seed = 0;
  int parallelism = 1;
};

// Index 0 is the default chromosome; the rest are uniform samples.
std::vector<Chromosome> init_population(classifiers::Kind kind, const GAConfig& cfg);

// Mean F1 over stratified k-fold CV. Failing fits score 0 instead of
// aborting the search; the diagnostic is appended to *diagnostics when given.
double fitness(const Chromosome& c, const dataset::LabeledDataset& ds,
               const GAConfig& cfg, std::vector<std::string>* diagnostics = nullptr);

// Single-point crossover at floor(L/2).
std::pair<Chromosome, Chromosome> crossover(const Chromosome& parent1,
                                            const Chromosome& parent2);

// floor(P/4) copies of offspring1, then up to floor(P/2) copies of
// offspring2, then fresh uniform-random chromosomes.
std::vector<Chromosome> refill(const Chromosome& offspring1,
                               const Chromosome& offspring2, const GAConfig& cfg,
                               std::mt19937_64& rng);

// Resamples exactly one uniformly chosen gene from its domain.
Chromosome mutate(const Chromosome& c, std::mt19937_64& rng);

struct GenerationRecord {
  int generation = 0;
  Chromosome fittest;
  double fitness = 0.0;
};

struct SearchResult {
  Chromosome best;
  double best_fitness = 0.0;
  std::vector<GenerationRecord> history;  // GA: per generation; grid/random: empty
  std::vector<std::pair<Chromosome, double>> table;  // grid/random: all evaluations
  std::uint64_t evaluations = 0;
  std::vector<std::string> diagnostics;
};

// Fitness function used by the searches; injectable for toy problems.
using FitnessFn = std::function<double(const Chromosome&)>;

SearchResult run_ga(classifiers::Kind kind, const dataset::LabeledDataset& ds,
                    const GAConfig& cfg);
SearchResult run_ga(classifiers::Kind kind, const FitnessFn& fn, const GAConfig& cfg);

constexpr std::uint64_t kDefaultGridCap = 10000;

// Cartesian product over the given per-gene value lists; the combination
// count is computed (and checked against the cap) before any evaluation.
std::uint64_t grid_combinations(const std::map<std::string, std::vector<classifiers::Value>>& grid);
SearchResult grid_search(classifiers::Kind kind,
                         const std::map<std::string, std::vector<classifiers::Value>>& grid,
                         const dataset::LabeledDataset& ds, const GAConfig& cfg,
                         std::uint64_t cap = kDefaultGridCap);

// Grid presets mirroring the published search-space construction.
std::map<std::string, std::vector<classifiers::Value>> preset_grid(classifiers::Kind kind);

// Sample 0 is always the default chromosome.
SearchResult random_search(classifiers::Kind kind, int n_iter,
                           const dataset::LabeledDataset& ds, const GAConfig& cfg);

// Machine-readable history rows: generation, best fitness, best genes.
std::string history_rows(const SearchResult& result);

}  // namespace flowhawk::optimize
