#include "flowhawk/optimize.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

namespace flowhawk::optimize {

using classifiers::GeneSpec;
using classifiers::GeneType;
using classifiers::Kind;
using classifiers::Value;

const std::vector<GeneSpec>& gene_pool(Kind kind) {
  static std::unordered_map<int, std::vector<GeneSpec>> cache = [] {
    std::unordered_map<int, std::vector<GeneSpec>> m;
    for (Kind k : {Kind::GaussianNB, Kind::DecisionTree, Kind::RandomForest,
                   Kind::AdaBoost, Kind::LinearSVM, Kind::KNN}) {
      std::vector<GeneSpec> pool;
      for (const auto& g : classifiers::schema(k))
        if (g.in_gene_pool) pool.push_back(g);
      m.emplace(static_cast<int>(k), std::move(pool));
    }
    return m;
  }();
  return cache.at(static_cast<int>(kind));
}

classifiers::ClassifierSpec Chromosome::to_spec() const {
  classifiers::ClassifierSpec spec;
  spec.kind = kind;
  const auto& pool = gene_pool(kind);
  if (genes.size() != pool.size())
    throw OptimizeError("chromosome length " + std::to_string(genes.size()) +
                        " does not match gene pool size " +
                        std::to_string(pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i)
    spec.hyperparameters[pool[i].name] = genes[i];
  return spec;
}

std::string Chromosome::repr() const {
  std::string out = "[";
  for (std::size_t i = 0; i < genes.size(); ++i) {
    if (i) out += ", ";
    out += genes[i].repr();
  }
  return out + "]";
}

Chromosome default_chromosome(Kind kind) {
  Chromosome c;
  c.kind = kind;
  for (const auto& g : gene_pool(kind)) c.genes.push_back(g.default_value);
  return c;
}

bool domain_valid(const Chromosome& c) {
  const auto& pool = gene_pool(c.kind);
  if (c.genes.size() != pool.size()) return false;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (!pool[i].contains(c.genes[i])) return false;
  return true;
}

namespace {

Value sample_gene(const GeneSpec& g, std::mt19937_64& rng) {
  switch (g.type) {
    case GeneType::Categorical: {
      // None, where allowed, is one extra uniform option.
      std::size_t n = g.categories.size() + (g.allow_none ? 1 : 0);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      std::size_t i = pick(rng);
      if (i == g.categories.size()) return Value::none();
      return Value(g.categories[i]);
    }
    case GeneType::Integer: {
      auto lo = static_cast<std::int64_t>(g.low);
      auto hi = static_cast<std::int64_t>(g.high);
      std::uniform_int_distribution<std::int64_t> pick(lo, hi + (g.allow_none ? 1 : 0));
      std::int64_t v = pick(rng);
      if (v > hi) return Value::none();
      return Value(v);
    }
    case GeneType::Float: {
      std::uniform_real_distribution<double> pick(g.low, g.high);
      return Value(pick(rng));
    }
  }
  return Value::none();
}

Chromosome random_chromosome(Kind kind, std::mt19937_64& rng) {
  Chromosome c;
  c.kind = kind;
  for (const auto& g : gene_pool(kind)) c.genes.push_back(sample_gene(g, rng));
  return c;
}

}  // namespace

std::vector<Chromosome> init_population(Kind kind, const GAConfig& cfg) {
  if (cfg.population_size < 4)
    throw OptimizeError("population size must be at least 4");
  std::mt19937_64 rng(cfg.seed);
  std::vector<Chromosome> pop;
  pop.reserve(cfg.population_size);
  pop.push_back(default_chromosome(kind));
  while (pop.size() < static_cast<std::size_t>(cfg.population_size))
    pop.push_back(random_chromosome(kind, rng));
  return pop;
}

double fitness(const Chromosome& c, const dataset::LabeledDataset& ds,
               const GAConfig& cfg, std::vector<std::string>* diagnostics) {
  try {
    auto spec = c.to_spec();
    classifiers::validate_spec(spec);
    auto report =
        metrics::cross_validate(spec, ds, cfg.cv_folds, cfg.seed, cfg.parallelism);
    return report.mean.f1;
  } catch (const std::exception& e) {
    if (diagnostics)
      diagnostics->push_back(c.repr() + " scored 0: " + e.what());
    return 0.0;
  }
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& parent1,
                                            const Chromosome& parent2) {
  if (parent1.kind != parent2.kind || parent1.genes.size() != parent2.genes.size())
    throw KindMismatch();
  std::size_t cut = parent1.genes.size() / 2;
  Chromosome off1 = parent1, off2 = parent2;
  for (std::size_t i = cut; i < parent1.genes.size(); ++i) {
    off1.genes[i] = parent2.genes[i];
    off2.genes[i] = parent1.genes[i];
  }
  return {off1, off2};
}

std::vector<Chromosome> refill(const Chromosome& offspring1,
                               const Chromosome& offspring2, const GAConfig& cfg,
                               std::mt19937_64& rng) {
  int p = cfg.population_size;
  std::vector<Chromosome> pop;
  pop.reserve(p);
  for (int i = 0; i < p; ++i) {
    if (i < p / 4)
      pop.push_back(offspring1);
    else if (i < p / 2)
      pop.push_back(offspring2);
    else
      pop.push_back(random_chromosome(offspring1.kind, rng));
  }
  return pop;
}

Chromosome mutate(const Chromosome& c, std::mt19937_64& rng) {
  const auto& pool = gene_pool(c.kind);
  Chromosome out = c;
  if (pool.empty()) return out;  // nothing to search over
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::size_t i = pick(rng);
  out.genes[i] = sample_gene(pool[i], rng);
  return out;
}

SearchResult run_ga(Kind kind, const FitnessFn& fn, const GAConfig& cfg) {
  if (cfg.population_size < 4)
    throw OptimizeError("population size must be at least 4");
  if (cfg.generation_limit < 1)
    throw OptimizeError("generation limit must be at least 1");

  SearchResult result;
  std::unordered_map<std::string, double> cache;
  auto evaluate = [&](const Chromosome& c) {
    auto [it, fresh] = cache.try_emplace(c.repr(), 0.0);
    if (fresh) {
      it->second = fn(c);
      ++result.evaluations;
    }
    return it->second;
  };

  std::mt19937_64 rng(cfg.seed);
  std::vector<Chromosome> pop;
  pop.reserve(cfg.population_size);
  pop.push_back(default_chromosome(kind));
  while (pop.size() < static_cast<std::size_t>(cfg.population_size))
    pop.push_back(random_chromosome(kind, rng));

  for (int gen = 0; gen < cfg.generation_limit; ++gen) {
    std::vector<double> fit(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = evaluate(pop[i]);

    // Top-2 by fitness, ties to the lower population index.
    std::size_t best = 0, second = 1;
    if (fit[second] > fit[best]) std::swap(best, second);
    for (std::size_t i = 2; i < pop.size(); ++i) {
      if (fit[i] > fit[best]) {
        second = best;
        best = i;
      } else if (fit[i] > fit[second]) {
        second = i;
      }
    }
    result.history.push_back({gen, pop[best], fit[best]});

    if (gen + 1 == cfg.generation_limit) break;
    auto [off1, off2] = crossover(pop[best], pop[second]);
    pop = refill(off1, off2, cfg, rng);
    for (auto& c : pop) c = mutate(c, rng);
  }

  const GenerationRecord* top = &result.history.front();
  for (const auto& rec : result.history)
    if (rec.fitness > top->fitness) top = &rec;
  result.best = top->fittest;
  result.best_fitness = top->fitness;
  return result;
}

SearchResult run_ga(Kind kind, const dataset::LabeledDataset& ds,
                    const GAConfig& cfg) {
  std::vector<std::string> diagnostics;
  auto result = run_ga(
      kind, [&](const Chromosome& c) { return fitness(c, ds, cfg, &diagnostics); },
      cfg);
  result.diagnostics = std::move(diagnostics);
  return result;
}

std::uint64_t grid_combinations(
    const std::map<std::string, std::vector<Value>>& grid) {
  std::uint64_t combos = 1;
  for (const auto& [name, values] : grid) {
    if (values.empty())
      throw OptimizeError("empty value list for grid axis '" + name + "'");
    if (combos > (1ull << 60) / values.size())
      throw OptimizeError("grid size overflows");
    combos *= values.size();
  }
  return combos;
}

SearchResult grid_search(Kind kind,
                         const std::map<std::string, std::vector<Value>>& grid,
                         const dataset::LabeledDataset& ds, const GAConfig& cfg,
                         std::uint64_t cap) {
  const auto& pool = gene_pool(kind);
  // Grid axes must name pool genes and stay within their domains.
  std::vector<std::size_t> axes;          // pool index per grid axis
  std::vector<const std::vector<Value>*> values;
  for (const auto& [name, vals] : grid) {
    auto it = std::find_if(pool.begin(), pool.end(),
                           [&](const GeneSpec& g) { return g.name == name; });
    if (it == pool.end())
      throw OptimizeError("grid axis '" + name + "' is not a searchable gene of " +
                          classifiers::to_string(kind));
    for (const auto& v : vals)
      if (!it->contains(v))
        throw OptimizeError("grid value " + v.repr() + " outside domain of '" +
                            name + "'");
    axes.push_back(static_cast<std::size_t>(it - pool.begin()));
    values.push_back(&vals);
  }

  std::uint64_t combos = grid_combinations(grid);
  if (combos > cap) throw GridTooLarge(combos, cap);

  SearchResult result;
  result.best_fitness = -1.0;
  std::vector<std::size_t> idx(axes.size(), 0);
  std::vector<std::string> diagnostics;
  for (std::uint64_t n = 0; n < combos; ++n) {
    Chromosome c = default_chromosome(kind);
    for (std::size_t a = 0; a < axes.size(); ++a)
      c.genes[axes[a]] = (*values[a])[idx[a]];
    double f = fitness(c, ds, cfg, &diagnostics);
    ++result.evaluations;
    result.table.emplace_back(c, f);
    if (f > result.best_fitness) {
      result.best_fitness = f;
      result.best = c;
    }
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++idx[a] < values[a]->size()) break;
      idx[a] = 0;
    }
  }
  result.diagnostics = std::move(diagnostics);
  return result;
}

std::map<std::string, std::vector<Value>> preset_grid(Kind kind) {
  std::map<std::string, std::vector<Value>> grid;
  auto int_range = [](std::int64_t lo, std::int64_t hi, std::int64_t step) {
    std::vector<Value> v;
    for (std::int64_t i = lo; i <= hi; i += step) v.emplace_back(i);
    return v;
  };
  switch (kind) {
    case Kind::DecisionTree: {
      grid["criterion"] = {Value("gini"), Value("entropy")};
      grid["splitter"] = {Value("best"), Value("random")};
      grid["min_samples_split"] = int_range(2, 5, 1);
      grid["min_samples_leaf"] = int_range(1, 4, 1);
      std::vector<Value> mwfl;
      for (int i = 0; i <= 10; ++i) mwfl.emplace_back(i / 100.0);
      grid["min_weight_fraction_leaf"] = mwfl;
      grid["class_weight"] = {Value("balanced"), Value::none()};
      break;
    }
    case Kind::RandomForest: {
      grid["n_estimators"] = int_range(10, 180, 10);
      grid["criterion"] = {Value("gini"), Value("entropy")};
      grid["min_samples_split"] = int_range(2, 5, 1);
      grid["min_samples_leaf"] = int_range(1, 4, 1);
      grid["min_weight_fraction_leaf"] = {Value(0.0), Value(0.05), Value(0.1)};
      grid["class_weight"] = {Value("balanced"), Value::none()};
      break;
    }
    default:
      throw OptimizeError(std::string("no preset grid for ") +
                          classifiers::to_string(kind));
  }
  return grid;
}

SearchResult random_search(Kind kind, int n_iter,
                           const dataset::LabeledDataset& ds, const GAConfig& cfg) {
  if (n_iter < 1) throw OptimizeError("n_iter must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  SearchResult result;
  result.best_fitness = -1.0;
  std::vector<std::string> diagnostics;
  for (int n = 0; n < n_iter; ++n) {
    Chromosome c = n == 0 ? default_chromosome(kind) : random_chromosome(kind, rng);
    double f = fitness(c, ds, cfg, &diagnostics);
    ++result.evaluations;
    result.table.emplace_back(c, f);
    if (f > result.best_fitness) {
      result.best_fitness = f;
      result.best = c;
    }
  }
  result.diagnostics = std::move(diagnostics);
  return result;
}

std::string history_rows(const SearchResult& result) {
  std::string out = "generation\tbest_fitness\tbest_genes\n";
  char buf[64];
  for (const auto& rec : result.history) {
    std::snprintf(buf, sizeof(buf), "%d\t%.6f\t", rec.generation, rec.fitness);
    out += buf;
    out += rec.fittest.repr();
    out += '\n';
  }
  return out;
}

}  // namespace flowhawk::optimize
