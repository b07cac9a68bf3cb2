#include "lstmabc/abc.hpp"

#include <algorithm>
#include <fstream>

#include "lstmabc/parallel.hpp"
#include "lstmabc/trainer.hpp"

namespace lstmabc::abc {

void AbcConfig::validate() const {
  if (populationSize < 2) throw ArgumentError("abc: populationSize must be >= 2");
  if (dimension == 0) throw ArgumentError("abc: dimension must be >= 1");
  if (!(lower < upper)) throw ArgumentError("abc: lower bound must be < upper bound");
  if (maxEvaluations < populationSize)
    throw ArgumentError("abc: maxEvaluations must be >= populationSize");
}

namespace {

std::vector<double> evaluateAll(const std::vector<num::Vec>& candidates, const FitnessFn& fn,
                                unsigned threads) {
  std::vector<double> fits(candidates.size());
  parallelFor(candidates.size(), threads,
              [&](std::size_t i) { fits[i] = fn(candidates[i]); });
  return fits;
}

num::Vec freshSource(const AbcConfig& cfg, num::Rng& rng) {
  num::Vec pos(cfg.dimension);
  for (auto& x : pos) x = rng.uniform(cfg.lower, cfg.upper);
  return pos;
}

}  // namespace

std::vector<FoodSource> initPopulation(const AbcConfig& cfg, const FitnessFn& fn, num::Rng& rng) {
  std::vector<num::Vec> positions(cfg.populationSize);
  for (auto& p : positions) p = freshSource(cfg, rng);
  const auto fits = evaluateAll(positions, fn, cfg.threads);
  std::vector<FoodSource> population(cfg.populationSize);
  for (std::size_t i = 0; i < population.size(); ++i)
    population[i] = {std::move(positions[i]), fits[i], 0};
  return population;
}

num::Vec mutateWith(const std::vector<FoodSource>& population, std::size_t i, std::size_t dim,
                    std::size_t partner, double phi, const AbcConfig& cfg) {
  num::Vec candidate = population[i].position;
  const double moved =
      candidate[dim] + phi * (candidate[dim] - population[partner].position[dim]);
  candidate[dim] = std::clamp(moved, cfg.lower, cfg.upper);
  return candidate;
}

num::Vec mutate(const std::vector<FoodSource>& population, std::size_t i, const AbcConfig& cfg,
                num::Rng& rng) {
  if (population.size() < 2) throw ArgumentError("mutate: population must have >= 2 sources");
  const std::size_t dim = rng.index(cfg.dimension);
  std::size_t partner = rng.index(population.size() - 1);
  if (partner >= i) ++partner;
  const double phi = rng.uniform(-1.0, 1.0);
  return mutateWith(population, i, dim, partner, phi, cfg);
}

num::Vec onlookerProbabilities(const std::vector<FoodSource>& population) {
  double sum = 0.0;
  for (const auto& s : population) {
    if (!(s.fitness > 0.0)) throw ArgumentError("onlookerProbabilities: fitness must be > 0");
    sum += s.fitness;
  }
  num::Vec probs(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) probs[i] = population[i].fitness / sum;
  return probs;
}

std::size_t rouletteSelect(const num::Vec& probabilities, num::Rng& rng) {
  const double u = rng.u01();
  double cum = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cum += probabilities[i];
    if (u < cum) return i;
  }
  return probabilities.size() - 1;
}

std::size_t employedPhase(std::vector<FoodSource>& population, const AbcConfig& cfg,
                          const FitnessFn& fn, num::Rng& rng, std::uint64_t evalAllowance) {
  const std::size_t n =
      static_cast<std::size_t>(std::min<std::uint64_t>(population.size(), evalAllowance));
  if (n == 0) return 0;
  std::vector<num::Vec> candidates(n);
  for (std::size_t i = 0; i < n; ++i) candidates[i] = mutate(population, i, cfg, rng);
  const auto fits = evaluateAll(candidates, fn, cfg.threads);
  for (std::size_t i = 0; i < n; ++i) {
    if (fits[i] > population[i].fitness)
      population[i] = {std::move(candidates[i]), fits[i], 0};
    else
      ++population[i].trials;
  }
  return n;
}

std::size_t onlookerPhase(std::vector<FoodSource>& population, const AbcConfig& cfg,
                          const FitnessFn& fn, num::Rng& rng, std::uint64_t evalAllowance) {
  const std::size_t n =
      static_cast<std::size_t>(std::min<std::uint64_t>(population.size(), evalAllowance));
  if (n == 0) return 0;
  const num::Vec probs = onlookerProbabilities(population);
  std::vector<std::size_t> chosen(n);
  std::vector<num::Vec> candidates(n);
  for (std::size_t b = 0; b < n; ++b) {
    chosen[b] = rouletteSelect(probs, rng);
    candidates[b] = mutate(population, chosen[b], cfg, rng);
  }
  const auto fits = evaluateAll(candidates, fn, cfg.threads);
  for (std::size_t b = 0; b < n; ++b) {
    FoodSource& src = population[chosen[b]];
    if (fits[b] > src.fitness)
      src = {std::move(candidates[b]), fits[b], 0};
    else
      ++src.trials;
  }
  return n;
}

std::size_t scoutPhase(std::vector<FoodSource>& population, const AbcConfig& cfg,
                       const FitnessFn& fn, num::Rng& rng, std::uint64_t evalAllowance) {
  if (evalAllowance == 0) return 0;
  const std::size_t limit = cfg.effectiveLimit();
  std::ptrdiff_t worst = -1;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (population[i].trials <= limit) continue;
    if (worst < 0 || population[i].trials > population[static_cast<std::size_t>(worst)].trials)
      worst = static_cast<std::ptrdiff_t>(i);
  }
  if (worst < 0) return 0;
  num::Vec pos = freshSource(cfg, rng);
  const double fit = fn(pos);
  population[static_cast<std::size_t>(worst)] = {std::move(pos), fit, 0};
  return 1;
}

namespace {

void refreshBest(const std::vector<FoodSource>& population, FoodSource& best) {
  for (const auto& s : population)
    if (s.fitness > best.fitness) best = s;
}

}  // namespace

AbcResult runAbc(const AbcConfig& cfg, const FitnessFn& fn, const ProgressSink& progress) {
  cfg.validate();
  num::Rng rng(cfg.seed);
  AbcResult result;

  auto population = initPopulation(cfg, fn, rng);
  result.best = population[0];
  refreshBest(population, result.best);
  result.evaluations = cfg.populationSize;
  result.history.push_back({0, result.best.fitness, result.evaluations});
  if (progress) progress(result.history.back());

  std::size_t cycle = 1;
  while (result.evaluations < cfg.maxEvaluations) {
    result.evaluations +=
        employedPhase(population, cfg, fn, rng, cfg.maxEvaluations - result.evaluations);
    refreshBest(population, result.best);
    if (result.evaluations < cfg.maxEvaluations) {
      result.evaluations +=
          onlookerPhase(population, cfg, fn, rng, cfg.maxEvaluations - result.evaluations);
      refreshBest(population, result.best);
    }
    if (result.evaluations < cfg.maxEvaluations) {
      result.evaluations +=
          scoutPhase(population, cfg, fn, rng, cfg.maxEvaluations - result.evaluations);
      refreshBest(population, result.best);
    }
    result.history.push_back({cycle, result.best.fitness, result.evaluations});
    if (progress) progress(result.history.back());
    ++cycle;
  }
  return result;
}

model::ModelParams seedModel(const AbcConfig& cfg, const model::ArchConfig& arch,
                             const std::vector<emb::EmbeddedPair>& fitnessSet, AbcResult* result,
                             const ProgressSink& progress) {
  const std::size_t D = model::paramCount(arch);
  if (cfg.dimension != D)
    throw ArgumentError("seedModel: config dimension " + std::to_string(cfg.dimension) +
                        " does not match architecture parameter count " + std::to_string(D));
  const FitnessFn fn = [&](const num::Vec& v) { return train::fitness(v, fitnessSet, arch); };
  AbcResult r = runAbc(cfg, fn, progress);
  model::ModelParams params = model::unflatten(r.best.position, arch);
  if (result) *result = std::move(r);
  return params;
}

void saveAbcHistory(const std::vector<CycleStat>& history, const std::string& path,
                    const std::vector<std::string>& headerComments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write optimizer history file: " + path);
  for (const auto& c : headerComments) out << "# " << c << '\n';
  for (const auto& s : history)
    out << s.cycle << '\t' << fmtG17(s.bestFitness) << '\t' << s.evaluationsUsed << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace lstmabc::abc
