#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lstmabc/embedding.hpp"
#include "lstmabc/model.hpp"
#include "lstmabc/numerics.hpp"

namespace lstmabc::abc {

using FitnessFn = std::function<double(const num::Vec&)>;

// One candidate solution: position in parameter space, its fitness, and the
// number of failed improvement attempts since the last success.
struct FoodSource {
  num::Vec position;
  double fitness = 0.0;
  std::size_t trials = 0;
};

struct AbcConfig {
  std::size_t populationSize = 20;
  std::size_t dimension = 0;
  double lower = -1.0;
  double upper = 1.0;
  std::size_t limit = 0;  // 0 -> populationSize * dimension
  std::uint64_t maxEvaluations = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // parallel fitness evaluation within a phase

  std::size_t effectiveLimit() const {
    return limit == 0 ? populationSize * dimension : limit;
  }
  void validate() const;
};

// N random sources drawn by x_j = lower + rand(0,1) (upper - lower), each
// evaluated once.
std::vector<FoodSource> initPopulation(const AbcConfig& cfg, const FitnessFn& fn, num::Rng& rng);

// Deterministic core of the neighbourhood move: copy x_i, shift dimension
// `dim` by phi * (x_i[dim] - x_partner[dim]), clamp to the bounds.
num::Vec mutateWith(const std::vector<FoodSource>& population, std::size_t i, std::size_t dim,
                    std::size_t partner, double phi, const AbcConfig& cfg);

// Random dimension, random partner != i, phi ~ U(-1, 1).
num::Vec mutate(const std::vector<FoodSource>& population, std::size_t i, const AbcConfig& cfg,
                num::Rng& rng);

// p_i = fit_i / sum(fit); requires every fitness > 0.
num::Vec onlookerProbabilities(const std::vector<FoodSource>& population);

std::size_t rouletteSelect(const num::Vec& probabilities, num::Rng& rng);

// Each phase generates its candidates serially (consuming the rng), evaluates
// them (possibly in parallel), then applies greedy replacement in index
// order. Returns the number of evaluations performed (<= evalAllowance).
std::size_t employedPhase(std::vector<FoodSource>& population, const AbcConfig& cfg,
                          const FitnessFn& fn, num::Rng& rng, std::uint64_t evalAllowance);
std::size_t onlookerPhase(std::vector<FoodSource>& population, const AbcConfig& cfg,
                          const FitnessFn& fn, num::Rng& rng, std::uint64_t evalAllowance);
// Re-draws the most stagnated source whose trials exceed the limit (at most
// one per cycle). Returns 0 or 1 evaluations.
std::size_t scoutPhase(std::vector<FoodSource>& population, const AbcConfig& cfg,
                       const FitnessFn& fn, num::Rng& rng, std::uint64_t evalAllowance);

struct CycleStat {
  std::size_t cycle = 0;
  double bestFitness = 0.0;
  std::uint64_t evaluationsUsed = 0;
};

struct AbcResult {
  FoodSource best;
  std::vector<CycleStat> history;  // cycle 0 is the initial population
  std::uint64_t evaluations = 0;
};

using ProgressSink = std::function<void(const CycleStat&)>;

// Employed -> onlooker -> scout cycles until exactly maxEvaluations fitness
// calls have been spent. The global best is archived separately, so scouting
// can never lose it.
AbcResult runAbc(const AbcConfig& cfg, const FitnessFn& fn, const ProgressSink& progress = {});

// Runs the search over the flattened parameter space with the similarity
// fitness and unflattens the best position.
model::ModelParams seedModel(const AbcConfig& cfg, const model::ArchConfig& arch,
                             const std::vector<emb::EmbeddedPair>& fitnessSet,
                             AbcResult* result = nullptr, const ProgressSink& progress = {});

// One line per cycle: cycle<TAB>bestFitness<TAB>evaluationsUsed.
void saveAbcHistory(const std::vector<CycleStat>& history, const std::string& path,
                    const std::vector<std::string>& headerComments = {});

}  // namespace lstmabc::abc
