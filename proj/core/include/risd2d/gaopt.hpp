#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "risd2d/channel.hpp"
#include "risd2d/closedform.hpp"

namespace risd2d {

/// Candidate solution, flattened as [p_1..p_K, theta_1..theta_N].
struct Chromosome {
  std::vector<double> p;      // watts
  std::vector<int> theta;     // indices into the 2^B phase grid

  std::size_t genes() const { return p.size() + theta.size(); }
  bool operator==(const Chromosome&) const = default;
};

inline constexpr double kIdlePowerRatio = 1e-6;

struct GaParams {
  int population = 40;
  int parents = 20;
  int mutants = 8;
  int max_iters = 200;
  double target_fitness = 0.0;  // stop once the elite's fitness is <= this
  std::uint64_t seed = 1;
  bool optimize_power = true;   // false: powers stay at the equal split
  /// Add one chromosome per pair to the first generation with that pair at
  /// p_max and the others at kIdlePowerRatio * p_max (random phases).
  bool seed_single_pair = true;
  unsigned workers = 1;

  /// Throws std::invalid_argument on inconsistent sizes.
  void validate() const;
};

/// Fixed part of the optimization problem: statistics, hardware and budget.
struct GaProblem {
  const StatisticalCsi* csi = nullptr;
  RisState ris;            // theta is ignored; the chromosome supplies it
  PowerAllocation budget;  // amp_power, transmit_budget and p_max are used

  int pairs() const { return csi->pairs_count(); }
  int elements() const { return csi->elements(); }
};

/// Box (0, p_max] per gene, then proportional rescale if sum(p) exceeds the
/// transmit budget.
void repair(Chromosome& ch, const GaProblem& problem);
bool feasible(const Chromosome& ch, const GaProblem& problem);

/// Applies a chromosome to the problem's hardware and budget.
PowerAllocation allocation_for(const Chromosome& ch, const GaProblem& problem);
RisState ris_for(const Chromosome& ch, const GaProblem& problem);

/// Closed-form sum rate of the chromosome in the problem's RIS mode.
double sum_rate(const Chromosome& ch, const GaProblem& problem);

/// 1 / sum_rate; lower is better. Throws std::invalid_argument for an
/// infeasible chromosome.
double fitness(const Chromosome& ch, const GaProblem& problem);

/// Equal power split with every phase index zero.
Chromosome equal_power_chromosome(const GaProblem& problem);
Chromosome random_chromosome(const GaProblem& problem, RngStream& rng,
                             bool optimize_power = true);

/// Draws `count` indices with probability proportional to weights. The
/// excluded index (if any) never wins. If no eligible weight is positive the
/// draw is uniform over eligible indices.
std::vector<std::size_t> roulette_select(std::span<const double> weights,
                                         std::size_t count, RngStream& rng,
                                         std::optional<std::size_t> excluded = std::nullopt);

/// Single-point exchange: genes [0, cut) come from the first parent.
/// cut must lie in [1, K + N].
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            std::size_t cut);

/// Resamples one power gene uniformly on (0, p_max] (when power is optimized)
/// and one phase gene uniformly on the grid, then repairs.
Chromosome mutate(Chromosome ch, RngStream& rng, const GaProblem& problem,
                  bool optimize_power = true);

struct GaResult {
  Chromosome best;
  double best_fitness = 0.0;
  std::vector<double> history;  // elite fitness per generation
  std::size_t evaluations = 0;
  bool reached_target = false;
};

GaResult evolve(const GaProblem& problem, const GaParams& params);

/// Best of `evaluations` uniformly random feasible chromosomes.
GaResult random_search(const GaProblem& problem, std::size_t evaluations,
                       std::uint64_t seed, bool optimize_power = true);

}  // namespace risd2d
