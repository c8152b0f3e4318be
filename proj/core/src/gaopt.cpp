#include "risd2d/gaopt.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "risd2d/montecarlo.hpp"

namespace risd2d {

namespace {

constexpr std::uint64_t kGaStream = 0x4741ull;            // "GA"
constexpr std::uint64_t kRandomSearchStream = 0x5253ull;  // "RS"

}  // namespace

void GaParams::validate() const {
  if (population < 2) throw std::invalid_argument("ga: population must be >= 2");
  if (parents < 0 || parents > population) {
    throw std::invalid_argument("ga: parents must lie in [0, population]");
  }
  if (mutants < 0 || mutants > population) {
    throw std::invalid_argument("ga: mutants must lie in [0, population]");
  }
  if (max_iters < 1) throw std::invalid_argument("ga: max_iters must be >= 1");
}

void repair(Chromosome& ch, const GaProblem& problem) {
  const double p_max = problem.budget.p_max;
  for (double& p : ch.p) {
    if (!(p > 0.0)) p = std::numeric_limits<double>::min();
    p = std::min(p, p_max);
  }
  const double total = std::accumulate(ch.p.begin(), ch.p.end(), 0.0);
  const double cap = problem.budget.transmit_budget;
  if (total > cap * (1.0 + 1e-12)) {
    const double scale = cap / total;
    for (double& p : ch.p) p *= scale;
  }
  const int levels = problem.ris.phase_levels();
  for (int& t : ch.theta) t = ((t % levels) + levels) % levels;
}

bool feasible(const Chromosome& ch, const GaProblem& problem) {
  if (static_cast<int>(ch.p.size()) != problem.pairs() ||
      static_cast<int>(ch.theta.size()) != problem.elements()) {
    return false;
  }
  const double p_max = problem.budget.p_max;
  double total = 0.0;
  for (double p : ch.p) {
    if (!(p > 0.0) || p > p_max * (1.0 + 1e-12)) return false;
    total += p;
  }
  if (total > problem.budget.transmit_budget * (1.0 + 1e-12)) return false;
  const int levels = problem.ris.phase_levels();
  return std::all_of(ch.theta.begin(), ch.theta.end(),
                     [levels](int t) { return t >= 0 && t < levels; });
}

PowerAllocation allocation_for(const Chromosome& ch, const GaProblem& problem) {
  PowerAllocation a = problem.budget;
  a.p = ch.p;
  return a;
}

RisState ris_for(const Chromosome& ch, const GaProblem& problem) {
  RisState r = problem.ris;
  r.theta = phases_from_indices(ch.theta, r.bits);
  return r;
}

double sum_rate(const Chromosome& ch, const GaProblem& problem) {
  return ergodic_rate(allocation_for(ch, problem), *problem.csi, ris_for(ch, problem))
      .sum;
}

double fitness(const Chromosome& ch, const GaProblem& problem) {
  if (!feasible(ch, problem)) {
    throw std::invalid_argument("fitness: chromosome violates the constraints");
  }
  const double rate = sum_rate(ch, problem);
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

Chromosome equal_power_chromosome(const GaProblem& problem) {
  Chromosome ch;
  const int k = problem.pairs();
  ch.p.assign(k, std::min(problem.budget.transmit_budget / k, problem.budget.p_max));
  ch.theta.assign(problem.elements(), 0);
  return ch;
}

Chromosome random_chromosome(const GaProblem& problem, RngStream& rng,
                             bool optimize_power) {
  Chromosome ch = equal_power_chromosome(problem);
  if (optimize_power) {
    for (double& p : ch.p) p = problem.budget.p_max * (1.0 - rng.uniform());
  }
  const auto levels = static_cast<std::uint64_t>(problem.ris.phase_levels());
  for (int& t : ch.theta) t = static_cast<int>(rng.uniform_index(levels));
  repair(ch, problem);
  return ch;
}

std::vector<std::size_t> roulette_select(std::span<const double> weights,
                                         std::size_t count, RngStream& rng,
                                         std::optional<std::size_t> excluded) {
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  std::size_t eligible = 0;
  for (std::size_t s = 0; s < weights.size(); ++s) {
    const bool skip = excluded && *excluded == s;
    const double w = skip || !(weights[s] > 0.0) || std::isinf(weights[s]) ? 0.0 : weights[s];
    if (!skip) ++eligible;
    total += w;
    cumulative[s] = total;
  }
  if (eligible == 0) throw std::invalid_argument("roulette_select: nothing to select");

  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    if (total > 0.0) {
      const double x = rng.uniform() * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
      std::size_t s = static_cast<std::size_t>(it - cumulative.begin());
      s = std::min(s, weights.size() - 1);
      // upper_bound can land on a zero-width slot only through rounding at
      // the top end; walk back to the last slot with positive width.
      while (s > 0 && cumulative[s] == cumulative[s - 1]) --s;
      out.push_back(s);
    } else {
      std::size_t s;
      do {
        s = static_cast<std::size_t>(rng.uniform_index(weights.size()));
      } while (excluded && *excluded == s);
      out.push_back(s);
    }
  }
  return out;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            std::size_t cut) {
  if (a.p.size() != b.p.size() || a.theta.size() != b.theta.size()) {
    throw std::invalid_argument("crossover: parents differ in shape");
  }
  const std::size_t k = a.p.size();
  if (cut < 1 || cut > a.genes()) {
    throw std::invalid_argument("crossover: cut must lie in [1, K + N]");
  }
  Chromosome c1 = a;
  Chromosome c2 = b;
  for (std::size_t g = cut; g < a.genes(); ++g) {
    if (g < k) {
      std::swap(c1.p[g], c2.p[g]);
    } else {
      std::swap(c1.theta[g - k], c2.theta[g - k]);
    }
  }
  return {std::move(c1), std::move(c2)};
}

Chromosome mutate(Chromosome ch, RngStream& rng, const GaProblem& problem,
                  bool optimize_power) {
  if (optimize_power && !ch.p.empty()) {
    const auto i = rng.uniform_index(ch.p.size());
    ch.p[i] = problem.budget.p_max * (1.0 - rng.uniform());
  }
  if (!ch.theta.empty()) {
    const auto n = rng.uniform_index(ch.theta.size());
    ch.theta[n] = static_cast<int>(
        rng.uniform_index(static_cast<std::uint64_t>(problem.ris.phase_levels())));
  }
  repair(ch, problem);
  return ch;
}

GaResult evolve(const GaProblem& problem, const GaParams& params) {
  params.validate();
  RngStream rng(params.seed, kGaStream);
  const std::size_t pop = static_cast<std::size_t>(params.population);

  std::vector<Chromosome> population;
  population.reserve(pop);
  population.push_back(equal_power_chromosome(problem));
  if (params.optimize_power && params.seed_single_pair) {
    const double p_max = problem.budget.p_max;
    for (int k = 0; k < problem.pairs() && population.size() < pop; ++k) {
      Chromosome ch = random_chromosome(problem, rng, false);
      std::fill(ch.p.begin(), ch.p.end(), kIdlePowerRatio * p_max);
      ch.p[k] = p_max;
      repair(ch, problem);
      population.push_back(std::move(ch));
    }
  }
  while (population.size() < pop) {
    population.push_back(random_chromosome(problem, rng, params.optimize_power));
  }
  std::vector<double> fit(pop, 0.0);
  std::vector<char> known(pop, 0);

  GaResult result;
  std::size_t elite = 0;
  for (int t = 0; t < params.max_iters; ++t) {
    std::vector<std::size_t> pending;
    for (std::size_t s = 0; s < pop; ++s) {
      if (!known[s]) pending.push_back(s);
    }
    parallel_for(pending.size(), params.workers, [&](std::size_t k) {
      fit[pending[k]] = fitness(population[pending[k]], problem);
    });
    result.evaluations += pending.size();
    std::fill(known.begin(), known.end(), 1);

    elite = static_cast<std::size_t>(
        std::min_element(fit.begin(), fit.end()) - fit.begin());
    result.history.push_back(fit[elite]);
    if (fit[elite] <= params.target_fitness) {
      result.reached_target = true;
      break;
    }
    if (t + 1 == params.max_iters) break;

    std::vector<double> weights(pop);
    for (std::size_t s = 0; s < pop; ++s) weights[s] = 1.0 / fit[s];
    const auto chosen = roulette_select(weights, static_cast<std::size_t>(params.parents),
                                        rng, elite);

    std::vector<Chromosome> next;
    next.reserve(pop);
    next.push_back(population[elite]);
    std::vector<double> next_fit{fit[elite]};
    for (std::size_t c = 0; c < chosen.size() && next.size() < pop; c += 2) {
      const Chromosome& a = population[chosen[c]];
      if (c + 1 == chosen.size()) {
        next.push_back(a);
        break;
      }
      const Chromosome& b = population[chosen[c + 1]];
      const auto cut = 1 + static_cast<std::size_t>(rng.uniform_index(a.genes()));
      auto [c1, c2] = crossover(a, b, cut);
      repair(c1, problem);
      repair(c2, problem);
      next.push_back(std::move(c1));
      if (next.size() < pop) next.push_back(std::move(c2));
    }
    const std::size_t first_refill = next.size();
    while (next.size() < pop) next.push_back(population[elite]);

    // Mutants are drawn from the non-elite slots without replacement.
    std::vector<std::size_t> slots(pop - 1);
    std::iota(slots.begin(), slots.end(), std::size_t{1});
    const std::size_t mutants = std::min<std::size_t>(params.mutants, slots.size());
    for (std::size_t m = 0; m < mutants; ++m) {
      const auto pick = m + static_cast<std::size_t>(rng.uniform_index(slots.size() - m));
      std::swap(slots[m], slots[pick]);
      next[slots[m]] = mutate(std::move(next[slots[m]]), rng, problem,
                              params.optimize_power);
    }

    population = std::move(next);
    std::fill(known.begin(), known.end(), 0);
    fit.assign(pop, 0.0);
    fit[0] = next_fit[0];
    known[0] = 1;
    for (std::size_t s = first_refill; s < pop; ++s) {
      if (population[s] == population[0]) {
        fit[s] = fit[0];
        known[s] = 1;
      }
    }
  }

  result.best = population[elite];
  result.best_fitness = fit[elite];
  return result;
}

GaResult random_search(const GaProblem& problem, std::size_t evaluations,
                       std::uint64_t seed, bool optimize_power) {
  if (evaluations < 1) throw std::invalid_argument("random_search: need >= 1 evaluation");
  RngStream rng(seed, kRandomSearchStream);
  GaResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < evaluations; ++e) {
    Chromosome ch = random_chromosome(problem, rng, optimize_power);
    const double f = fitness(ch, problem);
    if (f < result.best_fitness || e == 0) {
      result.best_fitness = f;
      result.best = std::move(ch);
    }
    result.history.push_back(result.best_fitness);
  }
  result.evaluations = evaluations;
  return result;
}

}  // namespace risd2d
