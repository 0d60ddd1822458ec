#pragma once

#include <cmath>
#include <cstddef>

#include "aisets/rng.hpp"

namespace aisets {

struct AnnealSchedule {
  std::size_t steps = 20000;
  double initial_temperature = 1.0;
  double final_temperature = 1e-4;

  /// Geometric cooling from initial to final temperature.
  double temperature(std::size_t step) const {
    if (steps <= 1) return final_temperature;
    const double frac = static_cast<double>(step) / static_cast<double>(steps - 1);
    return initial_temperature * std::pow(final_temperature / initial_temperature, frac);
  }
};

template <typename State>
struct AnnealResult {
  State best;
  double best_cost;
  std::size_t accepted = 0;
};

/// Minimizes `cost` by simulated annealing. `neighbor(state, rng)` returns
/// a perturbed copy. The best state ever visited is returned.
template <typename State, typename CostFn, typename NeighborFn>
AnnealResult<State> anneal(State current, const CostFn& cost, const NeighborFn& neighbor,
                           const AnnealSchedule& schedule, Rng& rng) {
  double current_cost = cost(current);
  AnnealResult<State> result{current, current_cost, 0};
  for (std::size_t step = 0; step < schedule.steps; ++step) {
    State next = neighbor(current, rng);
    const double next_cost = cost(next);
    const double delta = next_cost - current_cost;
    if (delta <= 0.0 || std::exp(-delta / schedule.temperature(step)) > uniform01(rng)) {
      current = std::move(next);
      current_cost = next_cost;
      ++result.accepted;
      if (current_cost < result.best_cost) {
        result.best = current;
        result.best_cost = current_cost;
      }
    }
  }
  return result;
}

}  // namespace aisets
