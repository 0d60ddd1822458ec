#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aisets/density.hpp"

namespace aisets {

/// Ergodic rate pair of one scheme at one power, in bits per channel use,
/// from Gaussian-signalling SINR expressions averaged over channel trials.
struct RatePoint {
  std::string scheme;
  double power = 0.0;
  double alpha = 0.0;
  int feedback_bits = 0;
  double r1 = 0.0;
  double r2 = 0.0;
  double residual_power = 0.0;  // mean interference power left at user 2
  std::size_t trials = 0;

  double sum() const { return r1 + r2; }
  /// Rates must be nonnegative and at most (1/2) log2(1 + P M^2).
  void validate(double bound) const;
};

/// Zero-forcing with B = ceil((alpha/2) log2 P) bits of uniformly quantized
/// feedback on the canonical two-user channel. User 1's beam is orthogonal
/// to [1, G_hat], G_hat the midpoint of the feedback cell; user 2's symbol
/// rides the second antenna. Half the power goes to each user and residual
/// interference is treated as noise. Trial t always draws the same G for
/// a given seed, so curves over P use common random numbers.
RatePoint zf_quantized_feedback(double power, double alpha, const ChannelDensity& prior,
                                std::size_t trials, std::uint64_t seed, int threads = 1);

/// Two-slot blind interference alignment for the PN setting: user 1's
/// channel changes between the slots and is known, user 2's is constant
/// and unknown. User 2's symbol is sent only in slot 1, along the null
/// space of user 1's slot-1 channel; user 2 subtracts the two slots.
/// Channel entries are drawn uniformly on [1/M, M]; draws whose 2x2 matrix
/// leaves the admissible determinant range, or whose slot matrix for user
/// 1 is singular, are redrawn.
RatePoint blind_ia_pn(double power, std::size_t trials, std::uint64_t seed, double bound = 4.0,
                      int threads = 1);

/// Exact interference coefficient left after user 2's difference combiner,
/// for one channel draw; zero in floating point, not just approximately.
double blind_ia_interference_coefficient(std::span<const double> user2_channel);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of R against (1/2) log2 P with a 95% interval.
/// Needs at least four points spanning at least four decades of P.
SlopeFit slope_fit(std::span<const double> powers, std::span<const double> rates);

/// Least-squares exponent e in value ~ P^e (log-log regression), same
/// data requirements as slope_fit.
SlopeFit exponent_fit(std::span<const double> powers, std::span<const double> values);

struct SchemeSummary {
  SlopeFit d1;
  SlopeFit d2;
  SlopeFit sum;
  SlopeFit residual_exponent;  // only meaningful for zero-forcing
};

SchemeSummary summarize(std::span<const RatePoint> curve);

/// Powers 10^lo, ..., 10^hi in steps of `step` decades.
std::vector<double> power_grid(double lo_decade, double hi_decade, double step);

}  // namespace aisets
