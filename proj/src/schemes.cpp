#include "aisets/schemes.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "aisets/error.hpp"
#include "aisets/parallel.hpp"
#include "aisets/rng.hpp"

namespace aisets {

void RatePoint::validate(double bound) const {
  const double cap = 0.5 * std::log2(1.0 + power * bound * bound);
  if (!(r1 >= 0.0 && r2 >= 0.0)) {
    throw Error(ErrorKind::BoundViolation, scheme + ": negative rate");
  }
  if (r1 > cap || r2 > cap) {
    throw Error(ErrorKind::BoundViolation, scheme + ": rate above the single-user cap");
  }
}

namespace {

struct TrialRates {
  double r1 = 0.0;
  double r2 = 0.0;
  double residual = 0.0;
};

// Sums per-trial results in index order so the total is independent of
// the worker count.
TrialRates average(const std::vector<TrialRates>& trials) {
  TrialRates mean;
  for (const TrialRates& t : trials) {
    mean.r1 += t.r1;
    mean.r2 += t.r2;
    mean.residual += t.residual;
  }
  const auto n = static_cast<double>(trials.size());
  mean.r1 /= n;
  mean.r2 /= n;
  mean.residual /= n;
  return mean;
}

double uniform_between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace

RatePoint zf_quantized_feedback(double power, double alpha, const ChannelDensity& prior,
                                std::size_t trials, std::uint64_t seed, int threads) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha outside [0, 1]");
  if (!(power > 1.0)) throw Error(ErrorKind::InvalidArgument, "power must exceed 1");
  if (trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be positive");
  const int bits = static_cast<int>(std::ceil(0.5 * alpha * std::log2(power) - 1e-12));
  const double p1 = 0.5 * power;
  const double p2 = 0.5 * power;

  const auto results = parallel_map(trials, threads, [&](std::size_t trial) {
    Rng rng = make_stream(seed, trial);
    const double g = prior.sample(rng);
    const double g_hat = quantization_cell(prior.lo(), prior.hi(), g, bits).midpoint();
    const double beam_norm = 1.0 + g_hat * g_hat;
    TrialRates rates;
    rates.residual = p1 * (g - g_hat) * (g - g_hat) / beam_norm;
    rates.r1 = 0.5 * std::log2(1.0 + p1 / beam_norm);
    rates.r2 = 0.5 * std::log2(1.0 + p2 / (1.0 + rates.residual));
    return rates;
  });
  const TrialRates mean = average(results);

  RatePoint point;
  point.scheme = "zf-quantized-feedback";
  point.power = power;
  point.alpha = alpha;
  point.feedback_bits = bits;
  point.r1 = mean.r1;
  point.r2 = mean.r2;
  point.residual_power = mean.residual;
  point.trials = trials;
  return point;
}

double blind_ia_interference_coefficient(std::span<const double> user2_channel) {
  // The combiner weights slot 1 by +1 and slot 2 by -1; user 1's symbols
  // reach user 2 through h2 in both slots.
  double energy = 0.0;
  for (double h : user2_channel) {
    const double residual = h - h;
    energy += residual * residual;
  }
  return energy;
}

RatePoint blind_ia_pn(double power, std::size_t trials, std::uint64_t seed, double bound,
                      int threads) {
  if (!(power > 1.0)) throw Error(ErrorKind::InvalidArgument, "power must exceed 1");
  if (!(bound > 1.0)) throw Error(ErrorKind::InvalidArgument, "M must exceed 1");
  if (trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be positive");
  const double pa = 0.25 * power;  // each of user 1's two symbols
  const double pb = power;         // user 2's symbol, slot 1 only
  const double lo = 1.0 / bound;

  const auto results = parallel_map(trials, threads, [&](std::size_t trial) {
    Rng rng = make_stream(seed, trial);
    auto draw_entry = [&] { return uniform_between(rng, lo, bound); };
    auto admissible = [&](const Eigen::Vector2d& h1, const Eigen::Vector2d& h2) {
      Eigen::Matrix2d g;
      g.row(0) = h1.transpose();
      g.row(1) = h2.transpose();
      const double det = std::abs(g.determinant());
      return det >= lo && det <= bound;
    };
    Eigen::Vector2d h2;
    std::array<Eigen::Vector2d, 2> h1;
    for (;;) {
      h2 = {draw_entry(), draw_entry()};
      h1[0] = {draw_entry(), draw_entry()};
      h1[1] = {draw_entry(), draw_entry()};
      if (!admissible(h1[0], h2) || !admissible(h1[1], h2)) continue;
      Eigen::Matrix2d slots;
      slots.row(0) = h1[0].transpose();
      slots.row(1) = h1[1].transpose();
      if (std::abs(slots.determinant()) > 1e-12) break;
    }
    Eigen::Matrix2d slots;
    slots.row(0) = h1[0].transpose();
    slots.row(1) = h1[1].transpose();
    const Eigen::Vector2d null_beam = Eigen::Vector2d(-h1[0](1), h1[0](0)).normalized();

    TrialRates rates;
    const Eigen::Matrix2d gram = Eigen::Matrix2d::Identity() + pa * slots * slots.transpose();
    rates.r1 = 0.25 * std::log2(gram.determinant());
    const double gain = h2.dot(null_beam);
    rates.r2 = 0.25 * std::log2(1.0 + gain * gain * pb / 2.0);
    const std::array<double, 2> h2_entries{h2(0), h2(1)};
    rates.residual = pa * blind_ia_interference_coefficient(h2_entries);
    return rates;
  });
  const TrialRates mean = average(results);

  RatePoint point;
  point.scheme = "blind-ia-pn";
  point.power = power;
  point.alpha = 0.0;
  point.r1 = mean.r1;
  point.r2 = mean.r2;
  point.residual_power = mean.residual;
  point.trials = trials;
  return point;
}

namespace {

// Two-sided 95% Student-t quantiles for 1..30 degrees of freedom.
double t_quantile_95(std::size_t dof) {
  static constexpr std::array<double, 30> table{
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return std::numeric_limits<double>::infinity();
  return dof <= table.size() ? table[dof - 1] : 1.96;
}

SlopeFit regress(std::span<const double> powers, std::span<const double> values,
                 double (*regressor)(double), double (*response)(double)) {
  if (powers.size() != values.size()) {
    throw Error(ErrorKind::InvalidArgument, "powers and values differ in length");
  }
  if (powers.size() < 4) throw Error(ErrorKind::InsufficientData, "slope fit needs >= 4 points");
  double lo = powers[0];
  double hi = powers[0];
  for (double p : powers) {
    if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "powers must be positive");
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  if (std::log10(hi / lo) < 4.0 - 1e-9) {
    throw Error(ErrorKind::InsufficientData, "slope fit needs powers spanning >= 4 decades");
  }
  const auto n = static_cast<Eigen::Index>(powers.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = regressor(powers[i]);
    target(i) = response(values[i]);
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(target);
  const double rss = (design * beta - target).squaredNorm();
  const auto dof = static_cast<std::size_t>(n - 2);
  const double sigma2 = rss / static_cast<double>(dof);
  const Eigen::Matrix2d covariance = sigma2 * (design.transpose() * design).inverse();

  SlopeFit fit;
  fit.intercept = beta(0);
  fit.slope = beta(1);
  fit.stderr_slope = std::sqrt(std::max(0.0, covariance(1, 1)));
  const double half = t_quantile_95(dof) * fit.stderr_slope;
  fit.ci_low = fit.slope - half;
  fit.ci_high = fit.slope + half;
  fit.points = powers.size();
  return fit;
}

double half_log2(double p) { return 0.5 * std::log2(p); }
double log2_value(double v) {
  if (!(v > 0.0)) throw Error(ErrorKind::InvalidArgument, "exponent fit needs positive values");
  return std::log2(v);
}
double log2_power(double p) { return std::log2(p); }
double identity(double v) { return v; }

}  // namespace

SlopeFit slope_fit(std::span<const double> powers, std::span<const double> rates) {
  return regress(powers, rates, half_log2, identity);
}

SlopeFit exponent_fit(std::span<const double> powers, std::span<const double> values) {
  return regress(powers, values, log2_power, log2_value);
}

SchemeSummary summarize(std::span<const RatePoint> curve) {
  std::vector<double> powers;
  std::vector<double> r1;
  std::vector<double> r2;
  std::vector<double> sum;
  std::vector<double> residual;
  bool has_residual = true;
  for (const RatePoint& point : curve) {
    powers.push_back(point.power);
    r1.push_back(point.r1);
    r2.push_back(point.r2);
    sum.push_back(point.sum());
    residual.push_back(point.residual_power);
    has_residual = has_residual && point.residual_power > 0.0;
  }
  SchemeSummary summary;
  summary.d1 = slope_fit(powers, r1);
  summary.d2 = slope_fit(powers, r2);
  summary.sum = slope_fit(powers, sum);
  if (has_residual) summary.residual_exponent = exponent_fit(powers, residual);
  return summary;
}

std::vector<double> power_grid(double lo_decade, double hi_decade, double step) {
  if (!(step > 0.0) || !(hi_decade >= lo_decade)) {
    throw Error(ErrorKind::InvalidArgument, "power grid needs lo <= hi and a positive step");
  }
  std::vector<double> grid;
  const auto count = static_cast<int>(std::floor((hi_decade - lo_decade) / step + 1e-9));
  for (int i = 0; i <= count; ++i) grid.push_back(std::pow(10.0, lo_decade + i * step));
  return grid;
}

}  // namespace aisets
