#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aisets/rng.hpp"

namespace aisets {

enum class DensityFamily { Uniform, TruncatedGaussian, QuantizedPosterior };

const char* to_string(DensityFamily family);

/// Bounded density of one channel coefficient on a finite support (lo, hi).
///
/// Every family has a closed-form cdf, so interval probabilities used by the
/// alignment bounds carry no quadrature error. A quantized posterior is the
/// prior restricted and renormalized to one quantization cell; it keeps the
/// shape (flat or Gaussian) of the prior it came from.
///
/// Optionally carries the CSIT-scaling metadata (alpha, P, C) under which
/// f_max <= C * P^(alpha/2) must hold.
class ChannelDensity {
 public:
  static ChannelDensity uniform(double lo, double hi);
  static ChannelDensity truncated_gaussian(double mean, double stddev, double lo, double hi);

  /// Uniform density of peak C * P^(alpha/2) centred on `center`.
  static ChannelDensity scaled_uniform(double center, double alpha, double power,
                                       double scale = 1.0);

  /// Attach scaling metadata; throws BoundViolation if f_max exceeds
  /// scale * power^(alpha/2).
  ChannelDensity with_scaling(double alpha, double power, double scale = 1.0) const;

  DensityFamily family() const { return family_; }
  bool gaussian_shape() const { return gaussian_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mean() const { return mean_; }
  double stddev() const { return stddev_; }

  double alpha() const { return alpha_; }
  double power() const { return power_; }
  double scale() const { return scale_; }
  bool has_scaling() const { return power_ > 0.0; }

  /// Supremum of the density.
  double peak() const;
  /// max(1, peak), the constant used by the alignment bounds.
  double f_max() const;

  double pdf(double g) const;
  double cdf(double g) const;
  double quantile(double u) const;
  double interval_probability(double lo, double hi) const;
  double sample(Rng& rng) const;

  /// Throws BoundViolation unless 1/M <= lo and hi <= M.
  void check_support(double bound) const;

 private:
  friend ChannelDensity build_quantized_posterior(const ChannelDensity& prior, double true_g,
                                                  int bits);
  ChannelDensity() = default;
  double shape_mass(double a, double b) const;

  DensityFamily family_ = DensityFamily::Uniform;
  bool gaussian_ = false;
  double lo_ = 0.0;
  double hi_ = 1.0;
  double mean_ = 0.0;
  double stddev_ = 1.0;
  double norm_ = 1.0;  // Gaussian mass of [lo, hi] before renormalization
  double alpha_ = 0.0;
  double power_ = 0.0;
  double scale_ = 1.0;
};

/// Exact probability mass of [lo, hi] intersected with the support.
double interval_probability(const ChannelDensity& density, double lo, double hi);

/// Posterior after `bits` bits of uniform quantized feedback about `true_g`:
/// the support is split into 2^bits equal cells and the prior is restricted
/// to the cell containing `true_g`.
ChannelDensity build_quantized_posterior(const ChannelDensity& prior, double true_g, int bits);

/// Index and bounds of the quantization cell containing g.
struct QuantizationCell {
  std::uint64_t index = 0;
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
};

QuantizationCell quantization_cell(double lo, double hi, double g, int bits);

/// Loosely typed density description, as read from a config file. Atomic
/// laws (finite-state compound channels) can be described but never
/// instantiated.
struct DensitySpec {
  std::string family = "uniform";
  double lo = 0.5;
  double hi = 1.5;
  double mean = 1.0;
  double stddev = 0.2;
  std::optional<double> alpha;
  std::optional<double> scale;
  std::optional<int> bits;  // quantized-posterior only; defaults to ceil((alpha/2) log2 P)
  std::vector<double> atoms;
};

/// Validates and instantiates a density at power P.
///
/// With alpha set, uniform and truncated-Gaussian supports (and the Gaussian
/// spread) shrink around their centre by P^(-alpha/2); a quantized posterior
/// uses ceil((alpha/2) log2 P) bits of feedback about `mean`. When `scale`
/// is unset it defaults to the f_max of the unscaled shape, so the witness
/// f_max <= scale * P^(alpha/2) holds by construction. Atomic or zero-width
/// laws are rejected with DegenerateDensity.
ChannelDensity make_density(const DensitySpec& spec, double power);

enum class CsitKind { Perfect, Density };

struct UserCsit {
  CsitKind kind = CsitKind::Density;
  std::optional<ChannelDensity> density;
  std::optional<int> feedback_bits;
};

/// Per-user CSIT. Perfect users carry no density.
struct CsitState {
  std::vector<UserCsit> users;
  void validate() const;
};

}  // namespace aisets
