#include "aisets/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aisets/error.hpp"
#include "aisets/numeric.hpp"

namespace aisets {

const char* to_string(DensityFamily family) {
  switch (family) {
    case DensityFamily::Uniform: return "uniform";
    case DensityFamily::TruncatedGaussian: return "truncated-gaussian";
    case DensityFamily::QuantizedPosterior: return "quantized-posterior";
  }
  return "unknown";
}

namespace {

void require_support(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::InvalidArgument, "density support must be finite");
  }
  if (!(hi > lo)) {
    throw Error(ErrorKind::DegenerateDensity,
                "support has zero width, so a null set would carry probability");
  }
}

}  // namespace

ChannelDensity ChannelDensity::uniform(double lo, double hi) {
  require_support(lo, hi);
  ChannelDensity d;
  d.family_ = DensityFamily::Uniform;
  d.lo_ = lo;
  d.hi_ = hi;
  d.mean_ = 0.5 * (lo + hi);
  return d;
}

ChannelDensity ChannelDensity::truncated_gaussian(double mean, double stddev, double lo,
                                                  double hi) {
  require_support(lo, hi);
  if (!(stddev > 0.0) || !std::isfinite(stddev)) {
    throw Error(ErrorKind::DegenerateDensity, "truncated Gaussian needs a positive spread");
  }
  ChannelDensity d;
  d.family_ = DensityFamily::TruncatedGaussian;
  d.gaussian_ = true;
  d.lo_ = lo;
  d.hi_ = hi;
  d.mean_ = mean;
  d.stddev_ = stddev;
  d.norm_ = normal_mass((lo - mean) / stddev, (hi - mean) / stddev);
  if (!(d.norm_ > 0.0)) {
    throw Error(ErrorKind::DegenerateDensity, "Gaussian carries no mass on the support");
  }
  return d;
}

ChannelDensity ChannelDensity::scaled_uniform(double center, double alpha, double power,
                                              double scale) {
  const double width = 1.0 / (scale * std::pow(power, 0.5 * alpha));
  return uniform(center - 0.5 * width, center + 0.5 * width).with_scaling(alpha, power, scale);
}

ChannelDensity ChannelDensity::with_scaling(double alpha, double power, double scale) const {
  if (alpha < 0.0 || alpha > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  }
  if (!(power > 0.0) || !(scale > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "power and scale must be positive");
  }
  const double witness = scale * std::pow(power, 0.5 * alpha);
  if (f_max() > witness * (1.0 + 1e-12)) {
    throw Error(ErrorKind::BoundViolation, "f_max exceeds C * P^(alpha/2)");
  }
  ChannelDensity d = *this;
  d.alpha_ = alpha;
  d.power_ = power;
  d.scale_ = scale;
  return d;
}

double ChannelDensity::peak() const {
  if (!gaussian_) return 1.0 / (hi_ - lo_);
  const double mode = std::clamp(mean_, lo_, hi_);
  return pdf(mode);
}

double ChannelDensity::f_max() const { return std::max(1.0, peak()); }

double ChannelDensity::pdf(double g) const {
  if (g < lo_ || g > hi_) return 0.0;
  if (!gaussian_) return 1.0 / (hi_ - lo_);
  return normal_pdf((g - mean_) / stddev_) / (stddev_ * norm_);
}

double ChannelDensity::shape_mass(double a, double b) const {
  a = std::max(a, lo_);
  b = std::min(b, hi_);
  if (!(b > a)) return 0.0;
  if (!gaussian_) return (b - a) / (hi_ - lo_);
  return std::min(1.0, normal_mass((a - mean_) / stddev_, (b - mean_) / stddev_) / norm_);
}

double ChannelDensity::cdf(double g) const {
  if (g <= lo_) return 0.0;
  if (g >= hi_) return 1.0;
  return shape_mass(lo_, g);
}

double ChannelDensity::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (!gaussian_) return lo_ + u * (hi_ - lo_);
  double a = lo_;
  double b = hi_;
  for (int i = 0; i < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
       ++i) {
    const double mid = 0.5 * (a + b);
    if (cdf(mid) < u) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

double ChannelDensity::interval_probability(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  return shape_mass(lo, hi);
}

double ChannelDensity::sample(Rng& rng) const {
  const double width = hi_ - lo_;
  if (!gaussian_) return lo_ + uniform01(rng) * width;
  const double top = peak();
  const double acceptance = 1.0 / (top * width);
  if (acceptance < 0.05) return quantile(uniform_open01(rng));
  // Rejection from a flat envelope over the support.
  for (;;) {
    const double g = lo_ + uniform01(rng) * width;
    if (uniform01(rng) * top <= pdf(g)) return g;
  }
}

void ChannelDensity::check_support(double bound) const {
  if (lo_ < 1.0 / bound || hi_ > bound) {
    throw Error(ErrorKind::BoundViolation, "density support leaves [1/M, M]");
  }
}

double interval_probability(const ChannelDensity& density, double lo, double hi) {
  return density.interval_probability(lo, hi);
}

QuantizationCell quantization_cell(double lo, double hi, double g, int bits) {
  if (bits < 0) throw Error(ErrorKind::InvalidArgument, "feedback bits must be nonnegative");
  if (bits > 62) throw Error(ErrorKind::PrecisionExhausted, "more than 62 feedback bits");
  const std::uint64_t cells = std::uint64_t{1} << bits;
  const double width = std::ldexp(hi - lo, -bits);
  const double resolution = 4.0 * std::numeric_limits<double>::epsilon() *
                            std::max(std::abs(lo), std::abs(hi));
  if (!(width > resolution)) {
    throw Error(ErrorKind::PrecisionExhausted, "quantization cell below floating-point resolution");
  }
  auto index = static_cast<std::uint64_t>(std::max(0.0, std::floor((g - lo) / width)));
  index = std::min(index, cells - 1);
  QuantizationCell cell;
  cell.index = index;
  cell.lo = lo + static_cast<double>(index) * width;
  cell.hi = (index + 1 == cells) ? hi : lo + static_cast<double>(index + 1) * width;
  return cell;
}

ChannelDensity build_quantized_posterior(const ChannelDensity& prior, double true_g, int bits) {
  if (true_g < prior.lo() || true_g > prior.hi()) {
    throw Error(ErrorKind::InvalidArgument, "true channel value outside the prior support");
  }
  if (bits == 0) return prior;
  const QuantizationCell cell = quantization_cell(prior.lo(), prior.hi(), true_g, bits);
  ChannelDensity posterior = prior.gaussian_shape()
      ? ChannelDensity::truncated_gaussian(prior.mean(), prior.stddev(), cell.lo, cell.hi)
      : ChannelDensity::uniform(cell.lo, cell.hi);
  posterior.family_ = DensityFamily::QuantizedPosterior;
  return posterior;
}

ChannelDensity make_density(const DensitySpec& spec, double power) {
  if (spec.family == "atomic" || spec.family == "compound" || !spec.atoms.empty()) {
    throw Error(ErrorKind::DegenerateDensity,
                "atomic channel law: a finite state set has measure zero but probability one, "
                "so no bounded density exists");
  }
  if (!(power > 0.0)) throw Error(ErrorKind::InvalidArgument, "power must be positive");
  const double alpha = spec.alpha.value_or(0.0);
  const double shrink = spec.alpha ? std::pow(power, -0.5 * alpha) : 1.0;

  if (spec.family == "uniform") {
    const ChannelDensity base = ChannelDensity::uniform(spec.lo, spec.hi);
    if (!spec.alpha) return base;
    const double center = 0.5 * (spec.lo + spec.hi);
    const double half = 0.5 * (spec.hi - spec.lo) * shrink;
    return ChannelDensity::uniform(center - half, center + half)
        .with_scaling(alpha, power, spec.scale.value_or(base.f_max()));
  }
  if (spec.family == "truncated-gaussian") {
    const ChannelDensity base =
        ChannelDensity::truncated_gaussian(spec.mean, spec.stddev, spec.lo, spec.hi);
    if (!spec.alpha) return base;
    return ChannelDensity::truncated_gaussian(spec.mean, spec.stddev * shrink,
                                              spec.mean - (spec.mean - spec.lo) * shrink,
                                              spec.mean + (spec.hi - spec.mean) * shrink)
        .with_scaling(alpha, power, spec.scale.value_or(base.f_max()));
  }
  if (spec.family == "quantized-posterior") {
    const ChannelDensity prior = ChannelDensity::uniform(spec.lo, spec.hi);
    const int bits = spec.bits.value_or(
        static_cast<int>(std::ceil(0.5 * alpha * std::log2(power) - 1e-12)));
    const ChannelDensity posterior = build_quantized_posterior(prior, spec.mean, bits);
    if (!spec.alpha) return posterior;
    return posterior.with_scaling(alpha, power, spec.scale.value_or(2.0 * prior.f_max()));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown density family '" + spec.family + "'");
}

void CsitState::validate() const {
  for (std::size_t k = 0; k < users.size(); ++k) {
    const auto& user = users[k];
    if (user.kind == CsitKind::Perfect && user.density) {
      throw Error(ErrorKind::InvalidArgument,
                  "user " + std::to_string(k + 1) + " has perfect CSIT and a density");
    }
    if (user.kind == CsitKind::Density && !user.density) {
      throw Error(ErrorKind::InvalidArgument,
                  "user " + std::to_string(k + 1) + " needs a density");
    }
    if (user.feedback_bits && *user.feedback_bits < 0) {
      throw Error(ErrorKind::InvalidArgument, "feedback bits must be nonnegative");
    }
  }
}

}  // namespace aisets
