#include "aisets/channel.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

#include "aisets/error.hpp"
#include "aisets/numeric.hpp"

namespace aisets {

void GeneralChannel2x2::validate() const {
  if (!(bound > 1.0)) throw Error(ErrorKind::InvalidArgument, "M must exceed 1");
  const double lo = 1.0 / bound;
  for (std::size_t t = 0; t < coefficients.size(); ++t) {
    const Eigen::Matrix2d& g = coefficients[t];
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double magnitude = std::abs(g(i, j));
        if (magnitude < lo || magnitude > bound) {
          throw Error(ErrorKind::BoundViolation,
                      "|G(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                          ")| outside [1/M, M] at t=" + std::to_string(t));
        }
      }
    }
    const double det = std::abs(g.determinant());
    if (det < lo || det > bound) {
      throw Error(ErrorKind::DegenerateChannel, "|det G| outside [1/M, M] at t=" + std::to_string(t));
    }
  }
}

CanonicalChannel::CanonicalChannel(int users, int length, double bound, double power)
    : users_(users), length_(length), bound_(bound), power_(power) {
  if (users < 1 || length < 1) {
    throw Error(ErrorKind::InvalidArgument, "channel needs at least one user and one time");
  }
  lower_.assign(static_cast<std::size_t>(users) * (users - 1) / 2 * length, 0.0);
}

CanonicalChannel CanonicalChannel::two_user(std::span<const double> cross, double bound,
                                            double power) {
  CanonicalChannel channel(2, static_cast<int>(cross.size()), bound, power);
  for (std::size_t t = 0; t < cross.size(); ++t) channel.set(1, 0, static_cast<int>(t), cross[t]);
  return channel;
}

std::size_t CanonicalChannel::offset(int k, int j, int t) const {
  const std::size_t row = static_cast<std::size_t>(k) * (k - 1) / 2 + j;
  return row * length_ + t;
}

double CanonicalChannel::coefficient(int k, int j, int t) const {
  if (j == k) return 1.0;
  if (j > k) return 0.0;
  return lower_[offset(k, j, t)];
}

void CanonicalChannel::set(int k, int j, int t, double value) {
  if (!(j < k) || k >= users_ || t < 0 || t >= length_) {
    throw Error(ErrorKind::InvalidArgument, "only strictly lower coefficients are stored");
  }
  lower_[offset(k, j, t)] = value;
}

void CanonicalChannel::validate() const {
  const double lo = 1.0 / bound_;
  for (int k = 1; k < users_; ++k) {
    for (int j = 0; j < k; ++j) {
      for (int t = 0; t < length_; ++t) {
        const double magnitude = std::abs(coefficient(k, j, t));
        if (magnitude < lo || magnitude > bound_) {
          throw Error(ErrorKind::BoundViolation,
                      "canonical coefficient outside [1/M, M] at t=" + std::to_string(t));
        }
      }
    }
  }
}

double canonical_power_factor(double bound) {
  const double m2 = bound * bound;
  return 2.0 * m2 + m2 * m2;
}

CanonicalReduction reduce_to_canonical(const GeneralChannel2x2& channel) {
  channel.validate();
  const int length = static_cast<int>(channel.coefficients.size());
  const double canonical_bound = channel.bound * channel.bound;
  CanonicalChannel canonical(2, length, canonical_bound,
                             canonical_power_factor(channel.bound) * channel.power);
  InputTransform transform;
  transform.forward.reserve(length);
  transform.inverse.reserve(length);
  for (int t = 0; t < length; ++t) {
    const Eigen::Matrix2d& g = channel.coefficients[t];
    const double det = g.determinant();
    canonical.set(1, 0, t, g(1, 0) / g(0, 0));

    Eigen::Matrix2d forward;
    forward << g(0, 0), g(0, 1),
               0.0,     det / g(0, 0);
    Eigen::Matrix2d inverse;
    inverse << 1.0 / g(0, 0), -g(0, 1) / det,
               0.0,           g(0, 0) / det;
    transform.forward.push_back(forward);
    transform.inverse.push_back(inverse);
  }
  canonical.validate();
  return {std::move(canonical), std::move(transform)};
}

CanonicalChannel sample_realization(int users, int length, double bound, double power,
                                    std::span<const ChannelDensity> row_densities, double rho,
                                    Rng& rng) {
  if (static_cast<int>(row_densities.size()) < users - 1) {
    throw Error(ErrorKind::InvalidArgument, "one density per user beyond the first is required");
  }
  if (!(rho > -1.0 && rho < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "AR(1) correlation must lie in (-1, 1)");
  }
  CanonicalChannel channel(users, length, bound, power);
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (int k = 1; k < users; ++k) {
    const ChannelDensity& density = row_densities[k - 1];
    for (int j = 0; j < k; ++j) {
      if (rho == 0.0) {
        for (int t = 0; t < length; ++t) channel.set(k, j, t, density.sample(rng));
        continue;
      }
      double z = standard_normal(rng);
      for (int t = 0; t < length; ++t) {
        if (t > 0) z = rho * z + innovation * standard_normal(rng);
        channel.set(k, j, t, density.quantile(normal_cdf(z)));
      }
    }
  }
  return channel;
}

}  // namespace aisets
