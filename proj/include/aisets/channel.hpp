#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "aisets/density.hpp"
#include "aisets/rng.hpp"

namespace aisets {

/// Real 2x2 MISO broadcast channel, one coefficient matrix per channel use.
struct GeneralChannel2x2 {
  std::vector<Eigen::Matrix2d> coefficients;
  double bound = 4.0;  // M
  double power = 1.0;  // per-codeword power budget of the original inputs

  /// Throws BoundViolation if an entry leaves [1/M, M] in magnitude and
  /// DegenerateChannel if |det| leaves [1/M, M].
  void validate() const;
};

/// Lower-triangular, unit-diagonal K-user channel. Only the strictly lower
/// coefficients G_kj(t), j < k, are stored; G_kk(t) = 1 is implicit.
/// Users and times are zero-based here: user 0 is the user with the
/// perfectly known channel.
class CanonicalChannel {
 public:
  CanonicalChannel(int users, int length, double bound, double power);

  /// Two-user channel with cross coefficients G(t).
  static CanonicalChannel two_user(std::span<const double> cross, double bound, double power);

  int users() const { return users_; }
  int length() const { return length_; }
  double bound() const { return bound_; }
  double power() const { return power_; }

  /// G_kj(t) for j < k, 1 for j == k, 0 above the diagonal.
  double coefficient(int k, int j, int t) const;
  void set(int k, int j, int t, double value);

  /// Throws BoundViolation unless 1/M <= |G_kj(t)| <= M for all stored
  /// coefficients.
  void validate() const;

 private:
  std::size_t offset(int k, int j, int t) const;

  int users_;
  int length_;
  double bound_;
  double power_;
  std::vector<double> lower_;
};

/// Per-time invertible map between the original inputs and the canonical
/// inputs: x = forward(t) * x_tilde, x_tilde = inverse(t) * x.
struct InputTransform {
  std::vector<Eigen::Matrix2d> forward;
  std::vector<Eigen::Matrix2d> inverse;

  Eigen::Vector2d to_canonical(int t, const Eigen::Vector2d& original) const {
    return forward[t] * original;
  }
  Eigen::Vector2d to_original(int t, const Eigen::Vector2d& canonical) const {
    return inverse[t] * canonical;
  }
};

struct CanonicalReduction {
  CanonicalChannel channel;
  InputTransform transform;
};

/// Consolidates the unknown coefficients of a general 2x2 channel into one
/// cross coefficient per channel use:
///   X1 = G11 X~1 + G12 X~2,  X2 = (det / G11) X~2,  G = G21 / G11,
/// with canonical bound M^2 and power (2M^2 + M^4) P~. The transmitter is
/// assumed to know G11, G12 and det (user 1 is perfectly known).
CanonicalReduction reduce_to_canonical(const GeneralChannel2x2& channel);

/// Power inflation factor 2M^2 + M^4 of the canonical reduction.
double canonical_power_factor(double bound);

/// Draws a canonical realization. `row_densities[k-1]` is the law of every
/// coefficient G_kj, j < k, of user k >= 1. Coefficients are i.i.d. over
/// time unless rho != 0, in which case each coefficient follows an AR(1)
/// Gaussian copula with lag-one correlation rho and the same marginal.
CanonicalChannel sample_realization(int users, int length, double bound, double power,
                                    std::span<const ChannelDensity> row_densities, double rho,
                                    Rng& rng);

}  // namespace aisets
