#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace aisets {

/// Smallest integer q with q*q >= power, exact for integral powers.
std::int64_t ceil_sqrt(double power);

/// H_q = sum_{k=1}^{q} 1/k, summed smallest terms first.
double harmonic_number(std::int64_t q);

double normal_cdf(double z);
double normal_pdf(double z);

/// Standard normal mass of [za, zb]; stays accurate in the tails and for
/// very narrow intervals.
double normal_mass(double za, double zb);

/// Gauss-Legendre rule on [-1, 1] built with the Golub-Welsch eigenvalue
/// method.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const QuadratureRule& gauss_legendre(int order);

/// Composite Gauss-Legendre integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels = 16, int order = 20);

inline constexpr double kLn2 = 0.693147180559945309417232121458;

}  // namespace aisets
