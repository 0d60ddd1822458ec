#include "aisets/numeric.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <string>
#include <map>
#include <mutex>
#include <numbers>

#include "aisets/error.hpp"
#include "aisets/parallel.hpp"
#include "aisets/rng.hpp"

namespace aisets {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::BoundViolation: return "bound violation";
    case ErrorKind::DegenerateChannel: return "degenerate channel";
    case ErrorKind::DegenerateDensity: return "degenerate density";
    case ErrorKind::PrecisionExhausted: return "precision exhausted";
    case ErrorKind::InstanceTooLarge: return "instance too large";
    case ErrorKind::MalformedMapping: return "malformed mapping";
    case ErrorKind::InsufficientData: return "insufficient data";
  }
  return "error";
}

std::int64_t ceil_sqrt(double power) {
  if (!(power >= 0.0) || !std::isfinite(power)) {
    throw Error(ErrorKind::InvalidArgument, "power must be finite and nonnegative");
  }
  auto q = static_cast<std::int64_t>(std::ceil(std::sqrt(power)));
  while (q > 0 && static_cast<double>(q - 1) * static_cast<double>(q - 1) >= power) --q;
  while (static_cast<double>(q) * static_cast<double>(q) < power) ++q;
  return q;
}

double harmonic_number(std::int64_t q) {
  double sum = 0.0;
  for (std::int64_t k = q; k >= 1; --k) sum += 1.0 / static_cast<double>(k);
  return sum;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double normal_mass(double za, double zb) {
  if (!(zb > za)) return 0.0;
  if (zb - za < 1e-3) {
    // Narrow interval: differencing the cdf would cancel, integrate directly.
    const auto& rule = gauss_legendre(12);
    const double half = 0.5 * (zb - za);
    const double mid = 0.5 * (zb + za);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      sum += rule.weights[i] * normal_pdf(mid + half * rule.nodes[i]);
    }
    return half * sum;
  }
  const double s = std::numbers::sqrt2;
  if (za >= 0.0) return 0.5 * (std::erfc(za / s) - std::erfc(zb / s));
  if (zb <= 0.0) return 0.5 * (std::erfc(-zb / s) - std::erfc(-za / s));
  return 1.0 - 0.5 * std::erfc(zb / s) - 0.5 * std::erfc(-za / s);
}

namespace {

QuadratureRule golub_welsch(int order) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = 2.0 * v0 * v0;
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, golub_welsch(order)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels,
                 int order) {
  if (b <= a) return 0.0;
  const auto& rule = gauss_legendre(order);
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double half = 0.5 * width;
    const double mid = lo + half;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    total += half * sum;
  }
  return total;
}

double standard_normal(Rng& rng) {
  const double u1 = uniform_open01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("AISETS_THREADS"); env != nullptr && *env != '\0') {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidArgument, "AISETS_THREADS must be a positive integer");
  }
  return 1;
}

}  // namespace aisets
