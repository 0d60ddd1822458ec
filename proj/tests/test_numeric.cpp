#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

#include "aisets/anneal.hpp"
#include "aisets/error.hpp"
#include "aisets/numeric.hpp"
#include "aisets/parallel.hpp"
#include "aisets/rng.hpp"
#include "oracles.hpp"

using namespace aisets;

TEST_CASE("ceil_sqrt is exact on perfect squares and their neighbours") {
  CHECK(ceil_sqrt(1.0) == 1);
  CHECK(ceil_sqrt(2.0) == 2);
  CHECK(ceil_sqrt(100.0) == 10);
  CHECK(ceil_sqrt(101.0) == 11);
  CHECK(ceil_sqrt(1e8) == 10000);
  CHECK(ceil_sqrt(1e8 + 1.0) == 10001);
  CHECK(ceil_sqrt(1e16) == 100000000);
  for (std::int64_t q = 1; q < 3000; ++q) {
    const auto square = static_cast<double>(q * q);
    CHECK(ceil_sqrt(square) == q);
    CHECK(ceil_sqrt(square - 0.5) == q);
    CHECK(ceil_sqrt(square + 0.5) == q + 1);
  }
}

TEST_CASE("harmonic numbers match exact fractions") {
  for (std::int64_t q : {1, 2, 10, 37, 100, 1000}) {
    const double expected = static_cast<double>(oracle::harmonic(q));
    CHECK(harmonic_number(q) == doctest::Approx(expected).epsilon(1e-15));
  }
  CHECK(harmonic_number(10) == doctest::Approx(7381.0 / 2520.0).epsilon(1e-15));
  CHECK(harmonic_number(0) == 0.0);
}

TEST_CASE("normal mass agrees with erfc differences and quadrature") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_mass(-1.0, 1.0) == doctest::Approx(std::erf(1.0 / std::numbers::sqrt2)).epsilon(1e-14));
  // Far tail keeps relative accuracy.
  const double tail = 0.5 * std::erfc(9.0 / std::numbers::sqrt2) - 0.5 * std::erfc(10.0 / std::numbers::sqrt2);
  CHECK(normal_mass(9.0, 10.0) == doctest::Approx(tail).epsilon(1e-10));
  // Narrow interval against adaptive Simpson of the pdf.
  const double narrow = oracle::simpson(
      [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }, 0.3,
      0.3 + 1e-6);
  CHECK(normal_mass(0.3, 0.3 + 1e-6) == doctest::Approx(narrow).epsilon(1e-9));
}

TEST_CASE("Gauss-Legendre rules integrate polynomials of degree 2m-1 exactly") {
  for (int order : {2, 5, 12, 20}) {
    const QuadratureRule& rule = gauss_legendre(order);
    REQUIRE(rule.nodes.size() == static_cast<std::size_t>(order));
    double weight_sum = 0.0;
    for (double w : rule.weights) weight_sum += w;
    CHECK(weight_sum == doctest::Approx(2.0).epsilon(1e-13));
    for (int degree = 0; degree < 2 * order; ++degree) {
      double sum = 0.0;
      for (int i = 0; i < order; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], degree);
      const double expected = degree % 2 == 1 ? 0.0 : 2.0 / (degree + 1);
      CHECK(sum == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("composite integration") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
        doctest::Approx(2.0).epsilon(1e-14));
  const auto f = [](double x) { return std::log(1.0 + x * x); };
  CHECK(integrate(f, 0.5, 3.0) == doctest::Approx(oracle::simpson(f, 0.5, 3.0)).epsilon(1e-11));
}

TEST_CASE("RNG streams are reproducible and distinct") {
  Rng a = make_stream(7, 3);
  Rng b = make_stream(7, 3);
  Rng c = make_stream(7, 4);
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs = differs || x != c();
  }
  CHECK(differs);

  Rng rng = make_stream(11, 0);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    sum += z;
    sum_sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
}

TEST_CASE("parallel_map keeps index order and rethrows") {
  const auto squares = parallel_map(1000, 4, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < squares.size(); ++i) CHECK(squares[i] == i * i);
  CHECK_THROWS_AS(parallel_map(100, 3,
                               [](std::size_t i) -> int {
                                 if (i == 57) throw std::runtime_error("boom");
                                 return 0;
                               }),
                  std::runtime_error);
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_threads(3) == 3);
  ::setenv("AISETS_THREADS", "5", 1);
  CHECK(resolve_threads(0) == 5);
  ::setenv("AISETS_THREADS", "zero", 1);
  CHECK_THROWS_AS(resolve_threads(0), Error);
  ::unsetenv("AISETS_THREADS");
  CHECK(resolve_threads(0) == 1);
}

TEST_CASE("annealing reaches the minimum of a small integer landscape") {
  AnnealSchedule schedule;
  schedule.steps = 5000;
  Rng rng = make_stream(1, 0);
  const auto cost = [](int x) { return 0.01 * (x - 37) * (x - 37) + std::cos(x); };
  int best = 0;
  double best_cost = cost(0);
  for (int x = -100; x <= 200; ++x) {
    if (cost(x) < best_cost) {
      best = x;
      best_cost = cost(x);
    }
  }
  const auto result = anneal(
      0, cost, [](int x, Rng& r) { return x + static_cast<int>(r() % 7) - 3; }, schedule, rng);
  CHECK(result.best == best);
  CHECK(result.best_cost == doctest::Approx(best_cost));
}
