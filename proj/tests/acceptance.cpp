// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "aisets/aligned_sets.hpp"
#include "aisets/entropy.hpp"
#include "aisets/error.hpp"
#include "aisets/numeric.hpp"
#include "aisets/parallel.hpp"
#include "aisets/schemes.hpp"

using namespace aisets;

namespace {

constexpr std::uint64_t kSeed = 20240601;

int worker_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool report(int criterion, bool pass, const std::string& what, const std::string& detail) {
  std::printf("criterion %d %s: %s | %s\n", criterion, pass ? "PASS" : "FAIL", what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, pattern, a, b, c, d);
  return buffer;
}

ChannelDensity family(int which, double power) {
  DensitySpec spec;
  if (which == 1) spec.family = "truncated-gaussian";
  if (which == 2) {
    spec.family = "quantized-posterior";
    spec.alpha = 0.5;
  }
  return make_density(spec, power);
}

const char* family_name(int which) {
  static const char* names[] = {"uniform", "truncated-gaussian", "quantized-posterior"};
  return names[which];
}

enum class MappingKind { Random, Zero, Reverse, Worst };

IntegerCodebook make_codebook(std::size_t size, int length, double power, MappingKind kind,
                              const ChannelDensity& density, Rng& rng) {
  const Symbol q = ceil_sqrt(power);
  const double space = std::pow(static_cast<double>(q + 1), length);
  size = static_cast<std::size_t>(std::min(static_cast<double>(size), space));
  std::set<Word> seen;
  std::vector<Word> x1;
  while (x1.size() < size) {
    Word w(length);
    for (auto& s : w) s = static_cast<Symbol>(rng() % static_cast<std::uint64_t>(q + 1));
    if (seen.insert(w).second) x1.push_back(w);
  }
  std::vector<Word> x2(size, Word(length, 0));
  switch (kind) {
    case MappingKind::Random:
      for (auto& w : x2) {
        for (auto& s : w) s = static_cast<Symbol>(rng() % static_cast<std::uint64_t>(q + 1));
      }
      break;
    case MappingKind::Zero:
      break;
    case MappingKind::Reverse:
      for (std::size_t m = 0; m < size; ++m) {
        for (int t = 0; t < length; ++t) x2[m][t] = q - x1[m][t];
      }
      break;
    case MappingKind::Worst: {
      AnnealSchedule schedule;
      schedule.steps = 300;
      schedule.initial_temperature = 0.5;
      schedule.final_temperature = 1e-3;
      x2 = worst_case_mapping(x1, power, density, q, 20000, schedule, rng).mapping;
      break;
    }
  }
  return IntegerCodebook::two_user(x1, x2, power);
}

// 1. Exact pairwise alignment probability and empirical E|S| never exceed
// their bounds.
bool criterion_bound_dominance() {
  const auto start = std::chrono::steady_clock::now();
  struct Cell {
    double power;
    int length;
    int family;
    std::size_t size;
    MappingKind kind;
  };
  std::vector<Cell> cells;
  for (double p : {1e2, 1e3, 1e4}) {
    for (int n = 1; n <= 3; ++n) {
      for (int f = 0; f < 3; ++f) {
        for (std::size_t size : {2, 5, 8, 12}) {
          for (MappingKind kind :
               {MappingKind::Random, MappingKind::Zero, MappingKind::Reverse, MappingKind::Worst}) {
            cells.push_back({p, n, f, size, kind});
          }
        }
      }
    }
  }
  struct Outcome {
    std::size_t pairs = 0;
    std::size_t pair_violations = 0;
    bool size_violation = false;
    double slack = 0.0;  // smallest analytic / empirical ratio
  };
  const auto outcomes = parallel_map(cells.size(), worker_threads(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    Rng rng = make_stream(kSeed, i);
    const ChannelDensity density = family(cell.family, cell.power);
    const IntegerCodebook cb = make_codebook(cell.size, cell.length, cell.power, cell.kind, density, rng);
    Outcome out;
    for (std::size_t a = 0; a < cb.size(); ++a) {
      for (std::size_t b = 0; b < cb.size(); ++b) {
        if (a == b) continue;
        ++out.pairs;
        const double exact = exact_alignment_probability(cb, a, b, density);
        const double bound = pairwise_alignment_probability_bound(cb, a, b, density).bound;
        if (exact > bound * (1.0 + 1e-12) + 1e-15) ++out.pair_violations;
      }
    }
    SetSizeOptions options;
    options.samples = 2000;
    const AlignmentBoundReport r = expected_set_size(cb, density, options, rng);
    out.size_violation = r.empirical_expected_size > r.analytic_bound || r.falsified();
    out.slack = r.analytic_bound / r.empirical_expected_size;
    return out;
  });
  std::size_t pairs = 0;
  std::size_t violations = 0;
  std::size_t size_violations = 0;
  double slack = 1e300;
  for (const Outcome& o : outcomes) {
    pairs += o.pairs;
    violations += o.pair_violations;
    size_violations += o.size_violation;
    slack = std::min(slack, o.slack);
  }
  const double elapsed = seconds_since(start);
  const bool pass = violations == 0 && size_violations == 0 && elapsed <= 600.0;
  return report(1, pass, "bound dominance",
                std::to_string(cells.size()) + " codebooks, " + std::to_string(pairs) + " pairs, " +
                    std::to_string(violations) + " pair violations, " +
                    std::to_string(size_violations) + " E|S| violations" +
                    fmt(", min analytic/empirical %.3g, %.1f s (limit 600 s)", slack, elapsed));
}

// 2. Chain identity to 1e-9 bits and the Jensen chain on every exact ledger.
bool criterion_entropy_chain() {
  struct Cell {
    double power;
    int length;
    int family;
    std::size_t size;
    MappingKind kind;
  };
  std::vector<Cell> cells;
  for (double p : {1e2, 1e3, 1e4}) {
    for (int n = 1; n <= 3; ++n) {
      for (int f = 0; f < 3; ++f) {
        for (std::size_t size : {3, 6, 9}) {
          for (MappingKind kind : {MappingKind::Random, MappingKind::Zero, MappingKind::Reverse}) {
            cells.push_back({p, n, f, size, kind});
          }
        }
      }
    }
  }
  struct Outcome {
    bool exact = false;
    double chain = 0.0;
    bool jensen = true;
  };
  auto outcomes = parallel_map(cells.size(), worker_threads(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    Rng rng = make_stream(kSeed + 1, i);
    const ChannelDensity density = family(cell.family, cell.power);
    const IntegerCodebook cb = make_codebook(cell.size, cell.length, cell.power, cell.kind, density, rng);
    const EntropyLedger ledger = difference_of_entropies(cb, {}, density);
    return Outcome{ledger.exact, std::abs(ledger.chain_residual()), ledger.jensen_holds(1e-9)};
  });
  // Every mapping of three rows into {0, 1, 2}.
  const std::vector<Word> rows{{0}, {1}, {2}};
  for (int code = 0; code < 27; ++code) {
    const std::vector<Word> x2{{code % 3}, {(code / 3) % 3}, {code / 9}};
    const auto cb = IntegerCodebook::two_user(rows, x2, 4.0);
    const EntropyLedger ledger = difference_of_entropies(cb, {}, ChannelDensity::uniform(0.9, 1.1));
    outcomes.push_back({ledger.exact, std::abs(ledger.chain_residual()), ledger.jensen_holds(1e-9)});
  }
  std::size_t exact = 0;
  std::size_t jensen_failures = 0;
  double worst = 0.0;
  for (const Outcome& o : outcomes) {
    if (!o.exact) continue;
    ++exact;
    worst = std::max(worst, o.chain);
    jensen_failures += !o.jensen;
  }
  const bool pass = exact > 0 && worst <= 1e-9 && jensen_failures == 0;
  return report(2, pass, "entropy chain and Jensen",
                std::to_string(exact) + " exact ledgers of " + std::to_string(outcomes.size()) +
                    fmt(", max chain residual %.2e bits (tol 1e-9)", worst) + ", " +
                    std::to_string(jensen_failures) + " Jensen failures");
}

// 3. Extrapolated normalized analytic bound stays within alpha + 0.05.
bool criterion_theorem_mechanism() {
  const std::vector<double> powers{1e4, 1e6, 1e8};
  bool pass = true;
  std::string detail;
  for (double alpha : {0.0, 0.5, 1.0}) {
    for (int n = 1; n <= 3; ++n) {
      std::vector<double> ratios;
      for (double p : powers) {
        DensitySpec spec;
        spec.alpha = alpha;
        spec.scale = 1.0;
        const ChannelDensity density = make_density(spec, p);
        const double normalizer = 0.5 * n * std::log2(p);
        ratios.push_back(std::log2(analytic_set_size_bound(density.f_max(), n, p)) / normalizer);
      }
      const LimitFit fit = fit_limit(powers, ratios);
      const bool ok = fit.limit <= alpha + 0.05;
      pass = pass && ok;
      detail += fmt("a=%.2g n=%.0f limit %.4f; ", alpha, n, fit.limit);
    }
  }
  detail += "tol alpha+0.05";
  return report(3, pass, "bound-level DoF limit", detail);
}

// 4. Zero-forcing and blind IA slopes.
bool criterion_achievability() {
  const auto prior = ChannelDensity::uniform(0.5, 1.5);
  const std::vector<double> powers = power_grid(8.0, 16.0, 0.25);
  bool pass = true;
  std::string detail;
  for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    std::vector<RatePoint> curve;
    for (double p : powers) curve.push_back(zf_quantized_feedback(p, alpha, prior, 2000, kSeed, worker_threads()));
    const SchemeSummary s = summarize(curve);
    const bool ok = std::abs(s.sum.slope - (1.0 + alpha)) <= 0.07 &&
                    std::abs(s.residual_exponent.slope - (1.0 - alpha)) <= 0.05;
    pass = pass && ok;
    detail += fmt("zf a=%.2g sum %.4f resid %.4f; ", alpha, s.sum.slope, s.residual_exponent.slope);
  }
  std::vector<RatePoint> bia;
  for (double p : power_grid(4.0, 12.0, 0.5)) bia.push_back(blind_ia_pn(p, 2000, kSeed, 4.0, worker_threads()));
  const SchemeSummary b = summarize(bia);
  pass = pass && std::abs(b.sum.slope - 1.5) <= 0.07;
  detail += fmt("bia sum %.4f; tol sum 0.07, resid 0.05", b.sum.slope);
  return report(4, pass, "achievability slopes", detail);
}

// Entropy of X - (X mod Q) for an integer pmf on [lo, lo + pmf.size()).
double offset_entropy(const std::vector<double>& pmf, Symbol lo, Symbol q) {
  std::map<Symbol, double> grouped;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const Symbol x = lo + static_cast<Symbol>(i);
    grouped[x - positive_mod(x, q)] += pmf[i];
  }
  double h = 0.0;
  for (const auto& [k, p] : grouped) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

// 5. Modulo reconstruction, offset entropy bound, integer-gap formula.
bool criterion_appendix() {
  std::size_t symbols = 0;
  bool reconstruction = true;
  for (Symbol q : {3, 7, 10, 100}) {
    Word row;
    for (Symbol x = -10000; x <= 10000; ++x) row.push_back(x);
    const ModReduction r = mod_reduce_with_modulus({row}, q);
    reconstruction = reconstruction && r.reconstruction_holds;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Symbol low = r.per_symbol[0][i];
      reconstruction = reconstruction && low >= 0 && low < q && low + r.offset[0][i] == row[i] &&
                       r.offset[0][i] % q == 0;
    }
    symbols += row.size();
  }

  // Integer inputs truncated from Gaussian, Laplacian, uniform and two-point
  // mixture shapes with second moment n P p_t.
  Rng rng = make_stream(kSeed, 5);
  std::size_t bound_failures = 0;
  double worst_margin = 1e300;
  for (int trial = 0; trial < 200; ++trial) {
    const double power = std::pow(10.0, 2.0 + 6.0 * uniform01(rng));
    const int n = 1 + static_cast<int>(rng() % 16);
    const double fraction = 0.01 + 0.99 * uniform01(rng);
    const double second = n * power * fraction;
    const double sd = std::sqrt(second);
    const int shape = trial % 4;
    const auto half = static_cast<Symbol>(std::ceil(14.0 * sd)) + 2;
    std::vector<double> weights(2 * half + 1, 0.0);
    const double shift = shape == 3 ? sd * (0.2 + 0.7 * uniform01(rng)) : 0.0;
    for (Symbol x = -half; x <= half; ++x) {
      const double v = static_cast<double>(x);
      double w = 0.0;
      switch (shape) {
        case 0: w = std::exp(-0.5 * v * v / second); break;
        case 1: w = std::exp(-std::abs(v) * std::sqrt(2.0) / sd); break;
        case 2: w = std::abs(v) <= std::sqrt(3.0) * sd ? 1.0 : 0.0; break;
        default: {
          const double spread = std::sqrt(std::max(1.0, second - shift * shift));
          w = std::exp(-0.5 * (v - shift) * (v - shift) / (spread * spread)) +
              std::exp(-0.5 * (v + shift) * (v + shift) / (spread * spread));
        }
      }
      weights[x + half] = w;
    }
    double total = 0.0;
    double moment = 0.0;
    for (Symbol x = -half; x <= half; ++x) {
      total += weights[x + half];
      moment += weights[x + half] * static_cast<double>(x) * static_cast<double>(x);
    }
    for (double& w : weights) w /= total;
    moment /= total;
    // Report against the realized power fraction of the integer input.
    const double realized = std::min(1.0, moment / (n * power));
    const double h = offset_entropy(weights, -half, ceil_sqrt(power));
    const double bound = offset_entropy_bound(realized, n);
    worst_margin = std::min(worst_margin, bound - h);
    bound_failures += h > bound;
  }

  bool gap_exact = true;
  for (int n = 1; n <= 16; ++n) {
    Eigen::MatrixXd codeword = Eigen::MatrixXd::Constant(2, n, 0.5);
    const std::vector<double> g(n, 1.0);
    const IntegerizeResult r = integerize(codeword, 1.0, g);
    gap_exact = gap_exact && r.gaps.user1_bits == 0.5 * n * std::log2(2.0);
  }
  const bool pass = reconstruction && bound_failures == 0 && gap_exact;
  return report(5, pass, "integer and per-symbol reductions",
                std::to_string(symbols) + " symbols reconstructed " + (reconstruction ? "exactly" : "WITH ERRORS") +
                    ", 200 distributions, " + std::to_string(bound_failures) + " bound failures" +
                    fmt(" (min margin %.3f bits), gap (n/2)log2 2 exact for n=1..16: ", worst_margin) +
                    (gap_exact ? "yes" : "no"));
}

// 6. Unpruned enumeration of every mapping x2: {0..8} -> {0..8} under G in {1, 2}.
bool criterion_pigeonhole() {
  const auto start = std::chrono::steady_clock::now();
  constexpr int kPoints = 9;
  constexpr int kLevels = 9;
  std::atomic<std::uint64_t> leaves{0};
  std::vector<int> minima(kLevels, kPoints);
  // Split on x2(0); each branch walks the remaining 9^8 mappings.
  std::vector<std::thread> workers;
  for (int first = 0; first < kLevels; ++first) {
    workers.emplace_back([&, first] {
      std::array<std::uint64_t, kPoints + 1> m1{};
      std::array<std::uint64_t, kPoints + 1> m2{};
      std::array<int, kPoints> digit{};
      m1[1] = std::uint64_t{1} << first;        // image x1 + x2 at x1 = 0
      m2[1] = std::uint64_t{1} << first;        // image 2 x1 + x2 at x1 = 0
      int best = kPoints;
      std::uint64_t count = 0;
      int depth = 1;
      digit[1] = 0;
      while (depth >= 1) {
        if (depth == kPoints) {
          const int images = std::max(std::popcount(m1[depth]), std::popcount(m2[depth]));
          best = std::min(best, images);
          ++count;
          --depth;
          if (depth >= 1) ++digit[depth];
          continue;
        }
        if (digit[depth] == kLevels) {
          --depth;
          if (depth >= 1) ++digit[depth];
          continue;
        }
        m1[depth + 1] = m1[depth] | (std::uint64_t{1} << (depth + digit[depth]));
        m2[depth + 1] = m2[depth] | (std::uint64_t{1} << (2 * depth + digit[depth]));
        ++depth;
        if (depth < kPoints) digit[depth] = 0;
      }
      minima[first] = best;
      leaves += count;
    });
  }
  for (auto& w : workers) w.join();
  const int fewest = *std::min_element(minima.begin(), minima.end());

  // Single-slope property over the 9 x 9 grid of codewords.
  std::size_t slope_failures = 0;
  std::size_t pairs = 0;
  for (Symbol a1 = 0; a1 < 9; ++a1) {
    for (Symbol a2 = 0; a2 < 9; ++a2) {
      for (Symbol b1 = 0; b1 < 9; ++b1) {
        for (Symbol b2 = 0; b2 < 9; ++b2) {
          if (a1 == b1) continue;
          ++pairs;
          const auto s = aligning_slope({a1, a2}, {b1, b2});
          if (!s) {
            ++slope_failures;
            continue;
          }
          for (std::int64_t num = -16; num <= 16; ++num) {
            for (std::int64_t den = 1; den <= 8; ++den) {
              const bool aligned = num * a1 + den * a2 == num * b1 + den * b2;
              if (aligned != (num * s->den == s->num * den)) ++slope_failures;
            }
          }
        }
      }
    }
  }
  const std::vector<Rational> channels{{1, 1}, {2, 1}};
  const PigeonholeSearch search = toy_pigeonhole_search(kPoints, kLevels - 1, channels);
  const bool pass = leaves == 387'420'489ULL && fewest >= 3 && slope_failures == 0 &&
                    static_cast<int>(search.min_max_images) == fewest;
  return report(6, pass, "toy pigeonhole",
                std::to_string(leaves.load()) + " mappings, fewest images on the better channel " +
                    std::to_string(fewest) + " (need >= 3), library search " +
                    std::to_string(search.min_max_images) + ", " + std::to_string(pairs) +
                    " pairs single-slope, " + std::to_string(slope_failures) + " failures" +
                    fmt(", %.1f s", seconds_since(start)));
}

// 7. Atomic laws rejected; known G drives H(Y2|G) to zero exactly.
bool criterion_degeneracy() {
  bool rejected = true;
  for (const std::vector<double>& atoms : {std::vector<double>{0.5, 1.5}, std::vector<double>{1.0}}) {
    DensitySpec spec;
    spec.family = "compound";
    spec.atoms = atoms;
    try {
      make_density(spec, 1e4);
      rejected = false;
    } catch (const Error& e) {
      rejected = rejected && e.kind() == ErrorKind::DegenerateDensity;
    }
  }
  try {
    ChannelDensity::uniform(1.0, 1.0);
    rejected = false;
  } catch (const Error& e) {
    rejected = rejected && e.kind() == ErrorKind::DegenerateDensity;
  }

  Rng rng = make_stream(kSeed, 7);
  std::size_t instances = 0;
  std::size_t exact_zero = 0;
  double min_unknown_h2 = 1e300;
  for (double power : {1e2, 1e3, 1e4}) {
    for (int n = 1; n <= 3; ++n) {
      const Symbol q = ceil_sqrt(power);
      std::vector<double> g(n);
      for (auto& v : g) v = 0.5 + 0.5 * uniform01(rng);
      std::set<Word> seen;
      std::vector<Word> x1;
      while (x1.size() < 6) {
        Word w(n);
        for (auto& s : w) s = static_cast<Symbol>(rng() % static_cast<std::uint64_t>(q + 1));
        if (seen.insert(w).second) x1.push_back(w);
      }
      const auto cb = IntegerCodebook::two_user(x1, zero_forcing_mapping(x1, g, power), power);
      const EntropyLedger known = difference_of_entropies_known(cb, {}, g);
      ++instances;
      exact_zero += known.h_y2 == 0.0 && known.difference == known.h_y1;
      const EntropyLedger unknown = difference_of_entropies(cb, {}, ChannelDensity::uniform(0.5, 1.5));
      min_unknown_h2 = std::min(min_unknown_h2, unknown.h_y2);
    }
  }
  const bool pass = rejected && exact_zero == instances && min_unknown_h2 > 0.0;
  return report(7, pass, "degeneracy rejection and zero-forcing contrast",
                std::string("atomic laws rejected: ") + (rejected ? "yes" : "no") + ", " +
                    std::to_string(exact_zero) + "/" + std::to_string(instances) +
                    " known-G runs with H(Y2|G) = 0 and diff = H(Y1|G)" +
                    fmt(", same mappings under unknown G keep H(Y2|G) >= %.3f bits", min_unknown_h2));
}

}  // namespace

int main() {
  bool all = true;
  all &= criterion_bound_dominance();
  all &= criterion_entropy_chain();
  all &= criterion_theorem_mechanism();
  all &= criterion_achievability();
  all &= criterion_appendix();
  all &= criterion_pigeonhole();
  all &= criterion_degeneracy();
  std::printf("%s\n", all ? "all criteria pass" : "some criteria fail");
  return all ? 0 : 1;
}
