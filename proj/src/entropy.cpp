#include "aisets/entropy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include "aisets/aligned_sets.hpp"
#include "aisets/error.hpp"
#include "aisets/numeric.hpp"
#include "aisets/parallel.hpp"

namespace aisets {

namespace {

double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

void check_pmf(std::span<const double> pmf) {
  if (pmf.empty()) throw Error(ErrorKind::InvalidArgument, "pmf is empty");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw Error(ErrorKind::InvalidArgument, "pmf has negative or NaN mass");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "pmf does not sum to 1 within 1e-12");
  }
}

std::vector<double> resolve_pmf(const IntegerCodebook& codebook, std::span<const double> pmf) {
  if (pmf.empty()) return std::vector<double>(codebook.size(), 1.0 / codebook.size());
  if (pmf.size() != codebook.size()) {
    throw Error(ErrorKind::InvalidArgument, "pmf length differs from the codebook size");
  }
  check_pmf(pmf);
  return {pmf.begin(), pmf.end()};
}

// Message partition written as labels in order of first appearance, so
// equal partitions have equal label vectors.
using Labels = std::vector<std::uint32_t>;

template <typename Key>
Labels canonical_labels(const std::vector<Key>& keys) {
  std::map<Key, std::uint32_t> seen;
  Labels labels(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    labels[i] = seen.emplace(keys[i], static_cast<std::uint32_t>(seen.size())).first->second;
  }
  return labels;
}

Labels refine(const Labels& a, const Labels& b) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> keys(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) keys[i] = {a[i], b[i]};
  return canonical_labels(keys);
}

Labels slot_labels(const IntegerCodebook& codebook, int t, double g) {
  Word images(codebook.size());
  for (std::size_t m = 0; m < codebook.size(); ++m) {
    images[m] = floor_product(g, codebook.row(m, 0)[t]) + codebook.row(m, 1)[t];
  }
  return canonical_labels(images);
}

struct SlotPartition {
  Labels labels;
  double mass = 0.0;
};

// Cells of the support on which every floor(G x1(t)) is constant, merged
// when they induce the same partition of the messages.
std::vector<SlotPartition> slot_partitions(const IntegerCodebook& codebook, int t,
                                           const ChannelDensity& density) {
  std::set<Symbol> values;
  for (std::size_t m = 0; m < codebook.size(); ++m) values.insert(codebook.row(m, 0)[t]);
  const double lo = density.lo();
  const double hi = density.hi();
  std::vector<double> cuts{lo, hi};
  for (Symbol v : values) {
    if (v == 0) continue;
    const auto first = static_cast<Symbol>(std::ceil(std::min(lo * v, hi * v)));
    const auto last = static_cast<Symbol>(std::floor(std::max(lo * v, hi * v)));
    for (Symbol j = first; j <= last; ++j) {
      const double c = static_cast<double>(j) / static_cast<double>(v);
      if (c > lo && c < hi) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::map<Labels, double> merged;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mass = density.interval_probability(cuts[i], cuts[i + 1]);
    if (mass <= 0.0) continue;
    merged[slot_labels(codebook, t, 0.5 * (cuts[i] + cuts[i + 1]))] += mass;
  }
  std::vector<SlotPartition> out;
  out.reserve(merged.size());
  for (auto& [labels, mass] : merged) out.push_back({labels, mass});
  return out;
}

struct PartitionTerms {
  double h_y2 = 0.0;
  double h_y1_given_y2 = 0.0;
  double e_log_s = 0.0;
  double e_s = 0.0;
};

PartitionTerms partition_terms(const Labels& labels, const std::vector<double>& pmf) {
  const std::uint32_t blocks = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> block_mass(blocks, 0.0);
  std::vector<double> block_size(blocks, 0.0);
  for (std::size_t m = 0; m < labels.size(); ++m) {
    block_mass[labels[m]] += pmf[m];
    block_size[labels[m]] += 1.0;
  }
  // One image carries the whole pmf; rounding in the sum would leave a
  // spurious 1e-16 entropy.
  if (blocks == 1) block_mass[0] = 1.0;
  PartitionTerms terms;
  for (std::uint32_t b = 0; b < blocks; ++b) {
    terms.h_y2 += plogp(block_mass[b]);
    terms.e_log_s += block_mass[b] * std::log2(block_size[b]);
    terms.e_s += block_mass[b] * block_size[b];
  }
  for (std::size_t m = 0; m < labels.size(); ++m) {
    if (pmf[m] > 0.0) terms.h_y1_given_y2 += pmf[m] * std::log2(block_mass[labels[m]] / pmf[m]);
  }
  return terms;
}

void accumulate(PartitionTerms& total, const PartitionTerms& terms, double weight) {
  total.h_y2 += weight * terms.h_y2;
  total.h_y1_given_y2 += weight * terms.h_y1_given_y2;
  total.e_log_s += weight * terms.e_log_s;
  total.e_s += weight * terms.e_s;
}

EntropyLedger start_ledger(const IntegerCodebook& codebook, const std::vector<double>& pmf,
                           double f_max, double alpha) {
  EntropyLedger ledger;
  ledger.power = codebook.power;
  ledger.length = codebook.length;
  ledger.alpha = alpha;
  ledger.codebook_size = codebook.size();
  ledger.h_y1 = entropy_bits(pmf);
  ledger.normalizer = 0.5 * codebook.length * std::log2(codebook.power);
  ledger.log_analytic_bound =
      std::log2(analytic_set_size_bound(f_max, codebook.length, std::max(1.0, codebook.power)));
  return ledger;
}

void finish_ledger(EntropyLedger& ledger, const PartitionTerms& terms) {
  ledger.h_y2 = terms.h_y2;
  ledger.h_y1_given_y2 = terms.h_y1_given_y2;
  ledger.expected_log_set = terms.e_log_s;
  ledger.log_expected_set = std::log2(terms.e_s);
  ledger.difference = ledger.h_y1 - ledger.h_y2;
  ledger.normalized_difference =
      ledger.normalizer > 0.0 ? ledger.difference / ledger.normalizer : 0.0;
  if (ledger.exact) {
    ledger.ci_low = ledger.difference;
    ledger.ci_high = ledger.difference;
  }
}

void require_two_user(const IntegerCodebook& codebook) {
  codebook.validate();
  if (codebook.users != 2) throw Error(ErrorKind::InvalidArgument, "two-user codebook required");
}

}  // namespace

double entropy_bits(std::span<const double> pmf) {
  check_pmf(pmf);
  double h = 0.0;
  for (double p : pmf) h += plogp(p);
  return h;
}

double conditional_entropy_bits(const std::vector<std::vector<double>>& joint) {
  std::vector<double> flat;
  for (const auto& row : joint) flat.insert(flat.end(), row.begin(), row.end());
  check_pmf(flat);
  double h = 0.0;
  for (const auto& row : joint) {
    const double marginal = std::accumulate(row.begin(), row.end(), 0.0);
    for (double p : row) {
      if (p > 0.0) h += p * std::log2(marginal / p);
    }
  }
  return h;
}

bool EntropyLedger::chain_holds(double tolerance) const {
  return std::abs(chain_residual()) <= tolerance;
}

bool EntropyLedger::jensen_holds(double tolerance) const {
  return h_y1_given_y2 <= expected_log_set + tolerance &&
         expected_log_set <= log_expected_set + tolerance;
}

double output_cardinality_bound(const ChannelDensity& density, int length, double power) {
  const double q = static_cast<double>(ceil_sqrt(power));
  const double per_time = integrate(
      [&](double g) { return density.pdf(g) * std::log2((std::abs(g) + 1.0) * (q + 1.0)); },
      density.lo(), density.hi(), 32, 20);
  return length * per_time;
}

EntropyLedger difference_of_entropies_monte_carlo(const IntegerCodebook& codebook,
                                                  std::span<const double> pmf_in,
                                                  const ChannelDensity& density,
                                                  std::size_t samples, std::uint64_t seed,
                                                  int threads) {
  require_two_user(codebook);
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "Monte Carlo needs at least 2 samples");
  const std::vector<double> pmf = resolve_pmf(codebook, pmf_in);
  EntropyLedger ledger = start_ledger(codebook, pmf, density.f_max(), density.alpha());
  ledger.exact = false;
  ledger.cells = samples;
  ledger.h_y2_cardinality_bound = output_cardinality_bound(density, codebook.length, codebook.power);

  // Chunks of samples keep the per-task overhead small; each sample still
  // owns its RNG stream.
  constexpr std::size_t kChunk = 1024;
  struct Chunk {
    PartitionTerms sum;
    double h2_sq = 0.0;
  };
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  const auto partial = parallel_map(chunks, threads, [&](std::size_t c) {
    Chunk chunk;
    const std::size_t end = std::min(samples, (c + 1) * kChunk);
    for (std::size_t s = c * kChunk; s < end; ++s) {
      Rng rng = make_stream(seed, s);
      Labels labels(codebook.size(), 0);
      for (int t = 0; t < codebook.length; ++t) {
        labels = refine(labels, slot_labels(codebook, t, density.sample(rng)));
      }
      const PartitionTerms terms = partition_terms(labels, pmf);
      accumulate(chunk.sum, terms, 1.0);
      chunk.h2_sq += terms.h_y2 * terms.h_y2;
    }
    return chunk;
  });
  PartitionTerms total;
  double h2_sq = 0.0;
  for (const Chunk& chunk : partial) {
    accumulate(total, chunk.sum, 1.0);
    h2_sq += chunk.h2_sq;
  }
  const auto n = static_cast<double>(samples);
  const double mean_h2 = total.h_y2 / n;
  PartitionTerms mean;
  accumulate(mean, total, 1.0 / n);
  finish_ledger(ledger, mean);
  const double variance = std::max(0.0, (h2_sq - n * mean_h2 * mean_h2) / (n - 1.0));
  ledger.difference_stderr = std::sqrt(variance / n);
  ledger.ci_low = ledger.difference - 1.96 * ledger.difference_stderr;
  ledger.ci_high = ledger.difference + 1.96 * ledger.difference_stderr;
  return ledger;
}

EntropyLedger difference_of_entropies(const IntegerCodebook& codebook, std::span<const double> pmf_in,
                                      const ChannelDensity& density,
                                      const EntropyOptions& options) {
  require_two_user(codebook);
  const std::vector<double> pmf = resolve_pmf(codebook, pmf_in);

  const auto per_slot = parallel_map(static_cast<std::size_t>(codebook.length), options.threads,
                                     [&](std::size_t t) {
                                       return slot_partitions(codebook, static_cast<int>(t), density);
                                     });
  // Joint cells = product of per-slot partition counts, saturating past the budget.
  std::size_t cells = 1;
  const std::size_t limit = std::max<std::size_t>(1, options.budget / codebook.size());
  for (const auto& slot : per_slot) {
    cells = slot.size() > 0 && cells > limit / slot.size() ? limit + 1 : cells * slot.size();
  }
  if (cells > limit) {
    return difference_of_entropies_monte_carlo(codebook, pmf, density, options.fallback_samples,
                                               options.seed, options.threads);
  }

  EntropyLedger ledger = start_ledger(codebook, pmf, density.f_max(), density.alpha());
  ledger.cells = cells;
  ledger.h_y2_cardinality_bound = output_cardinality_bound(density, codebook.length, codebook.power);

  PartitionTerms total;
  const auto descend = [&](const auto& self, std::size_t t, const Labels& labels,
                           double mass) -> void {
    if (t == per_slot.size()) {
      accumulate(total, partition_terms(labels, pmf), mass);
      return;
    }
    for (const SlotPartition& slot : per_slot[t]) {
      self(self, t + 1, refine(labels, slot.labels), mass * slot.mass);
    }
  };
  descend(descend, 0, Labels(codebook.size(), 0), 1.0);
  finish_ledger(ledger, total);
  return ledger;
}

EntropyLedger difference_of_entropies_known(const IntegerCodebook& codebook,
                                            std::span<const double> pmf_in,
                                            std::span<const double> realization) {
  require_two_user(codebook);
  if (static_cast<int>(realization.size()) != codebook.length) {
    throw Error(ErrorKind::InvalidArgument, "realization length differs from n");
  }
  const std::vector<double> pmf = resolve_pmf(codebook, pmf_in);
  EntropyLedger ledger = start_ledger(codebook, pmf, 1.0, 0.0);
  ledger.cells = 1;
  Labels labels(codebook.size(), 0);
  const double q = static_cast<double>(codebook.symbol_limit());
  for (int t = 0; t < codebook.length; ++t) {
    labels = refine(labels, slot_labels(codebook, t, realization[t]));
    ledger.h_y2_cardinality_bound += std::log2((std::abs(realization[t]) + 1.0) * (q + 1.0));
  }
  finish_ledger(ledger, partition_terms(labels, pmf));
  return ledger;
}

std::vector<Word> zero_forcing_mapping(const std::vector<Word>& x1_rows,
                                       std::span<const double> realization, double power) {
  if (x1_rows.empty()) throw Error(ErrorKind::InvalidArgument, "no X1 rows");
  const Symbol q = ceil_sqrt(power);
  std::vector<Word> x2(x1_rows.size(), Word(realization.size(), 0));
  for (std::size_t t = 0; t < realization.size(); ++t) {
    Symbol top = std::numeric_limits<Symbol>::min();
    for (const Word& row : x1_rows) top = std::max(top, floor_product(realization[t], row.at(t)));
    if (top > q) {
      throw Error(ErrorKind::BoundViolation,
                  "cancelling the interference needs symbols beyond ceil(sqrt(P))");
    }
    for (std::size_t m = 0; m < x1_rows.size(); ++m) {
      x2[m][t] = top - floor_product(realization[t], x1_rows[m][t]);
    }
  }
  return x2;
}

MappingSearchResult minimize_over_mappings(const std::vector<Word>& x1_rows, double power,
                                           const ChannelDensity& density, Symbol x2_max,
                                           std::size_t budget, const AnnealSchedule& schedule,
                                           Rng& rng) {
  if (x1_rows.empty()) throw Error(ErrorKind::InvalidArgument, "no X1 rows");
  if (x2_max < 0 || x2_max > ceil_sqrt(power)) {
    throw Error(ErrorKind::BoundViolation, "mapping range exceeds {0, ..., ceil(sqrt(P))}");
  }
  const std::size_t length = x1_rows.front().size();
  const std::size_t slots = x1_rows.size() * length;
  const auto alphabet = static_cast<std::size_t>(x2_max + 1);
  std::size_t space = 1;
  for (std::size_t i = 0; i < slots && space <= budget; ++i) {
    space = space > (budget + 1) / alphabet ? budget + 1 : space * alphabet;
  }
  auto h_y2 = [&](const std::vector<Word>& mapping) {
    const auto codebook = IntegerCodebook::two_user(x1_rows, mapping, power);
    return difference_of_entropies(codebook, {}, density).h_y2;
  };

  MappingSearchResult result;
  if (space <= budget) {
    result.exhaustive = true;
    result.h_y2 = std::numeric_limits<double>::infinity();
    std::vector<Word> mapping(x1_rows.size(), Word(length, 0));
    for (std::size_t index = 0; index < space; ++index) {
      std::size_t code = index;
      for (std::size_t s = 0; s < slots; ++s) {
        mapping[s / length][s % length] = static_cast<Symbol>(code % alphabet);
        code /= alphabet;
      }
      const double value = h_y2(mapping);
      ++result.evaluated;
      if (value < result.h_y2) {
        result.h_y2 = value;
        result.mapping = mapping;
      }
    }
    return result;
  }
  // Heuristic: maximize alignment mass, then report the entropy it attains.
  const WorstMappingResult worst =
      worst_case_mapping(x1_rows, power, density, x2_max, 0, schedule, rng);
  result.mapping = worst.mapping;
  result.evaluated = worst.evaluated;
  result.h_y2 = h_y2(result.mapping);
  return result;
}

LimitFit fit_limit(std::span<const double> powers, std::span<const double> ratios) {
  if (powers.size() != ratios.size()) {
    throw Error(ErrorKind::InvalidArgument, "powers and ratios differ in length");
  }
  const std::set<double> distinct(powers.begin(), powers.end());
  if (distinct.size() < 3) {
    throw Error(ErrorKind::InsufficientData, "limit fit needs at least three distinct powers");
  }
  const auto rows = static_cast<Eigen::Index>(powers.size());
  Eigen::MatrixXd basis(rows, 3);
  Eigen::VectorXd target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!(powers[i] > std::numbers::e)) {
      throw Error(ErrorKind::InvalidArgument, "limit fit needs P > e");
    }
    const double log_p = std::log(powers[i]);
    basis(i, 0) = 1.0;
    basis(i, 1) = std::log(log_p) / log_p;
    basis(i, 2) = 1.0 / log_p;
    target(i) = ratios[i];
  }
  const Eigen::Vector3d coefficients = basis.colPivHouseholderQr().solve(target);
  LimitFit fit;
  fit.limit = coefficients(0);
  fit.loglog_coefficient = coefficients(1);
  fit.inverse_coefficient = coefficients(2);
  fit.residual_rms = std::sqrt((basis * coefficients - target).squaredNorm() / rows);
  return fit;
}

SumDofReport assemble_sum_dof_bound(std::span<const EntropyLedger> ledgers,
                                    std::span<const double> alphas, double tolerance) {
  SumDofReport report;
  for (double alpha : alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "alpha values must lie in [0, 1]");
    }
    report.theorem_value += alpha;
  }
  std::map<int, std::vector<const EntropyLedger*>> by_length;
  for (const EntropyLedger& ledger : ledgers) by_length[ledger.length].push_back(&ledger);
  if (by_length.empty()) throw Error(ErrorKind::InsufficientData, "no ledgers to assemble");

  for (const auto& [length, group] : by_length) {
    std::vector<double> powers;
    std::vector<double> set_ratios;
    std::vector<double> analytic_ratios;
    LengthFit fit;
    fit.length = length;
    for (const EntropyLedger* ledger : group) {
      powers.push_back(ledger->power);
      set_ratios.push_back(ledger->log_expected_set / ledger->normalizer);
      analytic_ratios.push_back(ledger->log_analytic_bound / ledger->normalizer);
      fit.alpha = std::max(fit.alpha, ledger->alpha);
      if (ledger->normalized_difference > ledger->alpha + tolerance) {
        report.warnings.push_back("n=" + std::to_string(length) + " P=" +
                                  std::to_string(ledger->power) + ": normalized difference " +
                                  std::to_string(ledger->normalized_difference) +
                                  " exceeds alpha + tolerance at finite P");
      }
    }
    fit.log_expected_set = fit_limit(powers, set_ratios);
    fit.analytic = fit_limit(powers, analytic_ratios);
    if (fit.log_expected_set.limit > fit.alpha + tolerance) report.within_theorem = false;
    report.fits.push_back(fit);
  }
  return report;
}

}  // namespace aisets
