#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aisets/anneal.hpp"
#include "aisets/density.hpp"
#include "aisets/deterministic.hpp"

namespace aisets {

/// Shannon entropy in bits. Rejects negative mass and totals off 1 by more
/// than 1e-12; zero cells contribute nothing.
double entropy_bits(std::span<const double> pmf);

/// H(A | B) in bits for a joint pmf laid out row-major as joint[b][a].
double conditional_entropy_bits(const std::vector<std::vector<double>>& joint);

/// Entropy terms of the deterministic two-user channel for one codebook and
/// input pmf, all in bits and conditioned on the channel.
struct EntropyLedger {
  double power = 0.0;
  int length = 0;
  double alpha = 0.0;
  std::size_t codebook_size = 0;

  double h_y1 = 0.0;             // H(Y1 | G)
  double h_y2 = 0.0;             // H(Y2 | G)
  double h_y1_given_y2 = 0.0;    // H(Y1 | Y2, G), computed directly
  double expected_log_set = 0.0; // E[log |S|]
  double log_expected_set = 0.0; // log E[|S|]
  double normalizer = 0.0;       // (n/2) log P
  double difference = 0.0;       // H(Y1|G) - H(Y2|G)
  double normalized_difference = 0.0;
  double log_analytic_bound = 0.0;
  double h_y2_cardinality_bound = 0.0;  // sum_t E[log((|G|+1)(Q+1))]

  bool exact = true;             // false: Monte Carlo over G
  std::size_t cells = 0;         // joint channel cells (exact) or samples (Monte Carlo)
  double difference_stderr = 0.0;
  double ci_low = 0.0;           // 95% interval on the difference
  double ci_high = 0.0;

  double chain_residual() const { return h_y1 - h_y2 - h_y1_given_y2; }
  bool chain_holds(double tolerance = 1e-9) const;
  bool jensen_holds(double tolerance = 1e-9) const;
};

struct EntropyOptions {
  std::size_t budget = 2'000'000;      // joint cells x codebook size
  std::size_t fallback_samples = 200'000;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Exact ledger by cell decomposition of the i.i.d. channel, falling back to
/// Monte Carlo with a confidence interval when the cell count exceeds the
/// budget. `pmf` is over codebook messages (empty means uniform).
EntropyLedger difference_of_entropies(const IntegerCodebook& codebook, std::span<const double> pmf,
                                      const ChannelDensity& density,
                                      const EntropyOptions& options = {});

/// Monte Carlo ledger over `samples` channel draws; independent of the
/// cell decomposition and used to cross-check it.
EntropyLedger difference_of_entropies_monte_carlo(const IntegerCodebook& codebook,
                                                  std::span<const double> pmf,
                                                  const ChannelDensity& density,
                                                  std::size_t samples, std::uint64_t seed,
                                                  int threads = 1);

/// Ledger when the transmitter knows the realization exactly.
EntropyLedger difference_of_entropies_known(const IntegerCodebook& codebook,
                                            std::span<const double> pmf,
                                            std::span<const double> realization);

/// X2 rows that cancel the interference of a known realization:
/// X2(x)(t) = c(t) - floor(G(t) x(t)) with c(t) the largest floor value, so
/// every image equals c. Throws BoundViolation if c(t) exceeds ceil(sqrt(P)).
std::vector<Word> zero_forcing_mapping(const std::vector<Word>& x1_rows,
                                       std::span<const double> realization, double power);

/// sum_t E[log2((|G|+1)(ceil(sqrt P)+1))], the output-cardinality cap on H(Y2|G).
double output_cardinality_bound(const ChannelDensity& density, int length, double power);

struct MappingSearchResult {
  std::vector<Word> mapping;
  double h_y2 = 0.0;
  bool exhaustive = false;
  std::size_t evaluated = 0;
};

/// Minimizes H(Y2 | G) over mappings X2 = L(X1) with symbols in
/// {0..x2_max}, uniform input. Exhaustive (and certified) when
/// (x2_max+1)^(rows n) <= budget; otherwise simulated annealing on the
/// exact alignment mass, labelled heuristic.
MappingSearchResult minimize_over_mappings(const std::vector<Word>& x1_rows, double power,
                                           const ChannelDensity& density, Symbol x2_max,
                                           std::size_t budget, const AnnealSchedule& schedule,
                                           Rng& rng);

/// Extrapolated P -> infinity value of a normalized ratio r(P) by least
/// squares on the basis {1, log log P / log P, 1 / log P}. Needs at least
/// three distinct powers.
struct LimitFit {
  double limit = 0.0;
  double loglog_coefficient = 0.0;
  double inverse_coefficient = 0.0;
  double residual_rms = 0.0;
};
LimitFit fit_limit(std::span<const double> powers, std::span<const double> ratios);

struct LengthFit {
  int length = 0;
  double alpha = 0.0;                  // largest alpha among the ledgers of this n
  LimitFit log_expected_set;           // log E|S| / ((n/2) log P)
  LimitFit analytic;                   // log analytic bound / ((n/2) log P)
};

struct SumDofReport {
  double theorem_value = 1.0;          // 1 + sum alpha
  std::vector<LengthFit> fits;         // one per blocklength, ascending n
  std::vector<std::string> warnings;   // finite-P excess over alpha + tolerance
  bool within_theorem = true;          // every fitted limit <= alpha + tolerance
};

/// Assembles ledgers computed across powers into the sum-DoF picture.
/// Throws InsufficientData unless every blocklength has ledgers at three or
/// more distinct powers.
SumDofReport assemble_sum_dof_bound(std::span<const EntropyLedger> ledgers,
                                    std::span<const double> alphas, double tolerance = 0.05);

}  // namespace aisets
