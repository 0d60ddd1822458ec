#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "aisets/anneal.hpp"
#include "aisets/channel.hpp"
#include "aisets/density.hpp"
#include "aisets/deterministic.hpp"

namespace aisets {

/// All codewords casting one image at the unintended receiver for a fixed
/// realization. `representative` is the smallest member index.
struct AlignedImageSet {
  std::size_t representative = 0;
  std::vector<std::size_t> members;
  Word image;
};

/// Partitions the codebook by the exact integer image seen by `user`
/// (default: user 2, zero-based index 1). Sets come out ordered by image.
std::vector<AlignedImageSet> partition_into_aligned_sets(const IntegerCodebook& codebook,
                                                         const CanonicalChannel& channel,
                                                         int user = 1);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Set of gains G in (lo, hi) with floor(G x) - floor(G nu) == offset, as a
/// finite union of intervals. The map G -> floor(G x) only jumps at k/x, so
/// the set is found exactly by enumerating those breakpoints.
std::vector<Interval> alignment_intervals(Symbol x, Symbol nu, Symbol offset, double lo,
                                          double hi);

double interval_mass(const ChannelDensity& density, std::span<const Interval> intervals);

/// Admissible gains at one channel use where the two codewords differ.
struct SlotAlignment {
  int time = 0;
  Symbol difference = 0;
  std::vector<Interval> intervals;
  double width_bound = 0.0;  // 2 / |difference|
};

struct PairwiseBound {
  double bound = 1.0;        // min(1, product)
  double product = 1.0;      // f_max^n prod_{t: diff} 2/|diff|
  std::vector<SlotAlignment> slots;
};

/// f_max^n prod_{t: x(t) != nu(t)} 2 / |x(t) - nu(t)| for codewords x and nu
/// of a two-user codebook (indices), with the admissible G(t) intervals.
PairwiseBound pairwise_alignment_probability_bound(const IntegerCodebook& codebook,
                                                   std::size_t x, std::size_t nu,
                                                   const ChannelDensity& density);

/// Exact P(x in S_nu(G)) for i.i.d. gains, from the interval decomposition
/// of each channel use.
double exact_alignment_probability(const IntegerCodebook& codebook, std::size_t x,
                                   std::size_t nu, const ChannelDensity& density);

/// 1 + (2 f_max)^n (1 + sum_{d=1}^{ceil(sqrt P)} 2/d)^n, exact at finite P.
double analytic_set_size_bound(double f_max, int length, double power);

struct PairRecord {
  std::size_t x = 0;
  std::size_t nu = 0;
  double exact = 0.0;
  double bound = 1.0;
};

struct AlignmentBoundReport {
  double power = 0.0;
  int length = 0;
  double alpha = 0.0;
  double f_max = 1.0;
  std::size_t codebook_size = 0;
  std::size_t samples = 0;

  std::vector<PairRecord> pairs;
  double empirical_expected_size = 0.0;  // Monte Carlo over G, uniform codeword
  double empirical_stderr = 0.0;
  double exact_expected_size = 0.0;      // interval decomposition, uniform codeword
  double exact_max_expected_size = 0.0;  // max over nu of E|S_nu|
  bool exact_is_monte_carlo = false;     // correlated gains fall back to sampling
  double analytic_bound = 0.0;
  std::vector<double> max_width_ratio;   // per t: admissible span / (2/|diff|), <= 1

  bool pair_bound_violated = false;
  bool size_bound_violated = false;
  bool falsified() const { return pair_bound_violated || size_bound_violated; }
};

struct SetSizeOptions {
  std::size_t samples = 2000;
  std::size_t budget = 50'000'000;  // max codebook size * samples
  double rho = 0.0;                 // AR(1) correlation across time
  int threads = 1;
};

/// Expected aligned-set size by Monte Carlo and by exact interval
/// integration, against the harmonic-sum bound. Throws InstanceTooLarge
/// when size * samples exceeds the budget.
AlignmentBoundReport expected_set_size(const IntegerCodebook& codebook,
                                       const ChannelDensity& density,
                                       const SetSizeOptions& options, Rng& rng);

/// Mean over nu of sum_x P(x in S_nu) for i.i.d. gains (exact).
double exact_mean_set_size(const IntegerCodebook& codebook, const ChannelDensity& density);

/// Searches X2 mappings (symbols in {0..x2_max}) for the largest exact mean
/// aligned-set size. Exhaustive when the codebook has at most 9 rows and
/// the mapping space fits the budget, simulated annealing otherwise.
struct WorstMappingResult {
  std::vector<Word> mapping;
  double expected_size = 0.0;
  bool exhaustive = false;
  std::size_t evaluated = 0;
};

WorstMappingResult worst_case_mapping(const std::vector<Word>& x1_rows, double power,
                                      const ChannelDensity& density, Symbol x2_max,
                                      std::size_t budget, const AnnealSchedule& schedule,
                                      Rng& rng);

/// ybar_{k-1} sequence -> (x_1, ..., x_k) rows that produced it.
using ImageMapping = std::map<Word, std::vector<Word>>;

/// Builds the mapping L from user k-1's images to the first k users' rows
/// (user index zero-based). Throws MalformedMapping if two messages share an
/// image at user k-1 but differ in their rows.
ImageMapping build_image_mapping(const IntegerCodebook& codebook, const CanonicalChannel& channel,
                                 int user);

struct KUserSlot {
  int time = 0;
  int dominant_user = 0;         // j*(t), zero-based
  Symbol dominant_difference = 0;
  double width_bound = 0.0;      // 2 / |difference|, 0 when the rows agree
  Symbol image_difference = 0;   // ybar'(t) - ybar(t) at user k-1
};

struct KUserAlignment {
  bool aligned = false;
  std::optional<int> violated_time;
  std::vector<KUserSlot> slots;
  double gbar = 1.0;        // max(1, prod_{t: diff} 2 sum_j |G_{k-1,j}(t)|)
  double ybar_bound = 1.0;  // gbar f_max^n prod_{t: |dy|>K} 1/(|dy| - K)
  double x_bound = 1.0;     // f_max^n prod_{t: diff} 2/|diff|
};

/// Tests whether two images of user k-1 land on one image at user k, with
/// G_kk(t) = 1. `user` is zero-based k (>= 1).
KUserAlignment kuser_alignment_test(const Word& image, const Word& other_image,
                                    const ImageMapping& mapping, const CanonicalChannel& channel,
                                    int user, double f_max = 1.0);

/// Exact rational channel gain p/q for the noise-free toy model.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

struct ToyCodeword {
  Symbol x1 = 0;
  Symbol x2 = 0;
};

struct ToyReport {
  std::vector<std::size_t> image_counts;             // per channel
  std::vector<std::vector<std::vector<std::size_t>>> classes;  // per channel
  bool single_slope_holds = true;
  std::size_t max_images = 0;
  std::size_t min_images = 0;
  bool pigeonhole_holds = false;  // max_images^2 >= |codebook|
};

/// Counts distinct images G x1 + x2 per channel (no noise, n = 1, exact
/// arithmetic) and checks that codewords sharing an image under one channel
/// are pairwise separated under every other channel.
ToyReport toy_distinct_images(std::span<const ToyCodeword> codebook,
                              std::span<const Rational> channels);

/// Unique G aligning two codewords with x1 != x1': -(x2' - x2) / (x1' - x1).
std::optional<Rational> aligning_slope(const ToyCodeword& a, const ToyCodeword& b);

struct PigeonholeSearch {
  std::uint64_t mappings = 0;
  std::size_t min_max_images = 0;  // min over mappings of max over channels
  std::vector<Symbol> extremal_mapping;
  bool all_reach_sqrt = false;
};

/// Enumerates every mapping x2: {0..points-1} -> {0..x2_max} on the
/// codebook x1 = 0..points-1 and records the fewest images the best channel
/// of the set can be held to.
PigeonholeSearch toy_pigeonhole_search(int points, Symbol x2_max,
                                       std::span<const Rational> channels);

}  // namespace aisets
