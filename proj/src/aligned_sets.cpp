#include "aisets/aligned_sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "aisets/error.hpp"
#include "aisets/numeric.hpp"
#include "aisets/parallel.hpp"

namespace aisets {

std::vector<AlignedImageSet> partition_into_aligned_sets(const IntegerCodebook& codebook,
                                                         const CanonicalChannel& channel,
                                                         int user) {
  if (user < 0 || user >= codebook.users) {
    throw Error(ErrorKind::InvalidArgument, "user index outside the codebook");
  }
  std::map<Word, std::vector<std::size_t>> by_image;
  for (std::size_t m = 0; m < codebook.size(); ++m) {
    by_image[user_image(codebook, m, channel, user)].push_back(m);
  }
  std::vector<AlignedImageSet> sets;
  sets.reserve(by_image.size());
  for (auto& [image, members] : by_image) {
    sets.push_back({members.front(), std::move(members), image});
  }
  return sets;
}

std::vector<Interval> alignment_intervals(Symbol x, Symbol nu, Symbol offset, double lo,
                                          double hi) {
  if (!(lo < hi)) throw Error(ErrorKind::InvalidArgument, "empty gain range");
  std::vector<double> cuts{lo, hi};
  auto add_breakpoints = [&](Symbol v) {
    if (v == 0) return;
    double a = lo * static_cast<double>(v);
    double b = hi * static_cast<double>(v);
    if (a > b) std::swap(a, b);
    const double count = std::floor(b) - std::ceil(a) + 1.0;
    if (count > 1e7) throw Error(ErrorKind::InstanceTooLarge, "too many floor breakpoints");
    for (auto j = static_cast<Symbol>(std::ceil(a)); j <= static_cast<Symbol>(std::floor(b)); ++j) {
      const double c = static_cast<double>(j) / static_cast<double>(v);
      if (c > lo && c < hi) cuts.push_back(c);
    }
  };
  add_breakpoints(x);
  add_breakpoints(nu);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Interval> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (floor_product(mid, x) - floor_product(mid, nu) != offset) continue;
    if (!out.empty() && out.back().hi == cuts[i]) {
      out.back().hi = cuts[i + 1];
    } else {
      out.push_back({cuts[i], cuts[i + 1]});
    }
  }
  return out;
}

double interval_mass(const ChannelDensity& density, std::span<const Interval> intervals) {
  double mass = 0.0;
  for (const Interval& interval : intervals) {
    mass += density.interval_probability(interval.lo, interval.hi);
  }
  return std::min(1.0, mass);
}

namespace {

void require_two_user(const IntegerCodebook& codebook, std::size_t x, std::size_t nu) {
  if (codebook.users != 2) throw Error(ErrorKind::InvalidArgument, "two-user codebook required");
  if (x >= codebook.size() || nu >= codebook.size()) {
    throw Error(ErrorKind::InvalidArgument, "codeword index outside the codebook");
  }
}

// Probability that codeword x casts the image of nu at channel use t.
double slot_probability(const IntegerCodebook& codebook, std::size_t x, std::size_t nu, int t,
                        const ChannelDensity& density) {
  const Symbol x1 = codebook.row(x, 0)[t];
  const Symbol n1 = codebook.row(nu, 0)[t];
  const Symbol offset = codebook.row(nu, 1)[t] - codebook.row(x, 1)[t];
  if (x1 == n1) return offset == 0 ? 1.0 : 0.0;
  const auto intervals = alignment_intervals(x1, n1, offset, density.lo(), density.hi());
  return interval_mass(density, intervals);
}

}  // namespace

PairwiseBound pairwise_alignment_probability_bound(const IntegerCodebook& codebook,
                                                   std::size_t x, std::size_t nu,
                                                   const ChannelDensity& density) {
  require_two_user(codebook, x, nu);
  PairwiseBound result;
  if (x == nu || codebook.messages[x] == codebook.messages[nu]) return result;
  double product = std::pow(density.f_max(), codebook.length);
  for (int t = 0; t < codebook.length; ++t) {
    const Symbol x1 = codebook.row(x, 0)[t];
    const Symbol n1 = codebook.row(nu, 0)[t];
    if (x1 == n1) continue;
    SlotAlignment slot;
    slot.time = t;
    slot.difference = x1 - n1;
    slot.width_bound = 2.0 / std::abs(static_cast<double>(slot.difference));
    slot.intervals = alignment_intervals(x1, n1, codebook.row(nu, 1)[t] - codebook.row(x, 1)[t],
                                         density.lo(), density.hi());
    product *= slot.width_bound;
    result.slots.push_back(std::move(slot));
  }
  result.product = product;
  result.bound = std::min(1.0, product);
  return result;
}

double exact_alignment_probability(const IntegerCodebook& codebook, std::size_t x,
                                   std::size_t nu, const ChannelDensity& density) {
  require_two_user(codebook, x, nu);
  if (x == nu) return 1.0;
  double probability = 1.0;
  for (int t = 0; t < codebook.length && probability > 0.0; ++t) {
    probability *= slot_probability(codebook, x, nu, t, density);
  }
  return probability;
}

double analytic_set_size_bound(double f_max, int length, double power) {
  if (length < 1 || !(power >= 1.0) || !(f_max >= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "analytic bound needs n >= 1, P >= 1, f_max >= 1");
  }
  const double per_time = 1.0 + 2.0 * harmonic_number(ceil_sqrt(power));
  return 1.0 + std::pow(2.0 * f_max, length) * std::pow(per_time, length);
}

double exact_mean_set_size(const IntegerCodebook& codebook, const ChannelDensity& density) {
  const std::size_t n = codebook.size();
  double total = 0.0;
  for (std::size_t nu = 0; nu < n; ++nu) {
    for (std::size_t x = 0; x < n; ++x) total += exact_alignment_probability(codebook, x, nu, density);
  }
  return total / static_cast<double>(n);
}

AlignmentBoundReport expected_set_size(const IntegerCodebook& codebook,
                                       const ChannelDensity& density,
                                       const SetSizeOptions& options, Rng& rng) {
  codebook.validate();
  if (codebook.users != 2) throw Error(ErrorKind::InvalidArgument, "two-user codebook required");
  if (options.samples == 0) throw Error(ErrorKind::InvalidArgument, "samples must be positive");
  const std::size_t n_codewords = codebook.size();
  if (n_codewords > options.budget / options.samples) {
    throw Error(ErrorKind::InstanceTooLarge,
                "codebook size x samples exceeds the budget of " + std::to_string(options.budget));
  }

  AlignmentBoundReport report;
  report.power = codebook.power;
  report.length = codebook.length;
  report.alpha = density.alpha();
  report.f_max = density.f_max();
  report.codebook_size = n_codewords;
  report.samples = options.samples;
  report.analytic_bound = analytic_set_size_bound(report.f_max, codebook.length, codebook.power);
  report.max_width_ratio.assign(codebook.length, 0.0);

  // Monte Carlo: one RNG stream per sample keeps results thread-count independent.
  const std::uint64_t base_seed = rng();
  const ChannelDensity row_density[] = {density};
  const auto sample_values = parallel_map(options.samples, options.threads, [&](std::size_t s) {
    Rng stream = make_stream(base_seed, s);
    const CanonicalChannel channel = sample_realization(
        2, codebook.length, std::max(std::abs(density.lo()), std::abs(density.hi())),
        codebook.power, row_density, options.rho, stream);
    double squares = 0.0;
    for (const auto& set : partition_into_aligned_sets(codebook, channel)) {
      const auto size = static_cast<double>(set.members.size());
      squares += size * size;
    }
    return squares / static_cast<double>(n_codewords);
  });
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : sample_values) {
    sum += v;
    sum_sq += v * v;
  }
  const auto samples = static_cast<double>(options.samples);
  report.empirical_expected_size = sum / samples;
  if (options.samples > 1) {
    const double variance =
        std::max(0.0, (sum_sq - sum * sum / samples) / (samples - 1.0));
    report.empirical_stderr = std::sqrt(variance / samples);
  }

  if (options.rho != 0.0) {
    // Correlated gains: the per-time product no longer applies.
    report.exact_is_monte_carlo = true;
    report.exact_expected_size = report.empirical_expected_size;
    report.exact_max_expected_size = report.empirical_expected_size;
  } else {
    std::vector<double> per_nu(n_codewords, 0.0);
    for (std::size_t nu = 0; nu < n_codewords; ++nu) {
      for (std::size_t x = 0; x < n_codewords; ++x) {
        const double exact = exact_alignment_probability(codebook, x, nu, density);
        per_nu[nu] += exact;
        if (x == nu) continue;
        const PairwiseBound bound = pairwise_alignment_probability_bound(codebook, x, nu, density);
        report.pairs.push_back({x, nu, exact, bound.bound});
        if (exact > bound.bound * (1.0 + 1e-12) + 1e-15) report.pair_bound_violated = true;
        for (const SlotAlignment& slot : bound.slots) {
          if (slot.intervals.empty()) continue;
          const double span = slot.intervals.back().hi - slot.intervals.front().lo;
          double& ratio = report.max_width_ratio[slot.time];
          ratio = std::max(ratio, span / slot.width_bound);
        }
      }
    }
    report.exact_expected_size =
        std::accumulate(per_nu.begin(), per_nu.end(), 0.0) / static_cast<double>(n_codewords);
    report.exact_max_expected_size = *std::max_element(per_nu.begin(), per_nu.end());
  }

  report.size_bound_violated = report.empirical_expected_size > report.analytic_bound ||
                               report.exact_max_expected_size > report.analytic_bound;
  return report;
}

WorstMappingResult worst_case_mapping(const std::vector<Word>& x1_rows, double power,
                                      const ChannelDensity& density, Symbol x2_max,
                                      std::size_t budget, const AnnealSchedule& schedule,
                                      Rng& rng) {
  if (x1_rows.empty()) throw Error(ErrorKind::InvalidArgument, "no X1 rows");
  if (x2_max < 0 || x2_max > ceil_sqrt(power)) {
    throw Error(ErrorKind::BoundViolation, "mapping range exceeds {0, ..., ceil(sqrt(P))}");
  }
  const std::size_t rows = x1_rows.size();
  const std::size_t length = x1_rows.front().size();
  const std::size_t slots = rows * length;
  const auto alphabet = static_cast<std::size_t>(x2_max + 1);

  auto evaluate = [&](const std::vector<Word>& mapping) {
    return exact_mean_set_size(IntegerCodebook::two_user(x1_rows, mapping, power), density);
  };

  // Mapping space size, saturating at budget + 1.
  std::size_t space = 1;
  for (std::size_t i = 0; i < slots && space <= budget; ++i) {
    space = space > (budget + 1) / alphabet ? budget + 1 : space * alphabet;
  }

  WorstMappingResult result;
  result.mapping.assign(rows, Word(length, 0));
  if (rows <= 9 && space <= budget) {
    result.exhaustive = true;
    std::vector<Word> mapping(rows, Word(length, 0));
    result.expected_size = -1.0;
    for (std::size_t index = 0; index < space; ++index) {
      std::size_t code = index;
      for (std::size_t s = 0; s < slots; ++s) {
        mapping[s / length][s % length] = static_cast<Symbol>(code % alphabet);
        code /= alphabet;
      }
      const double value = evaluate(mapping);
      ++result.evaluated;
      if (value > result.expected_size) {
        result.expected_size = value;
        result.mapping = mapping;
      }
    }
    return result;
  }

  std::vector<Word> start(rows, Word(length, 0));
  for (auto& row : start) {
    for (auto& s : row) s = static_cast<Symbol>(rng() % alphabet);
  }
  auto neighbor = [&](const std::vector<Word>& current, Rng& r) {
    std::vector<Word> next = current;
    const std::size_t s = r() % slots;
    next[s / length][s % length] = static_cast<Symbol>(r() % alphabet);
    return next;
  };
  auto cost = [&](const std::vector<Word>& mapping) {
    ++result.evaluated;
    return -evaluate(mapping);
  };
  const auto annealed = anneal(start, cost, neighbor, schedule, rng);
  result.mapping = annealed.best;
  result.expected_size = -annealed.best_cost;
  return result;
}

ImageMapping build_image_mapping(const IntegerCodebook& codebook, const CanonicalChannel& channel,
                                 int user) {
  if (user < 1 || user >= codebook.users) {
    throw Error(ErrorKind::InvalidArgument, "image mapping needs 1 <= k < K");
  }
  ImageMapping mapping;
  for (std::size_t m = 0; m < codebook.size(); ++m) {
    Word image = user_image(codebook, m, channel, user - 1);
    std::vector<Word> rows(codebook.messages[m].begin(),
                           codebook.messages[m].begin() + user + 1);
    auto [it, inserted] = mapping.emplace(std::move(image), rows);
    if (!inserted && it->second != rows) {
      throw Error(ErrorKind::MalformedMapping,
                  "two messages share an image at user k-1 but map to different inputs");
    }
  }
  return mapping;
}

KUserAlignment kuser_alignment_test(const Word& image, const Word& other_image,
                                    const ImageMapping& mapping, const CanonicalChannel& channel,
                                    int user, double f_max) {
  if (user < 1 || user >= channel.users()) {
    throw Error(ErrorKind::InvalidArgument, "alignment test needs 1 <= k < K");
  }
  const auto a = mapping.find(image);
  const auto b = mapping.find(other_image);
  if (a == mapping.end() || b == mapping.end()) {
    throw Error(ErrorKind::MalformedMapping, "image has no entry in the mapping");
  }
  const std::vector<Word>& x = a->second;
  const std::vector<Word>& y = b->second;
  if (static_cast<int>(x.size()) <= user || static_cast<int>(y.size()) <= user) {
    throw Error(ErrorKind::MalformedMapping, "mapping does not cover users 1..k");
  }
  const int length = static_cast<int>(image.size());
  if (channel.length() < length) {
    throw Error(ErrorKind::InvalidArgument, "realization does not cover the images");
  }
  const double slack = static_cast<double>(channel.users());

  KUserAlignment result;
  result.aligned = true;
  result.x_bound = std::pow(f_max, length);
  double ybar_product = 1.0;
  double gbar_product = 1.0;
  for (int t = 0; t < length; ++t) {
    KUserSlot slot;
    slot.time = t;
    Symbol best = -1;
    for (int j = 0; j < user; ++j) {
      const Symbol diff = std::abs(y[j][t] - x[j][t]);
      if (diff > best) {
        best = diff;
        slot.dominant_user = j;
      }
    }
    slot.dominant_difference = y[slot.dominant_user][t] - x[slot.dominant_user][t];
    slot.image_difference = other_image[t] - image[t];

    Symbol lhs = 0;
    Symbol rhs = 0;
    for (int j = 0; j <= user; ++j) {
      lhs += floor_product(channel.coefficient(user, j, t), x[j][t]);
      rhs += floor_product(channel.coefficient(user, j, t), y[j][t]);
    }
    if (lhs != rhs && result.aligned) {
      result.aligned = false;
      result.violated_time = t;
    }

    if (slot.dominant_difference != 0) {
      slot.width_bound = 2.0 / std::abs(static_cast<double>(slot.dominant_difference));
      result.x_bound *= slot.width_bound;
      double row_sum = 0.0;
      for (int j = 0; j < user; ++j) row_sum += std::abs(channel.coefficient(user - 1, j, t));
      gbar_product *= 2.0 * row_sum;
    }
    const double dy = std::abs(static_cast<double>(slot.image_difference));
    if (dy > slack) ybar_product /= dy - slack;
    result.slots.push_back(slot);
  }
  result.gbar = std::max(1.0, gbar_product);
  result.ybar_bound = result.gbar * std::pow(f_max, length) * ybar_product;
  return result;
}

namespace {

Rational reduced(std::int64_t num, std::int64_t den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

}  // namespace

std::optional<Rational> aligning_slope(const ToyCodeword& a, const ToyCodeword& b) {
  if (a.x1 == b.x1) return std::nullopt;
  return reduced(-(b.x2 - a.x2), b.x1 - a.x1);
}

ToyReport toy_distinct_images(std::span<const ToyCodeword> codebook,
                              std::span<const Rational> channels) {
  if (channels.empty()) throw Error(ErrorKind::InvalidArgument, "toy model needs a channel set");
  for (const Rational& g : channels) {
    if (g.den <= 0) throw Error(ErrorKind::InvalidArgument, "channel denominators must be positive");
  }
  // Images scaled by the denominator: num x1 + den x2 is exact.
  auto key = [](const Rational& g, const ToyCodeword& c) { return g.num * c.x1 + g.den * c.x2; };

  ToyReport report;
  for (const Rational& g : channels) {
    std::map<std::int64_t, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < codebook.size(); ++i) classes[key(g, codebook[i])].push_back(i);
    report.image_counts.push_back(classes.size());
    std::vector<std::vector<std::size_t>> grouped;
    for (auto& [image, members] : classes) grouped.push_back(std::move(members));
    report.classes.push_back(std::move(grouped));
  }
  for (std::size_t c = 0; c < channels.size(); ++c) {
    for (const auto& members : report.classes[c]) {
      for (std::size_t other = 0; other < channels.size(); ++other) {
        if (other == c) continue;
        std::vector<std::int64_t> images;
        for (std::size_t m : members) images.push_back(key(channels[other], codebook[m]));
        std::sort(images.begin(), images.end());
        if (std::adjacent_find(images.begin(), images.end()) != images.end()) {
          report.single_slope_holds = false;
        }
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(report.image_counts.begin(), report.image_counts.end());
  report.min_images = *lo;
  report.max_images = *hi;
  report.pigeonhole_holds = report.max_images * report.max_images >= codebook.size();
  return report;
}

namespace {

// Depth-first search over mappings with incremental per-channel image
// counts. Counts only grow along a branch, so any branch whose best channel
// already reaches the incumbent can be cut without losing the minimum.
class PigeonholeDfs {
 public:
  PigeonholeDfs(int points, Symbol x2_max, std::span<const Rational> channels)
      : points_(points), x2_max_(x2_max), channels_(channels.begin(), channels.end()) {
    for (const Rational& g : channels_) {
      const std::int64_t a = std::abs(g.num) * (points - 1);
      const std::int64_t b = g.den * x2_max;
      offsets_.push_back(a);
      occupancy_.emplace_back(static_cast<std::size_t>(2 * a + b + 1), 0);
    }
    distinct_.assign(channels_.size(), 0);
    mapping_.assign(points, 0);
    best_ = static_cast<std::size_t>(points) + 1;
  }

  PigeonholeSearch run() {
    descend(0);
    PigeonholeSearch out;
    out.mappings = leaves_;
    out.min_max_images = best_;
    out.extremal_mapping = best_mapping_;
    out.all_reach_sqrt = best_ * best_ >= static_cast<std::size_t>(points_);
    return out;
  }

 private:
  std::size_t current_max() const {
    return *std::max_element(distinct_.begin(), distinct_.end());
  }

  void descend(int x1) {
    if (current_max() >= best_) return;
    if (x1 == points_) {
      ++leaves_;
      best_ = current_max();
      best_mapping_ = mapping_;
      return;
    }
    for (Symbol x2 = 0; x2 <= x2_max_; ++x2) {
      mapping_[x1] = x2;
      for (std::size_t c = 0; c < channels_.size(); ++c) {
        const auto slot = static_cast<std::size_t>(channels_[c].num * x1 + channels_[c].den * x2 +
                                                   offsets_[c]);
        if (occupancy_[c][slot]++ == 0) ++distinct_[c];
      }
      descend(x1 + 1);
      for (std::size_t c = 0; c < channels_.size(); ++c) {
        const auto slot = static_cast<std::size_t>(channels_[c].num * x1 + channels_[c].den * x2 +
                                                   offsets_[c]);
        if (--occupancy_[c][slot] == 0) --distinct_[c];
      }
    }
  }

  int points_;
  Symbol x2_max_;
  std::vector<Rational> channels_;
  std::vector<std::int64_t> offsets_;
  std::vector<std::vector<int>> occupancy_;
  std::vector<std::size_t> distinct_;
  std::vector<Symbol> mapping_;
  std::vector<Symbol> best_mapping_;
  std::size_t best_ = 0;
  std::uint64_t leaves_ = 0;
};

}  // namespace

PigeonholeSearch toy_pigeonhole_search(int points, Symbol x2_max,
                                       std::span<const Rational> channels) {
  if (points < 1 || x2_max < 0 || channels.empty()) {
    throw Error(ErrorKind::InvalidArgument, "pigeonhole search needs points, range and channels");
  }
  for (const Rational& g : channels) {
    if (g.den <= 0) throw Error(ErrorKind::InvalidArgument, "channel denominators must be positive");
  }
  return PigeonholeDfs(points, x2_max, channels).run();
}

}  // namespace aisets
