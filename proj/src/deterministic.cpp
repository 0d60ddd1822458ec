#include "aisets/deterministic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "aisets/error.hpp"
#include "aisets/numeric.hpp"

namespace aisets {

Symbol paper_floor(double x) {
  if (!std::isfinite(x) || std::abs(x) >= 0x1.0p62) {
    throw Error(ErrorKind::InvalidArgument, "paper_floor needs a finite, representable value");
  }
  return static_cast<Symbol>(std::trunc(x));
}

Symbol floor_product(double g, Symbol x) {
  if (x == 0 || g == 0.0) return 0;
  if (!std::isfinite(g)) throw Error(ErrorKind::InvalidArgument, "non-finite channel value");
  int exponent = 0;
  const double fraction = std::frexp(g, &exponent);
  // g = mantissa * 2^shift exactly, |mantissa| < 2^53.
  const auto mantissa = static_cast<std::int64_t>(std::ldexp(fraction, 53));
  const int shift = exponent - 53;
  const __int128 product = static_cast<__int128>(mantissa) * x;
  const __int128 magnitude = product < 0 ? -product : product;
  __int128 truncated = 0;
  if (shift >= 0) {
    if (shift > 60) throw Error(ErrorKind::InvalidArgument, "channel value too large");
    truncated = magnitude << shift;
  } else if (-shift < 127) {
    truncated = magnitude >> (-shift);
  }
  if (truncated > static_cast<__int128>(std::numeric_limits<Symbol>::max())) {
    throw Error(ErrorKind::InvalidArgument, "product overflows a 64-bit symbol");
  }
  const auto result = static_cast<Symbol>(truncated);
  return product < 0 ? -result : result;
}

Symbol IntegerCodebook::symbol_limit() const { return ceil_sqrt(power); }

void IntegerCodebook::validate() const {
  if (users < 1 || length < 1) {
    throw Error(ErrorKind::InvalidArgument, "codebook needs at least one user and one symbol");
  }
  if (messages.empty()) throw Error(ErrorKind::InvalidArgument, "codebook is empty");
  const Symbol limit = symbol_limit();
  for (std::size_t m = 0; m < messages.size(); ++m) {
    if (static_cast<int>(messages[m].size()) != users) {
      throw Error(ErrorKind::InvalidArgument,
                  "message " + std::to_string(m) + " does not have one row per user");
    }
    for (const Word& row : messages[m]) {
      if (static_cast<int>(row.size()) != length) {
        throw Error(ErrorKind::InvalidArgument, "row length differs from n");
      }
      for (Symbol s : row) {
        if (s < 0 || s > limit) {
          throw Error(ErrorKind::BoundViolation,
                      "symbol " + std::to_string(s) + " outside {0, ..., ceil(sqrt(P))}");
        }
      }
    }
  }
  if (users == 2) {
    std::set<Word> seen;
    for (const auto& message : messages) {
      if (!seen.insert(message[0]).second) {
        throw Error(ErrorKind::MalformedMapping, "X1 rows repeat, so X2 = L(X1) is not a function");
      }
    }
  } else {
    std::set<std::vector<Word>> seen(messages.begin(), messages.end());
    if (seen.size() != messages.size()) {
      throw Error(ErrorKind::MalformedMapping, "codebook repeats a codeword");
    }
  }
}

IntegerCodebook IntegerCodebook::two_user(std::vector<Word> x1_rows, std::vector<Word> x2_rows,
                                          double power) {
  if (x1_rows.size() != x2_rows.size() || x1_rows.empty()) {
    throw Error(ErrorKind::MalformedMapping, "mapping table must cover every X1 row");
  }
  IntegerCodebook codebook;
  codebook.users = 2;
  codebook.length = static_cast<int>(x1_rows.front().size());
  codebook.power = power;
  codebook.messages.reserve(x1_rows.size());
  for (std::size_t m = 0; m < x1_rows.size(); ++m) {
    codebook.messages.push_back({std::move(x1_rows[m]), std::move(x2_rows[m])});
  }
  codebook.validate();
  return codebook;
}

Word user_image(const IntegerCodebook& codebook, std::size_t message,
                const CanonicalChannel& channel, int user) {
  if (channel.length() < codebook.length || channel.users() < codebook.users) {
    throw Error(ErrorKind::InvalidArgument, "realization does not cover the codebook");
  }
  const auto& rows = codebook.messages.at(message);
  Word image(codebook.length);
  for (int t = 0; t < codebook.length; ++t) {
    Symbol value = rows[user][t];
    for (int i = 0; i < user; ++i) value += floor_product(channel.coefficient(user, i, t), rows[i][t]);
    image[t] = value;
  }
  return image;
}

DeterministicOutput deterministic_output(const IntegerCodebook& codebook, std::size_t message,
                                         const CanonicalChannel& channel) {
  DeterministicOutput out;
  out.outputs.reserve(codebook.users);
  for (int k = 0; k < codebook.users; ++k) {
    out.outputs.push_back(user_image(codebook, message, channel, k));
  }
  return out;
}

namespace {

double integer_gap_at(double g) { return 0.5 * std::log2((g + 1.0) * (g + 1.0) + 1.0); }

void require_power(const Eigen::MatrixXd& codeword, double power) {
  if (codeword.rows() != 2 || codeword.cols() < 1) {
    throw Error(ErrorKind::InvalidArgument, "integerize expects a 2 x n real codeword");
  }
  const double average = codeword.squaredNorm() / static_cast<double>(codeword.cols());
  if (average > power * (1.0 + 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "codeword violates the per-codeword power constraint");
  }
}

std::vector<Word> floor_codeword(const Eigen::MatrixXd& codeword) {
  std::vector<Word> out(codeword.rows(), Word(codeword.cols()));
  for (Eigen::Index k = 0; k < codeword.rows(); ++k) {
    for (Eigen::Index t = 0; t < codeword.cols(); ++t) out[k][t] = paper_floor(codeword(k, t));
  }
  return out;
}

}  // namespace

double user2_integer_gap(const ChannelDensity& density) {
  if (!density.gaussian_shape()) {
    // Antiderivative of ln(u^2 + 1) with u = g + 1.
    const auto antiderivative = [](double u) {
      return u * std::log(u * u + 1.0) - 2.0 * u + 2.0 * std::atan(u);
    };
    const double a = density.lo() + 1.0;
    const double b = density.hi() + 1.0;
    return (antiderivative(b) - antiderivative(a)) / (b - a) / (2.0 * kLn2);
  }
  return integrate([&](double g) { return density.pdf(g) * integer_gap_at(g); }, density.lo(),
                   density.hi(), 32, 20);
}

IntegerizeResult integerize(const Eigen::MatrixXd& codeword, double power,
                            std::span<const double> realization) {
  require_power(codeword, power);
  if (static_cast<Eigen::Index>(realization.size()) != codeword.cols()) {
    throw Error(ErrorKind::InvalidArgument, "realization length differs from n");
  }
  IntegerizeResult result;
  result.codeword = floor_codeword(codeword);
  const auto n = static_cast<double>(codeword.cols());
  result.gaps.user1_bits = 0.5 * n;  // (n/2) log2(2)
  for (double g : realization) {
    result.gaps.user2_per_time.push_back(integer_gap_at(g));
    result.gaps.user2_bits += result.gaps.user2_per_time.back();
  }
  return result;
}

IntegerizeResult integerize(const Eigen::MatrixXd& codeword, double power,
                            const ChannelDensity& density) {
  require_power(codeword, power);
  IntegerizeResult result;
  result.codeword = floor_codeword(codeword);
  const auto n = static_cast<double>(codeword.cols());
  result.gaps.user1_bits = 0.5 * n;
  const double per_time = user2_integer_gap(density);
  result.gaps.user2_per_time.assign(codeword.cols(), per_time);
  result.gaps.user2_bits = per_time * n;
  return result;
}

ModReduction mod_reduce_with_modulus(const std::vector<Word>& codeword, Symbol modulus) {
  if (modulus < 1) throw Error(ErrorKind::InvalidArgument, "modulus must be positive");
  ModReduction out;
  out.modulus = modulus;
  out.per_symbol.reserve(codeword.size());
  out.offset.reserve(codeword.size());
  for (const Word& row : codeword) {
    Word low(row.size());
    Word high(row.size());
    for (std::size_t t = 0; t < row.size(); ++t) {
      const Symbol x = row[t];
      low[t] = positive_mod(x, modulus);
      high[t] = x - low[t];
      if (low[t] + high[t] != x) out.reconstruction_holds = false;
      // Integer division truncates toward zero, matching paper_floor.
      const Symbol decomposed = modulus * (x / modulus) - (x < 0 ? modulus : 0) + low[t];
      if (decomposed != x) ++out.decomposition_exceptions;
    }
    out.per_symbol.push_back(std::move(low));
    out.offset.push_back(std::move(high));
  }
  return out;
}

ModReduction mod_reduce(const std::vector<Word>& codeword, double power) {
  ModReduction out = mod_reduce_with_modulus(codeword, ceil_sqrt(power));
  if (!codeword.empty() && !codeword.front().empty()) {
    double energy = 0.0;
    for (const Word& row : codeword) {
      for (Symbol x : row) energy += static_cast<double>(x) * static_cast<double>(x);
    }
    out.power_satisfied = energy / static_cast<double>(codeword.front().size()) <= power;
  }
  return out;
}

std::vector<Symbol> offset_slack(const std::vector<Word>& codeword, Symbol modulus,
                                 std::span<const double> realization) {
  if (codeword.size() != 2 || codeword[0].size() != realization.size()) {
    throw Error(ErrorKind::InvalidArgument, "offset_slack expects a 2 x n codeword and n gains");
  }
  std::vector<Symbol> slack(realization.size());
  for (std::size_t t = 0; t < realization.size(); ++t) {
    const double g = realization[t];
    const Symbol x1 = codeword[0][t];
    const Symbol x2 = codeword[1][t];
    const Symbol low1 = positive_mod(x1, modulus);
    const Symbol low2 = positive_mod(x2, modulus);
    const Symbol full = floor_product(g, x1) + x2;
    const Symbol reduced = floor_product(g, low1) + low2;
    const Symbol offset = floor_product(g, x1 - low1) + (x2 - low2);
    slack[t] = full - reduced - offset;
  }
  return slack;
}

double offset_entropy_bound(double power_fraction, int length) {
  if (!(power_fraction >= 0.0 && power_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "power fraction must lie in [0, 1]");
  }
  if (length < 1) throw Error(ErrorKind::InvalidArgument, "blocklength must be positive");
  const double e_ln2 = std::numbers::e * kLn2;
  const double np = length * power_fraction;
  return (3.0 + 4.0 * std::max(1.0, np)) / e_ln2 + 6.0 * np + 2.0 / e_ln2;
}

double offset_entropy_bound_summed(int length) {
  if (length < 1) throw Error(ErrorKind::InvalidArgument, "blocklength must be positive");
  return length * (1.0 + 13.0 / (std::numbers::e * kLn2) + 6.0);
}

}  // namespace aisets
