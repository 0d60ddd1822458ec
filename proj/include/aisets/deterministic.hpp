#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "aisets/channel.hpp"
#include "aisets/density.hpp"

namespace aisets {

using Symbol = std::int64_t;
using Word = std::vector<Symbol>;  // one user's symbols over [1:n]

/// Floor as used throughout the converse: largest integer <= x for x > 0,
/// smallest integer >= x for x < 0. That is truncation toward zero, which
/// differs from std::floor on negative non-integers.
Symbol paper_floor(double x);

/// paper_floor(g * x) evaluated on the exact rational value of the double g,
/// so floor-boundary ties are resolved identically on every platform.
Symbol floor_product(double g, Symbol x);

/// Message-indexed integer codebook of the deterministic channel.
///
/// `messages[m][k]` is user k's row (length n) for message m. For two users
/// the second row of each message is the mapping table entry
/// X2 = L(X1); the X1 rows must then be distinct so that L is a function.
struct IntegerCodebook {
  int users = 2;
  int length = 1;
  double power = 1.0;
  std::vector<std::vector<Word>> messages;

  std::size_t size() const { return messages.size(); }
  const Word& row(std::size_t message, int user) const { return messages[message][user]; }

  /// ceil(sqrt(P)): every symbol must lie in {0, ..., symbol_limit()}.
  Symbol symbol_limit() const;

  void validate() const;

  /// Two-user codebook from X1 rows and the mapping table X2 = L(X1).
  static IntegerCodebook two_user(std::vector<Word> x1_rows, std::vector<Word> x2_rows,
                                  double power);
};

/// Outputs Y_k(t) of one message, indexed [k][t].
struct DeterministicOutput {
  std::vector<Word> outputs;
};

/// Y_1(t) = X_1(t), Y_k(t) = sum_{i<k} floor(G_ki(t) X_i(t)) + X_k(t).
DeterministicOutput deterministic_output(const IntegerCodebook& codebook, std::size_t message,
                                         const CanonicalChannel& channel);

/// Output sequence of one user only.
Word user_image(const IntegerCodebook& codebook, std::size_t message,
                const CanonicalChannel& channel, int user);

/// Upper bounds (bits) on the mutual information lost by flooring a real
/// codeword of the canonical channel.
struct GapReport {
  double user1_bits = 0.0;
  double user2_bits = 0.0;
  std::vector<double> user2_per_time;
};

struct IntegerizeResult {
  std::vector<Word> codeword;  // [user][t], paper_floor of the real inputs
  GapReport gaps;
};

/// Floors a real 2 x n codeword. User 1 loses at most (n/2) log 2 bits;
/// user 2 at most sum_t E[(1/2) log((G(t) + 1)^2 + 1)] bits, with G(t)
/// either a known realization or drawn from `density` at every t.
IntegerizeResult integerize(const Eigen::MatrixXd& codeword, double power,
                            std::span<const double> realization);
IntegerizeResult integerize(const Eigen::MatrixXd& codeword, double power,
                            const ChannelDensity& density);

/// E[(1/2) log2((G + 1)^2 + 1)] under `density`.
double user2_integer_gap(const ChannelDensity& density);

struct ModReduction {
  Symbol modulus = 1;
  std::vector<Word> per_symbol;  // X mod Q, in {0, ..., Q-1}
  std::vector<Word> offset;      // X - (X mod Q), a multiple of Q
  bool reconstruction_holds = true;
  /// Symbols where Q*floor(X/Q) - Q*1(X<0) + (X mod Q) != X with the
  /// truncating floor. This happens exactly at negative multiples of Q.
  std::size_t decomposition_exceptions = 0;
  bool power_satisfied = true;
};

/// Splits an integer codeword into a per-symbol-constrained part and an
/// offset using Q = ceil(sqrt(P)).
ModReduction mod_reduce(const std::vector<Word>& codeword, double power);
ModReduction mod_reduce_with_modulus(const std::vector<Word>& codeword, Symbol modulus);

/// X mod Q landing in {0, ..., Q-1} for either sign of X.
inline Symbol positive_mod(Symbol x, Symbol q) {
  const Symbol r = x % q;
  return r < 0 ? r + q : r;
}

/// Delta(t) in floor(G X1) + X2 = [floor(G Xbar1) + Xbar2] + [floor(G Xhat1) + Xhat2] + Delta(t)
/// for a two-user integer codeword, evaluated on a realization.
std::vector<Symbol> offset_slack(const std::vector<Word>& codeword, Symbol modulus,
                                 std::span<const double> realization);

/// Upper bound (bits) on H(floor(floor(X1(t)) / Q)) for per-time power
/// fraction p_t = E[floor(X1(t))^2] / (nP):
///   (3 + 4 max(1, n p_t)) / (e ln 2) + 6 n p_t + 2 / (e ln 2).
double offset_entropy_bound(double power_fraction, int length);

/// The bound summed over t under sum_t p_t <= 1: n (1 + 13/(e ln 2) + 6).
double offset_entropy_bound_summed(int length);

}  // namespace aisets
