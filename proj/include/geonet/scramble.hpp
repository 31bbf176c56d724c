#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "geonet/digits.hpp"
#include "geonet/nets.hpp"

namespace geonet {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Small counter-based stream: the k-th output is mix64(state + k * gamma).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// Integer in [0, bound), multiply-shift reduction.
  std::uint32_t below(std::uint32_t bound) {
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct ScrambleKey {
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
};

/// A node of the permutation tree of one coordinate: the permutation applied
/// to digit k+1 is a function of (key, coordinate, a_1..a_k) only.
struct TreeNode {
  std::uint64_t id;
  int coordinate;
  int level;
};

/// Source of node permutations. The scrambler walks the tree; the source maps
/// (node, digit) to the permuted digit.
template <class S>
concept PermutationSource = requires(const S& src, TreeNode node, int coordinate, int base, Digit d) {
  { src.root(coordinate) } -> std::same_as<TreeNode>;
  { src.child(node, d) } -> std::same_as<TreeNode>;
  { src.permute(node, base, d) } -> std::convertible_to<Digit>;
};

/// Keyed-hash permutation tree. Each node's permutation of Z_b is a
/// Fisher-Yates shuffle driven by a stream seeded from the node hash, so the
/// tree is never stored.
class HashedPermutations {
 public:
  explicit HashedPermutations(ScrambleKey key)
      : key_(key), base_hash_(mix64(mix64(key.seed ^ 0x5ca1ab1e0ddba11ULL) ^ mix64(key.replicate + 0x243f6a8885a308d3ULL))) {}

  const ScrambleKey& key() const { return key_; }

  TreeNode root(int coordinate) const {
    return {mix64(base_hash_ ^ mix64(static_cast<std::uint64_t>(coordinate) + 0x13198a2e03707344ULL)), coordinate, 0};
  }

  TreeNode child(TreeNode node, Digit d) const {
    return {mix64(node.id + (static_cast<std::uint64_t>(d) + 1) * 0xa4093822299f31d0ULL), node.coordinate, node.level + 1};
  }

  Digit permute(TreeNode node, int base, Digit d) const {
    if (base == 2) return static_cast<Digit>(d ^ (node.id >> 63));
    std::array<Digit, kMaxBase> perm{};
    fill_permutation(node, base, std::span<Digit>(perm.data(), static_cast<std::size_t>(base)));
    return perm[d];
  }

  /// The full permutation held by a node (used for inspection and tests).
  void fill_permutation(TreeNode node, int base, std::span<Digit> out) const {
    if (base == 2) {
      out[0] = static_cast<Digit>(node.id >> 63);
      out[1] = static_cast<Digit>(1 - out[0]);
      return;
    }
    std::iota(out.begin(), out.end(), Digit{0});
    SplitMix64 rng(node.id);
    for (int i = base - 1; i > 0; --i) {
      auto j = rng.below(static_cast<std::uint32_t>(i + 1));
      std::swap(out[static_cast<std::size_t>(i)], out[j]);
    }
  }

 private:
  ScrambleKey key_;
  std::uint64_t base_hash_;
};

static_assert(PermutationSource<HashedPermutations>);

/// Nested uniform scramble of one coordinate's digits:
/// out_{k+1} = pi_{a_1..a_k}(a_{k+1}).
template <PermutationSource Source>
void scramble_digits(const Source& src, int coordinate, int base, std::span<const Digit> in, std::span<Digit> out) {
  TreeNode node = src.root(coordinate);
  for (std::size_t k = 0; k < in.size(); ++k) {
    out[k] = static_cast<Digit>(src.permute(node, base, in[k]));
    node = src.child(node, in[k]);
  }
}

template <PermutationSource Source>
PointSet scramble_point_set(const PointSet& ps, const Source& src) {
  PointSet out = ps;
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (int j = 0; j < ps.dims(); ++j) scramble_digits(src, j, ps.base(), ps.coord(i, j), out.coord(i, j));
  return out;
}

inline PointSet scramble_point_set(const PointSet& ps, ScrambleKey key) {
  return scramble_point_set(ps, HashedPermutations(key));
}

inline DigitVector scramble(const DigitVector& u, int coordinate, const HashedPermutations& src) {
  std::vector<Digit> out(u.digits().size());
  scramble_digits(src, coordinate, u.base(), u.digits(), out);
  return DigitVector(u.base(), std::move(out));
}

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  std::size_t samples = 0;
};

/// Pearson chi-square of observed counts against expected counts.
inline ChiSquareResult chi_square(std::span<const std::uint64_t> observed, std::span<const double> expected) {
  ChiSquareResult r;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    const double diff = static_cast<double>(observed[c]) - expected[c];
    r.statistic += diff * diff / expected[c];
    r.samples += observed[c];
  }
  r.dof = static_cast<int>(observed.size()) - 1;
  return r;
}

/// Scrambles one fixed point under R independent trees and tests the
/// depth-k prefix cell of the result against the uniform multinomial null.
/// `make_source(r)` returns the permutation source of trial r.
template <std::invocable<std::size_t> MakeSource>
ChiSquareResult uniformity_check(std::span<const DigitVector> point, MakeSource&& make_source, std::size_t trials, int level) {
  if (point.empty()) throw std::invalid_argument("uniformity_check: empty point");
  const int b = point[0].base();
  const int s = static_cast<int>(point.size());
  if (level < 1) throw std::invalid_argument("uniformity_check: level must be positive");
  for (const auto& c : point)
    if (c.base() != b || c.depth() < level) throw std::invalid_argument("uniformity_check: inconsistent coordinates");
  const std::uint64_t cells = ipow(b, level * s);
  if (trials < 50 * cells)
    throw std::invalid_argument("uniformity_check: need at least 50 trials per cell");

  std::vector<std::uint64_t> counts(static_cast<std::size_t>(cells), 0);
  std::vector<Digit> buf(static_cast<std::size_t>(level));
  for (std::size_t r = 0; r < trials; ++r) {
    const auto src = make_source(r);
    std::uint64_t cell = 0;
    for (int j = 0; j < s; ++j) {
      scramble_digits(src, j, b, point[static_cast<std::size_t>(j)].digits().first(static_cast<std::size_t>(level)), buf);
      for (Digit d : buf) cell = cell * static_cast<std::uint64_t>(b) + d;
    }
    ++counts[static_cast<std::size_t>(cell)];
  }
  std::vector<double> expected(counts.size(), static_cast<double>(trials) / static_cast<double>(cells));
  return chi_square(counts, expected);
}

inline ChiSquareResult uniformity_check(std::span<const DigitVector> point, std::uint64_t seed, std::size_t trials, int level) {
  return uniformity_check(
      point, [seed](std::size_t r) { return HashedPermutations({seed, static_cast<std::uint64_t>(r) + 1}); }, trials, level);
}

}  // namespace geonet
