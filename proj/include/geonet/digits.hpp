#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace geonet {

using Digit = std::uint8_t;

inline constexpr int kMaxBase = 64;

inline void check_base(int b) {
  if (b < 2 || b > kMaxBase)
    throw std::invalid_argument("base must be in [2, 64], got " + std::to_string(b));
}

/// b^k as an unsigned integer; throws if the result does not fit in 64 bits.
inline std::uint64_t ipow(int b, int k) {
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) {
    if (r > UINT64_MAX / static_cast<std::uint64_t>(b))
      throw std::overflow_error("ipow overflow");
    r *= static_cast<std::uint64_t>(b);
  }
  return r;
}

/// Largest K with b^K <= 2^52, i.e. floor(52 / log2(b)) evaluated exactly.
/// K digits in base b convert to a double without collisions.
inline int default_depth(int b) {
  check_base(b);
  constexpr std::uint64_t limit = std::uint64_t{1} << 52;
  int k = 0;
  std::uint64_t p = 1;
  while (p <= limit / static_cast<std::uint64_t>(b)) {
    p *= static_cast<std::uint64_t>(b);
    ++k;
  }
  return k;
}

/// Integer expansion i = sum_k out[k-1] b^(k-1); least significant digit first.
inline std::vector<Digit> int_to_digits(std::uint64_t i, int b, int depth) {
  check_base(b);
  if (depth < 0) throw std::invalid_argument("negative depth");
  std::vector<Digit> out(static_cast<std::size_t>(depth), 0);
  const auto ub = static_cast<std::uint64_t>(b);
  for (auto& d : out) {
    d = static_cast<Digit>(i % ub);
    i /= ub;
  }
  if (i != 0) throw std::overflow_error("integer does not fit in the requested number of digits");
  return out;
}

/// sum_k d[k-1] b^{-k} for fractional-order digits (most significant first).
/// Exact up to the final rounding whenever b^len <= 2^53.
inline double digits_to_value(std::span<const Digit> digits, int b) {
  const std::size_t n = digits.size();
  const auto ub = static_cast<std::uint64_t>(b);
  // integer numerator path: one rounding in the final division
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  std::size_t k = 0;
  constexpr std::uint64_t limit = std::uint64_t{1} << 53;
  for (; k < n && den <= limit / ub; ++k) {
    num = num * ub + digits[k];
    den *= ub;
  }
  if (k == n) return static_cast<double>(num) / static_cast<double>(den);
  // remaining digits fall below double resolution; Horner in long double
  long double tail = 0.0L;
  for (std::size_t r = n; r > k; --r) tail = (tail + digits[r - 1]) / static_cast<long double>(b);
  long double v = (static_cast<long double>(num) + tail) / static_cast<long double>(den);
  double out = static_cast<double>(v);
  return out < 1.0 ? out : std::nextafter(1.0, 0.0);
}

/// Radical inverse phi_b(i) = sum_k a_k(i) b^{-k}.
inline double radical_inverse(std::uint64_t i, int b) {
  check_base(b);
  const auto ub = static_cast<std::uint64_t>(b);
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  while (i > 0) {
    if (den > (UINT64_MAX / ub)) break;
    num = num * ub + i % ub;
    den *= ub;
    i /= ub;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

/// A coordinate in [0,1) held as its base-b fractional digits a_1..a_K
/// (a_1 most significant). Canonical form: trailing zeros, never a (b-1) tail.
class DigitVector {
 public:
  DigitVector(int base, std::vector<Digit> digits) : base_(base), digits_(std::move(digits)) {
    check_base(base_);
    for (Digit d : digits_)
      if (d >= base_) throw std::invalid_argument("digit out of range for base");
  }
  DigitVector(int base, std::span<const Digit> digits)
      : DigitVector(base, std::vector<Digit>(digits.begin(), digits.end())) {}

  /// Fractional digits of i / b^K (the integer i written with K digits, most significant first).
  static DigitVector from_index(std::uint64_t i, int base, int depth) {
    auto d = int_to_digits(i, base, depth);
    return DigitVector(base, std::vector<Digit>(d.rbegin(), d.rend()));
  }

  /// Digits of the radical inverse phi_b(i), padded with zeros to the given depth.
  static DigitVector radical(std::uint64_t i, int base, int depth) {
    return DigitVector(base, int_to_digits(i, base, depth));
  }

  int base() const { return base_; }
  int depth() const { return static_cast<int>(digits_.size()); }
  Digit operator[](std::size_t k) const { return digits_[k]; }
  std::span<const Digit> digits() const { return digits_; }
  double value() const { return digits_to_value(digits_, base_); }

  /// Integer index of the length-k prefix, a_1 most significant.
  std::uint64_t prefix_index(int k) const {
    std::uint64_t c = 0;
    for (int r = 0; r < k; ++r) c = c * static_cast<std::uint64_t>(base_) + digits_[static_cast<std::size_t>(r)];
    return c;
  }

  friend bool operator==(const DigitVector&, const DigitVector&) = default;

 private:
  int base_;
  std::vector<Digit> digits_;
};

}  // namespace geonet
