#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geonet/digits.hpp"

namespace geonet {

/// Square m x m digit matrix over Z_b, row-major.
struct GeneratorMatrix {
  int size = 0;
  std::vector<Digit> entries;

  Digit operator()(int r, int c) const { return entries[static_cast<std::size_t>(r * size + c)]; }
  Digit& operator()(int r, int c) { return entries[static_cast<std::size_t>(r * size + c)]; }

  static GeneratorMatrix identity(int m) {
    GeneratorMatrix g{m, std::vector<Digit>(static_cast<std::size_t>(m * m), 0)};
    for (int k = 0; k < m; ++k) g(k, k) = 1;
    return g;
  }
};

struct NetSpec {
  int base = 2;
  int dims = 1;
  int m = 0;
  int t = 0;
  std::vector<GeneratorMatrix> generators;

  std::uint64_t size() const { return ipow(base, m); }
};

/// n points in [0,1)^s held as digits: coordinate j of point i is a run of
/// `depth` fractional digits. Digits past the net's m-digit prefix are zero
/// until scrambled.
class PointSet {
 public:
  PointSet(NetSpec spec, std::size_t count, int depth)
      : spec_(std::move(spec)),
        count_(count),
        depth_(depth),
        digits_(count * static_cast<std::size_t>(spec_.dims) * static_cast<std::size_t>(depth), 0) {}

  const NetSpec& spec() const { return spec_; }
  int base() const { return spec_.base; }
  int dims() const { return spec_.dims; }
  int depth() const { return depth_; }
  std::size_t size() const { return count_; }

  std::span<const Digit> coord(std::size_t i, int j) const {
    return {digits_.data() + offset(i, j), static_cast<std::size_t>(depth_)};
  }
  std::span<Digit> coord(std::size_t i, int j) {
    return {digits_.data() + offset(i, j), static_cast<std::size_t>(depth_)};
  }
  double value(std::size_t i, int j) const { return digits_to_value(coord(i, j), spec_.base); }
  DigitVector digit_vector(std::size_t i, int j) const { return DigitVector(spec_.base, coord(i, j)); }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.count_ == b.count_ && a.depth_ == b.depth_ && a.spec_.base == b.spec_.base &&
           a.spec_.dims == b.spec_.dims && a.digits_ == b.digits_;
  }

 private:
  std::size_t offset(std::size_t i, int j) const {
    return (i * static_cast<std::size_t>(spec_.dims) + static_cast<std::size_t>(j)) *
           static_cast<std::size_t>(depth_);
  }

  NetSpec spec_;
  std::size_t count_;
  int depth_;
  std::vector<Digit> digits_;
};

inline bool is_prime(int b) {
  if (b < 2) return false;
  for (int d = 2; d * d <= b; ++d)
    if (b % d == 0) return false;
  return true;
}

/// Digital net from generator matrices: the first m digits of coordinate j of
/// point i are C_j * (a_1(i), ..., a_m(i)) mod b, with a_k(i) the integer
/// digits of i, least significant first.
inline PointSet digital_net(NetSpec spec, int depth) {
  check_base(spec.base);
  if (spec.dims < 1) throw std::invalid_argument("net needs at least one dimension");
  if (spec.m < 0 || spec.t < 0 || spec.t > spec.m) throw std::invalid_argument("need 0 <= t <= m");
  if (static_cast<int>(spec.generators.size()) != spec.dims)
    throw std::invalid_argument("one generator matrix per dimension required");
  for (const auto& g : spec.generators)
    if (g.size != spec.m) throw std::invalid_argument("generator matrices must be m x m");
  if (depth < spec.m) throw std::invalid_argument("digit depth must be at least m");

  const int b = spec.base;
  const int m = spec.m;
  const std::uint64_t n = spec.size();
  PointSet ps(spec, static_cast<std::size_t>(n), depth);
  std::vector<Digit> a(static_cast<std::size_t>(m), 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t rest = i;
    for (auto& d : a) {
      d = static_cast<Digit>(rest % static_cast<std::uint64_t>(b));
      rest /= static_cast<std::uint64_t>(b);
    }
    for (int j = 0; j < spec.dims; ++j) {
      const auto& g = ps.spec().generators[static_cast<std::size_t>(j)];
      auto out = ps.coord(static_cast<std::size_t>(i), j);
      for (int r = 0; r < m; ++r) {
        int acc = 0;
        for (int c = 0; c < m; ++c) acc += g(r, c) * a[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = static_cast<Digit>(acc % b);
      }
    }
  }
  return ps;
}

/// First n points of the base-b van der Corput sequence, x_i = phi_b(i - 1).
inline PointSet vdc_points(int b, std::size_t n, std::optional<int> depth = std::nullopt) {
  check_base(b);
  if (n < 1) throw std::invalid_argument("need at least one point");
  const int k = depth.value_or(default_depth(b));
  int m = 0;
  while (ipow(b, m) < n) ++m;
  if (k < m) throw std::invalid_argument("digit depth too small for the requested count");
  NetSpec spec{b, 1, m, 0, {GeneratorMatrix::identity(m)}};
  PointSet ps(spec, n, k);
  for (std::size_t i = 0; i < n; ++i) {
    auto d = int_to_digits(i, b, k);
    auto out = ps.coord(i, 0);
    std::copy(d.begin(), d.end(), out.begin());
  }
  return ps;
}

/// (j)-th power of the upper triangular Pascal matrix mod b:
/// entry (r, c) = binom(c, r) * j^(c - r) mod b for r <= c.
inline GeneratorMatrix pascal_power(int m, int power, int b) {
  GeneratorMatrix g{m, std::vector<Digit>(static_cast<std::size_t>(m * m), 0)};
  // binomials mod b by Pascal's rule
  std::vector<std::vector<int>> binom(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(m), 0));
  for (int c = 0; c < m; ++c) {
    binom[c][0] = 1 % b;
    for (int r = 1; r <= c; ++r) binom[c][r] = (binom[c - 1][r - 1] + (r <= c - 1 ? binom[c - 1][r] : 0)) % b;
  }
  for (int r = 0; r < m; ++r) {
    for (int c = r; c < m; ++c) {
      int p = 1 % b;
      for (int e = 0; e < c - r; ++e) p = (p * power) % b;
      g(r, c) = static_cast<Digit>((binom[c][r] * p) % b);
    }
  }
  return g;
}

/// Faure (0,m,s)-net in base b: generator of dimension j is P^(j) with P the
/// Pascal matrix. Requires prime b >= s when s >= 2; for s = 1 the single
/// identity generator gives the van der Corput net in any base.
inline PointSet faure_net(int b, int s, int m, std::optional<int> depth = std::nullopt) {
  check_base(b);
  if (s < 1) throw std::invalid_argument("faure_net: s must be at least 1");
  if (m < 0) throw std::invalid_argument("faure_net: m must be nonnegative");
  if (s > 1 && !is_prime(b))
    throw std::invalid_argument("faure_net: base " + std::to_string(b) + " is not prime");
  if (s > b)
    throw std::invalid_argument("faure_net: dimension " + std::to_string(s) + " exceeds base " + std::to_string(b));
  NetSpec spec{b, s, m, 0, {}};
  for (int j = 0; j < s; ++j) spec.generators.push_back(pascal_power(m, j, b));
  return digital_net(std::move(spec), depth.value_or(default_depth(b)));
}

namespace detail {

// Calls visit(parts) for every composition of total into parts.size() nonnegative parts.
template <class F>
void for_each_composition(int total, std::vector<int>& parts, std::size_t pos, F&& visit) {
  if (pos + 1 == parts.size()) {
    parts[pos] = total;
    visit(parts);
    return;
  }
  for (int k = 0; k <= total; ++k) {
    parts[pos] = k;
    for_each_composition(total - k, parts, pos + 1, visit);
  }
}

}  // namespace detail

template <class F>
void for_each_composition(int total, int parts, F&& visit) {
  std::vector<int> p(static_cast<std::size_t>(parts), 0);
  detail::for_each_composition(total, p, 0, visit);
}

/// Exhaustive check of the (t,m,s)-net property by counting points in every
/// elementary box of volume b^(t-m). Counting uses digit prefixes only.
inline bool verify_net(const PointSet& ps, int t) {
  const int b = ps.base();
  const int s = ps.dims();
  int m = 0;
  while (ipow(b, m) < ps.size()) ++m;
  if (ipow(b, m) != ps.size()) throw std::invalid_argument("verify_net: point count is not a power of the base");
  if (t < 0 || t > m) return false;
  if (m - t > ps.depth()) throw std::invalid_argument("verify_net: digit depth below m - t");

  const std::uint64_t boxes = ipow(b, m - t);
  const std::uint64_t expected = ipow(b, t);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(boxes));
  bool ok = true;
  for_each_composition(m - t, s, [&](const std::vector<int>& k) {
    if (!ok) return;
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      std::uint64_t box = 0;
      for (int j = 0; j < s; ++j) {
        auto d = ps.coord(i, j);
        for (int r = 0; r < k[static_cast<std::size_t>(j)]; ++r) box = box * static_cast<std::uint64_t>(b) + d[static_cast<std::size_t>(r)];
      }
      ++counts[static_cast<std::size_t>(box)];
    }
    for (auto c : counts)
      if (c != expected) {
        ok = false;
        return;
      }
  });
  return ok;
}

}  // namespace geonet
