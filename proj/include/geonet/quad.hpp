#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "geonet/digits.hpp"
#include "geonet/nets.hpp"
#include "geonet/regions.hpp"
#include "geonet/scramble.hpp"
#include "geonet/stats.hpp"

namespace geonet {

// ---------------------------------------------------------------------------
// Product spaces and integrands

struct Factor {
  Region root;
  SplitScheme scheme;
};

/// X^(1) x ... x X^(s), each factor with its own recursive split in a common base.
class ProductSpace {
 public:
  explicit ProductSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("product space needs at least one factor");
    for (const auto& f : factors_) {
      validate(f.root);
      if (!f.scheme.accepts(f.root))
        throw std::invalid_argument("split " + f.scheme.name() + " does not apply to a " + std::string(variant_name(f.root)));
      if (f.scheme.base() != factors_.front().scheme.base())
        throw std::invalid_argument("all factors of a product space must share one base");
    }
  }

  int dims() const { return static_cast<int>(factors_.size()); }
  int base() const { return factors_.front().scheme.base(); }
  const Factor& factor(int j) const { return factors_[static_cast<std::size_t>(j)]; }
  const std::vector<Factor>& factors() const { return factors_; }

  /// Image of one digit-form point under componentwise phi.
  template <class DigitsOf>
  void map(DigitsOf&& digits_of, std::span<Point> out) const {
    for (int j = 0; j < dims(); ++j) {
      const auto& f = factors_[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(j)] = phi(digits_of(j), f.root, f.scheme);
    }
  }

 private:
  std::vector<Factor> factors_;
};

enum class Smoothness { smooth, discontinuous, l2_only };

inline std::string to_string(Smoothness s) {
  switch (s) {
    case Smoothness::smooth: return "smooth";
    case Smoothness::discontinuous: return "discontinuous";
    case Smoothness::l2_only: return "l2-only";
  }
  return "?";
}

/// Real function on a product of regions; takes one point per factor.
struct Integrand {
  std::string name;
  int arity = 1;
  Smoothness smoothness = Smoothness::smooth;
  std::function<double(std::span<const Point>)> eval;

  double operator()(std::span<const Point> x) const { return eval(x); }
};

struct EstimateReport {
  std::uint64_t n = 0;
  std::vector<double> estimates;  // one per replicate
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance of the replicate estimates
  double standard_error = 0.0;

  std::size_t replicates() const { return estimates.size(); }
};

inline EstimateReport summarize(std::uint64_t n, std::vector<double> estimates) {
  EstimateReport rep;
  rep.n = n;
  const auto mv = mean_variance(estimates);
  rep.mean = mv.mean;
  rep.variance = mv.variance;
  rep.standard_error = estimates.empty() ? 0.0 : std::sqrt(mv.variance / static_cast<double>(estimates.size()));
  rep.estimates = std::move(estimates);
  return rep;
}

/// mu-hat = (1/n) sum_i f(phi_1(u_i1), ..., phi_s(u_is)).
inline double estimate(const Integrand& f, const ProductSpace& space, const PointSet& pts) {
  if (pts.dims() != space.dims() || f.arity != space.dims())
    throw std::invalid_argument("estimate: dimension mismatch between integrand, space and points");
  if (pts.base() != space.base()) throw std::invalid_argument("estimate: point base differs from split base");
  std::vector<Point> x(static_cast<std::size_t>(space.dims()));
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    space.map([&](int j) { return pts.coord(i, j); }, x);
    sum += f(x);
  }
  return sum / static_cast<double>(pts.size());
}

namespace detail {

// Runs body(r) for r in [0, count) over up to `threads` workers. Every
// replicate writes only its own slot, so results do not depend on scheduling.
template <class Body>
void parallel_replicates(std::size_t count, int threads, Body&& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w)
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < count; r += workers) body(r);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Scrambled-net estimate for one replicate, scrambling on the fly.
template <PermutationSource Source>
double scrambled_estimate(const Integrand& f, const ProductSpace& space, const PointSet& net, const Source& src) {
  const int s = space.dims();
  std::vector<Point> x(static_cast<std::size_t>(s));
  std::vector<Digit> buf(static_cast<std::size_t>(net.depth()));
  double sum = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (int j = 0; j < s; ++j) {
      scramble_digits(src, j, net.base(), net.coord(i, j), buf);
      const auto& fac = space.factor(j);
      x[static_cast<std::size_t>(j)] = phi(std::span<const Digit>(buf), fac.root, fac.scheme);
    }
    sum += f(x);
  }
  return sum / static_cast<double>(net.size());
}

/// R independent nested uniform scrambles of `net` (replicate ids 1..R).
inline EstimateReport replicate_variance(const Integrand& f, const ProductSpace& space, const PointSet& net,
                                         std::uint64_t seed, std::size_t replicates, int threads = 1) {
  if (replicates < 2) throw std::invalid_argument("replicate_variance: need at least two replicates");
  if (net.dims() != space.dims() || f.arity != space.dims())
    throw std::invalid_argument("replicate_variance: dimension mismatch");
  if (net.base() != space.base()) throw std::invalid_argument("replicate_variance: net base differs from split base");
  std::vector<double> est(replicates);
  detail::parallel_replicates(replicates, threads, [&](std::size_t r) {
    est[r] = scrambled_estimate(f, space, net, HashedPermutations({seed, static_cast<std::uint64_t>(r) + 1}));
  });
  return summarize(net.size(), std::move(est));
}

/// Plain Monte Carlo control: n i.i.d. uniform digit vectors per replicate,
/// mapped through phi (uniform on the space by measure preservation).
///
/// The points are independent, so Var(mu-hat) is reported as the pooled
/// within-replicate variance of f divided by n, which has R (n - 1) degrees
/// of freedom instead of the R - 1 of the across-replicate estimate.
inline EstimateReport monte_carlo_replicates(const Integrand& f, const ProductSpace& space, std::uint64_t n,
                                             std::uint64_t seed, std::size_t replicates, int depth, int threads = 1) {
  if (replicates < 2) throw std::invalid_argument("monte_carlo_replicates: need at least two replicates");
  if (n < 1) throw std::invalid_argument("monte_carlo_replicates: need at least one point");
  const int s = space.dims();
  const int b = space.base();
  std::vector<double> est(replicates), within(replicates);
  detail::parallel_replicates(replicates, threads, [&](std::size_t r) {
    SplitMix64 rng(mix64(mix64(seed ^ 0x6d6f6e7465636172ULL) + r));
    std::vector<Point> x(static_cast<std::size_t>(s));
    std::vector<Digit> buf(static_cast<std::size_t>(depth));
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      for (int j = 0; j < s; ++j) {
        for (auto& d : buf) d = static_cast<Digit>(rng.below(static_cast<std::uint32_t>(b)));
        const auto& fac = space.factor(j);
        x[static_cast<std::size_t>(j)] = phi(std::span<const Digit>(buf), fac.root, fac.scheme);
      }
      const double v = f(x);
      const double delta = v - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (v - mean);
    }
    est[r] = mean;
    within[r] = m2;
  });
  auto rep = summarize(n, std::move(est));
  if (n > 1) {
    double pooled = 0.0;
    for (double w : within) pooled += w;
    pooled /= static_cast<double>(replicates) * static_cast<double>(n - 1);
    rep.variance = pooled / static_cast<double>(n);
    rep.standard_error = std::sqrt(rep.variance / static_cast<double>(replicates));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Gain coefficients

struct GainEntry {
  std::vector<int> u;      // 0-based coordinates, increasing
  std::vector<int> kappa;  // one level per coordinate in u
  double gamma = 0.0;
};

/// Gamma_{u,kappa} = (1/n) sum_i sum_i' prod_{j in u} Upsilon_{i,i',j,k_j}.
///
/// Expanding the product of (b 1[k_j+1 digits agree] - 1[k_j digits agree])
/// over subsets S of u turns the double sum into sums of squared box counts,
/// which are exact integers; cost is O(2^|u| n) instead of O(n^2).
inline double gain_coefficient(const PointSet& pts, std::span<const int> u, std::span<const int> kappa) {
  if (u.empty()) throw std::invalid_argument("gain_coefficient: u must be nonempty");
  if (u.size() != kappa.size()) throw std::invalid_argument("gain_coefficient: one level per coordinate in u");
  const int b = pts.base();
  for (std::size_t q = 0; q < u.size(); ++q) {
    if (u[q] < 0 || u[q] >= pts.dims()) throw std::invalid_argument("gain_coefficient: coordinate out of range");
    if (kappa[q] < 0 || kappa[q] + 1 > pts.depth()) throw std::invalid_argument("gain_coefficient: level beyond digit depth");
  }
  const std::size_t nu = u.size();
  __int128 acc = 0;
  std::unordered_map<std::string, std::uint64_t> counts;
  std::string key;
  for (std::uint32_t subset = 0; subset < (1u << nu); ++subset) {
    counts.clear();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      key.clear();
      for (std::size_t q = 0; q < nu; ++q) {
        const int len = kappa[q] + ((subset >> q) & 1u ? 1 : 0);
        auto d = pts.coord(i, u[q]);
        key.append(reinterpret_cast<const char*>(d.data()), static_cast<std::size_t>(len));
        key.push_back('\xff');
      }
      ++counts[key];
    }
    __int128 sq = 0;
    for (const auto& [k, c] : counts) sq += static_cast<__int128>(c) * c;
    const int in_s = std::popcount(subset);
    __int128 w = 1;
    for (int e = 0; e < in_s; ++e) w *= b;
    acc += ((static_cast<int>(nu) - in_s) % 2 ? -w : w) * sq;
  }
  __int128 denom = static_cast<__int128>(pts.size());
  for (std::size_t q = 0; q < nu; ++q) denom *= (b - 1);
  return static_cast<double>(static_cast<long double>(acc) / static_cast<long double>(denom));
}

/// Calls visit(u) for every nonempty subset of 0..s-1, in increasing bitmask order.
template <class F>
void for_each_subset(int s, F&& visit) {
  for (std::uint32_t mask = 1; mask < (1u << s); ++mask) {
    std::vector<int> u;
    for (int j = 0; j < s; ++j)
      if ((mask >> j) & 1u) u.push_back(j);
    visit(u);
  }
}

/// Every Gamma_{u,kappa} with |kappa| <= max_kappa.
inline std::vector<GainEntry> gain_table(const PointSet& pts, int max_kappa) {
  std::vector<GainEntry> out;
  for_each_subset(pts.dims(), [&](const std::vector<int>& u) {
    for (int total = 0; total <= max_kappa; ++total)
      for_each_composition(total, static_cast<int>(u.size()), [&](const std::vector<int>& kappa) {
        out.push_back({u, kappa, gain_coefficient(pts, u, kappa)});
      });
  });
  return out;
}

/// b^t ((b+1)/(b-1))^s, the bound on any gain coefficient of a (t,m,s)-net.
inline double gain_bound(int b, int t, int s) {
  return std::pow(static_cast<double>(b), t) * std::pow((b + 1.0) / (b - 1.0), s);
}

// ---------------------------------------------------------------------------
// Variance decompositions (small-instance oracles, s <= 2)

struct AnovaTable {
  double mean = 0.0;
  double sigma2 = 0.0;
  std::vector<std::pair<std::vector<int>, double>> components;  // (u, sigma^2_u)

  double component(const std::vector<int>& u) const {
    for (const auto& [v, s2] : components)
      if (v == u) return s2;
    throw std::out_of_range("anova component not present");
  }
};

namespace detail {

inline void check_oracle_space(const Integrand& f, const ProductSpace& space) {
  if (space.dims() > 2) throw std::length_error("variance oracle budget exceeded: at most two factors");
  if (f.arity != space.dims()) throw std::invalid_argument("integrand arity differs from the space");
}

// f on the tensor grid of cell representatives, `level` levels deep in every
// factor; row-major with factor 0 slowest. Cells have equal volume, so the
// grid is an equal-weight midpoint rule that respects the splits.
inline std::vector<double> tensor_grid_values(const Integrand& f, const ProductSpace& space, int level) {
  const int s = space.dims();
  const std::uint64_t per = ipow(space.base(), level);
  if (per > (std::uint64_t{1} << 26) || (s == 2 && per * per > (std::uint64_t{1} << 26)))
    throw std::length_error("variance oracle budget exceeded: grid too fine");
  std::vector<std::vector<Point>> nodes;
  for (int j = 0; j < s; ++j) {
    const auto& fac = space.factor(j);
    std::vector<Point> pts;
    for (const auto& c : enumerate_cells(fac.root, fac.scheme, level)) pts.push_back(representative(c));
    nodes.push_back(std::move(pts));
  }
  std::vector<double> vals;
  std::vector<Point> x(static_cast<std::size_t>(s));
  if (s == 1) {
    for (const auto& p : nodes[0]) {
      x[0] = p;
      vals.push_back(f(x));
    }
  } else {
    vals.reserve(nodes[0].size() * nodes[1].size());
    for (const auto& p : nodes[0])
      for (const auto& q : nodes[1]) {
        x[0] = p;
        x[1] = q;
        vals.push_back(f(x));
      }
  }
  return vals;
}

// Averages a grid with `from` levels per factor down to `to[j]` levels in factor j.
inline std::vector<double> coarsen(std::span<const double> grid, int b, int s, int from, std::span<const int> to) {
  const std::uint64_t fine = ipow(b, from);
  if (s == 1) {
    const std::uint64_t coarse = ipow(b, to[0]);
    const std::uint64_t group = fine / coarse;
    std::vector<double> out(coarse, 0.0);
    for (std::uint64_t c = 0; c < fine; ++c) out[c / group] += grid[c];
    for (auto& v : out) v /= static_cast<double>(group);
    return out;
  }
  const std::uint64_t c0 = ipow(b, to[0]), c1 = ipow(b, to[1]);
  const std::uint64_t g0 = fine / c0, g1 = fine / c1;
  std::vector<double> out(c0 * c1, 0.0);
  for (std::uint64_t i = 0; i < fine; ++i)
    for (std::uint64_t k = 0; k < fine; ++k) out[(i / g0) * c1 + k / g1] += grid[i * fine + k];
  for (auto& v : out) v /= static_cast<double>(g0 * g1);
  return out;
}

}  // namespace detail

/// ANOVA variances sigma^2_u of f over the product space, by an
/// equal-weight grid over the level-`level` cells of every factor.
inline AnovaTable anova_components(const Integrand& f, const ProductSpace& space, int level) {
  detail::check_oracle_space(f, space);
  const int s = space.dims();
  const auto vals = detail::tensor_grid_values(f, space, level);
  const std::size_t per = static_cast<std::size_t>(ipow(space.base(), level));
  AnovaTable out;
  const auto mv = mean_variance(vals);
  out.mean = mv.mean;
  double total = 0.0;
  for (double v : vals) total += (v - mv.mean) * (v - mv.mean);
  out.sigma2 = total / static_cast<double>(vals.size());
  if (s == 1) {
    out.components.push_back({{0}, out.sigma2});
    return out;
  }
  std::vector<double> row(per, 0.0), col(per, 0.0);
  for (std::size_t i = 0; i < per; ++i)
    for (std::size_t k = 0; k < per; ++k) {
      row[i] += vals[i * per + k];
      col[k] += vals[i * per + k];
    }
  double s1 = 0.0, s2 = 0.0, s12 = 0.0;
  for (std::size_t i = 0; i < per; ++i) {
    row[i] = row[i] / static_cast<double>(per) - out.mean;
    col[i] = col[i] / static_cast<double>(per) - out.mean;
    s1 += row[i] * row[i];
    s2 += col[i] * col[i];
  }
  for (std::size_t i = 0; i < per; ++i)
    for (std::size_t k = 0; k < per; ++k) {
      const double inter = vals[i * per + k] - out.mean - row[i] - col[k];
      s12 += inter * inter;
    }
  const double cells = static_cast<double>(per);
  out.components.push_back({{0}, s1 / cells});
  out.components.push_back({{1}, s2 / cells});
  out.components.push_back({{0, 1}, s12 / (cells * cells)});
  return out;
}

struct SigmaEntry {
  std::vector<int> u;
  std::vector<int> kappa;
  double sigma2 = 0.0;
};

/// Multiresolution variance blocks sigma^2_{u,kappa} for every kappa with all
/// k_j < depth, from cell averages at `depth` levels (each average itself a
/// midpoint rule over `sublevels` further levels).
struct SigmaTable {
  double mean = 0.0;
  double sigma2 = 0.0;          // variance of f on the finest grid
  double resolved = 0.0;        // sum of all listed blocks
  std::vector<SigmaEntry> blocks;

  double truncated_mass() const { return std::max(0.0, sigma2 - resolved); }

  double block(const std::vector<int>& u, const std::vector<int>& kappa) const {
    for (const auto& e : blocks)
      if (e.u == u && e.kappa == kappa) return e.sigma2;
    return 0.0;
  }
};

/// nu_{u,kappa} is the tensor product over j in u of (P_{k_j+1} - P_{k_j}) and
/// over j not in u of P_0, where P_k averages over level-k cells. Its squared
/// norm is taken on the level (k_j + 1) grid where nu is constant.
inline SigmaTable multiresolution_sigmas(const Integrand& f, const ProductSpace& space, int depth, int sublevels) {
  detail::check_oracle_space(f, space);
  if (depth < 1 || sublevels < 0) throw std::invalid_argument("multiresolution_sigmas: need depth >= 1");
  const int s = space.dims();
  const int b = space.base();
  const auto fine = detail::tensor_grid_values(f, space, depth + sublevels);
  std::vector<int> lv(static_cast<std::size_t>(s), depth);
  const auto avg = detail::coarsen(fine, b, s, depth + sublevels, lv);

  SigmaTable out;
  {
    double mu = 0.0;
    for (double v : fine) mu += v;
    mu /= static_cast<double>(fine.size());
    double var = 0.0;
    for (double v : fine) var += (v - mu) * (v - mu);
    out.mean = mu;
    out.sigma2 = var / static_cast<double>(fine.size());
  }

  std::map<std::vector<int>, std::vector<double>> cache;
  auto projection = [&](const std::vector<int>& levels) -> const std::vector<double>& {
    auto it = cache.find(levels);
    if (it == cache.end()) it = cache.emplace(levels, detail::coarsen(avg, b, s, depth, levels)).first;
    return it->second;
  };

  for_each_subset(s, [&](const std::vector<int>& u) {
    const int nu = static_cast<int>(u.size());
    for (int total = 0; total <= nu * (depth - 1); ++total)
      for_each_composition(total, nu, [&](const std::vector<int>& kappa) {
        for (int k : kappa)
          if (k > depth - 1) return;
        // evaluation grid: k_j + 1 levels for j in u, 0 elsewhere
        std::vector<int> top(static_cast<std::size_t>(s), 0);
        for (int q = 0; q < nu; ++q) top[static_cast<std::size_t>(u[q])] = kappa[q] + 1;
        const std::uint64_t n0 = ipow(b, top[0]);
        const std::uint64_t n1 = s == 2 ? ipow(b, top[1]) : 1;
        std::vector<double> nu_vals(n0 * n1, 0.0);
        for (std::uint32_t sub = 0; sub < (1u << nu); ++sub) {
          std::vector<int> lev = top;
          int drops = 0;
          for (int q = 0; q < nu; ++q)
            if (!((sub >> q) & 1u)) {
              --lev[static_cast<std::size_t>(u[q])];
              ++drops;
            }
          const auto& proj = projection(lev);
          const double sign = drops % 2 ? -1.0 : 1.0;
          const std::uint64_t p1 = s == 2 ? ipow(b, lev[1]) : 1;
          const std::uint64_t d0 = n0 / ipow(b, lev[0]);
          const std::uint64_t d1 = s == 2 ? n1 / p1 : 1;
          for (std::uint64_t i = 0; i < n0; ++i)
            for (std::uint64_t k = 0; k < n1; ++k) nu_vals[i * n1 + k] += sign * proj[(i / d0) * p1 + k / d1];
        }
        double sq = 0.0;
        for (double v : nu_vals) sq += v * v;
        const double s2 = sq / static_cast<double>(nu_vals.size());
        out.blocks.push_back({u, kappa, s2});
        out.resolved += s2;
      });
  });
  return out;
}

/// A single block sigma^2_{u,kappa}.
inline double mr_sigma(const Integrand& f, const ProductSpace& space, const std::vector<int>& u,
                       const std::vector<int>& kappa, int depth, int sublevels) {
  if (u.empty() || u.size() != kappa.size()) throw std::invalid_argument("mr_sigma: need one level per coordinate of a nonempty u");
  for (int k : kappa)
    if (k + 1 > depth) throw std::invalid_argument("mr_sigma: level beyond oracle depth");
  return multiresolution_sigmas(f, space, depth, sublevels).block(u, kappa);
}

struct VarianceIdentityReport {
  double empirical = 0.0;     // sample variance of mu-hat over replicates
  double theoretical = 0.0;   // (1/n) sum Gamma sigma^2 over the truncated block set
  double monte_carlo_tol = 0.0;
  double truncation_tol = 0.0;
  double truncated_mass = 0.0;
  int max_kappa = 0;
  bool pass = false;
};

/// Compares the replicate variance of mu-hat with (1/n) sum Gamma_{u,kappa}
/// sigma^2_{u,kappa}, summing blocks with |kappa| <= 4 + m - t.
inline VarianceIdentityReport variance_identity_check(const Integrand& f, const ProductSpace& space, const PointSet& net,
                                                      std::uint64_t seed, std::size_t replicates, int sublevels = 4) {
  detail::check_oracle_space(f, space);
  const auto& spec = net.spec();
  VarianceIdentityReport rep;
  rep.max_kappa = 4 + spec.m - spec.t;
  const int depth = rep.max_kappa + 1;
  const auto sig = multiresolution_sigmas(f, space, depth, sublevels);
  double theo = 0.0, included = 0.0;
  for (const auto& e : sig.blocks) {
    int total = 0;
    for (int k : e.kappa) total += k;
    if (total > rep.max_kappa) continue;
    included += e.sigma2;
    theo += gain_coefficient(net, e.u, e.kappa) * e.sigma2;
  }
  const double n = static_cast<double>(net.size());
  rep.theoretical = theo / n;
  rep.truncated_mass = std::max(0.0, sig.sigma2 - included);
  rep.truncation_tol = gain_bound(spec.base, spec.t, spec.dims) * rep.truncated_mass / n;
  const auto emp = replicate_variance(f, space, net, seed, replicates);
  rep.empirical = emp.variance;
  // normal-theory standard error of a sample variance, evaluated at the larger of the two
  const double scale = std::max(rep.empirical, rep.theoretical);
  rep.monte_carlo_tol = 3.0 * scale * std::sqrt(2.0 / static_cast<double>(replicates - 1));
  rep.pass = std::abs(rep.empirical - rep.theoretical) <= rep.monte_carlo_tol + rep.truncation_tol;
  return rep;
}

}  // namespace geonet
