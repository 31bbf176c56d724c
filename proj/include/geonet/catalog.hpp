#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "geonet/quad.hpp"
#include "geonet/regions.hpp"

namespace geonet {

/// An integrand bound to its domain, with its exact mean and variance under
/// the uniform distribution on that domain.
struct CatalogEntry {
  Integrand f;
  std::vector<Region> roots;
  double mean = 0.0;
  double variance = 0.0;
};

inline Region unit_interval() { return Interval{0.0, 1.0}; }
inline Region unit_triangle() { return Triangle{{0, 0}, {1, 0}, {0, 1}}; }
inline Region unit_disk() { return PolarCell{0.0, 1.0, 0.0, 2 * std::numbers::pi}; }
inline Region octant() { return SphericalTriangle{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}; }

// Moments below come from tests/oracles/catalog_moments.py.
inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    using S = Smoothness;
    auto fn = [](std::string name, int arity, S smooth, auto body) {
      return Integrand{std::move(name), arity, smooth, body};
    };
    std::vector<CatalogEntry> c;
    c.push_back({fn("interval_exp", 1, S::smooth, [](std::span<const Point> x) { return std::exp(x[0][0]); }),
                 {unit_interval()}, std::numbers::e - 1.0, 0.24203560745276535711});
    c.push_back({fn("interval_linear", 1, S::smooth, [](std::span<const Point> x) { return x[0][0]; }),
                 {unit_interval()}, 0.5, 1.0 / 12.0});
    c.push_back({fn("interval_step", 1, S::discontinuous, [](std::span<const Point> x) { return x[0][0] < 1.0 / 3.0 ? 1.0 : 0.0; }),
                 {unit_interval()}, 1.0 / 3.0, 2.0 / 9.0});
    c.push_back({fn("square_product", 2, S::smooth, [](std::span<const Point> x) { return x[0][0] * x[1][0]; }),
                 {unit_interval(), unit_interval()}, 0.25, 7.0 / 144.0});
    c.push_back({fn("triangle_smooth", 1, S::smooth,
                    [](std::span<const Point> x) { return std::exp(x[0][0] + 0.5 * x[0][1]); }),
                 {unit_triangle()}, 1.6833571482351557667, 0.11880115349816357108});
    c.push_back({fn("triangle_indicator", 1, S::discontinuous, [](std::span<const Point> x) { return x[0][0] > 0.4 ? 1.0 : 0.0; }),
                 {unit_triangle()}, 0.36, 0.36 * 0.64});
    // |x - A|^{-1/2} with A the right-angle vertex: unbounded, square integrable
    c.push_back({fn("triangle_cusp", 1, S::l2_only,
                    [](std::span<const Point> x) { return 1.0 / std::sqrt(std::hypot(x[0][0], x[0][1])); }),
                 {unit_triangle()}, 1.4864926424405121054, 0.28324058453114588268});
    c.push_back({fn("disk_smooth", 1, S::smooth, [](std::span<const Point> x) { return x[0][0] * x[0][0] + x[0][1]; }),
                 {unit_disk()}, 0.25, 0.3125});
    c.push_back({fn("disk_indicator", 1, S::discontinuous, [](std::span<const Point> x) { return x[0][0] > 0.3 ? 1.0 : 0.0; }),
                 {unit_disk()}, 0.31191883239053647467, 0.21462547439066088845});
    c.push_back({fn("octant_smooth", 1, S::smooth,
                    [](std::span<const Point> x) { return x[0][2] * x[0][2] + x[0][0] * x[0][1]; }),
                 {octant()}, 0.54553992412252711436, 0.053935494170731537752});
    c.push_back({fn("triangle_pair_smooth", 2, S::smooth,
                    [](std::span<const Point> x) {
                      return std::exp(x[0][0] + 0.5 * x[0][1]) * (1.0 + x[1][0] * x[1][1]);
                    }),
                 {unit_triangle(), unit_triangle()}, 1.8236369105880854139, 0.15172840559998041227});
    return c;
  }();
  return entries;
}

inline const CatalogEntry& find_integrand(std::string_view name) {
  for (const auto& e : catalog())
    if (e.f.name == name) return e;
  throw std::invalid_argument("unknown integrand: " + std::string(name));
}

/// Default convergent split of a root region in base b: interval-b for
/// intervals, triangle-b2/b4, disk-aspect-b2 and sphertri-b2 otherwise.
inline SplitScheme default_scheme(const Region& root, int b) {
  if (std::holds_alternative<Interval>(root)) return SplitScheme::interval(b);
  if (std::holds_alternative<Triangle>(root)) {
    if (b == 2) return SplitScheme(SplitRule::triangle_b2);
    if (b == 4) return SplitScheme(SplitRule::triangle_b4);
    throw std::invalid_argument("no convergent triangle split in base " + std::to_string(b));
  }
  if (b != 2) throw std::invalid_argument("disk and spherical triangle splits are binary");
  if (std::holds_alternative<PolarCell>(root)) return SplitScheme(SplitRule::disk_aspect_b2);
  return SplitScheme(SplitRule::sphertri_b2);
}

inline ProductSpace default_space(const CatalogEntry& e, int b) {
  std::vector<Factor> f;
  for (const auto& r : e.roots) f.push_back({r, default_scheme(r, b)});
  return ProductSpace(std::move(f));
}

}  // namespace geonet
