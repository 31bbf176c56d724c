#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geonet/digits.hpp"
#include "geonet/scramble.hpp"

namespace geonet {

// ---------------------------------------------------------------------------
// Small vectors

struct Vec2 {
  double x = 0, y = 0;
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 midpoint(Vec2 a, Vec2 b) { return 0.5 * (a + b); }

struct Vec3 {
  double x = 0, y = 0, z = 0;
  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(Vec3, Vec3) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { return (1.0 / norm(a)) * a; }

/// Cartesian point in the ambient space of a region; unused trailing
/// components are zero (intervals use x only, planar regions x and y).
using Point = std::array<double, 3>;

// ---------------------------------------------------------------------------
// Regions

struct Interval {
  double lo = 0, hi = 1;
};

struct Triangle {
  Vec2 a, b, c;
};

/// Annular sector r_lo <= r < r_hi, theta_lo <= theta < theta_hi. Angles are
/// kept unwrapped (theta_hi > theta_lo) and reduced mod 2 pi only when points
/// are emitted.
struct PolarCell {
  double r_lo = 0, r_hi = 1;
  double theta_lo = 0, theta_hi = 2 * std::numbers::pi;
};

struct SphericalTriangle {
  Vec3 a, b, c;
};

using Region = std::variant<Interval, Triangle, PolarCell, SphericalTriangle>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline int intrinsic_dim(const Region& r) { return std::holds_alternative<Interval>(r) ? 1 : 2; }

inline int ambient_dim(const Region& r) {
  return std::visit(overloaded{[](const Interval&) { return 1; }, [](const Triangle&) { return 2; },
                               [](const PolarCell&) { return 2; }, [](const SphericalTriangle&) { return 3; }},
                    r);
}

inline std::string_view variant_name(const Region& r) {
  return std::visit(overloaded{[](const Interval&) { return std::string_view("interval"); },
                               [](const Triangle&) { return std::string_view("triangle"); },
                               [](const PolarCell&) { return std::string_view("polar-cell"); },
                               [](const SphericalTriangle&) { return std::string_view("spherical-triangle"); }},
                    r);
}

inline double triangle_area(const Triangle& t) { return 0.5 * std::abs(cross(t.b - t.a, t.c - t.a)); }

inline double polar_area(const PolarCell& c) {
  return 0.5 * (c.theta_hi - c.theta_lo) * (c.r_hi * c.r_hi - c.r_lo * c.r_lo);
}

/// Spherical excess via the Van Oosterom-Strackee form
/// tan(E/2) = |A.(B x C)| / (1 + A.B + B.C + C.A), with the triple product
/// taken on edge differences so small cells keep their relative accuracy.
inline double spherical_excess(Vec3 a, Vec3 b, Vec3 c) {
  const double triple = dot(a, cross(b - a, c - a));
  const double denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
  return 2.0 * std::atan2(std::abs(triple), denom);
}

/// Interior angle at vertex p between great-circle arcs towards q and r.
inline double spherical_angle(Vec3 p, Vec3 q, Vec3 r) {
  const Vec3 tq = q - dot(p, q) * p;
  const Vec3 tr = r - dot(p, r) * p;
  return std::atan2(norm(cross(tq, tr)), dot(tq, tr));
}

/// Area of a spherical triangle on the unit sphere (steradians).
inline double spherical_area(const SphericalTriangle& t) {
  const double e = spherical_excess(t.a, t.b, t.c);
  if (!(e > 0.0)) throw std::domain_error("spherical_area: degenerate triangle");
  return e;
}

inline double volume(const Region& r) {
  return std::visit(overloaded{[](const Interval& i) { return i.hi - i.lo; },
                               [](const Triangle& t) { return triangle_area(t); },
                               [](const PolarCell& c) { return polar_area(c); },
                               [](const SphericalTriangle& t) { return spherical_excess(t.a, t.b, t.c); }},
                    r);
}

/// Checks the region invariants; throws std::invalid_argument on violation.
inline void validate(const Region& r) {
  const double v = volume(r);
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("region volume must be positive and finite");
  if (const auto* p = std::get_if<PolarCell>(&r)) {
    if (p->r_lo < 0.0 || p->theta_hi - p->theta_lo > 2 * std::numbers::pi + 1e-12)
      throw std::invalid_argument("polar cell out of range");
  }
  if (const auto* s = std::get_if<SphericalTriangle>(&r)) {
    for (Vec3 v3 : {s->a, s->b, s->c})
      if (std::abs(norm(v3) - 1.0) > 1e-12) throw std::invalid_argument("spherical triangle vertices must be unit vectors");
    const double angles[] = {spherical_angle(s->a, s->b, s->c), spherical_angle(s->b, s->c, s->a),
                             spherical_angle(s->c, s->a, s->b)};
    for (double a : angles)
      if (!(a > 0.0 && a < std::numbers::pi)) throw std::invalid_argument("spherical triangle angles must lie in (0, pi)");
  }
}

// ---------------------------------------------------------------------------
// Polar cell geometry

inline double centroid_radius(const PolarCell& c) {
  const double r3 = c.r_hi * c.r_hi * c.r_hi - c.r_lo * c.r_lo * c.r_lo;
  const double r2 = c.r_hi * c.r_hi - c.r_lo * c.r_lo;
  return (2.0 / 3.0) * r3 / r2;
}

/// Arc length through the centroid over radial extent.
inline double aspect_ratio(const PolarCell& c) {
  const double dr = c.r_hi - c.r_lo;
  const double dt = c.theta_hi - c.theta_lo;
  if (!(dr > 0.0) || !(dt > 0.0)) throw std::domain_error("aspect_ratio: degenerate polar cell");
  return dt * centroid_radius(c) / dr;
}

enum class PolarSplit { angular, radial };

/// Equal-area binary split of a polar cell in a fixed direction.
inline PolarCell split_polar(const PolarCell& c, Digit d, PolarSplit how) {
  PolarCell out = c;
  if (how == PolarSplit::angular) {
    const double mid = 0.5 * (c.theta_lo + c.theta_hi);
    (d == 0 ? out.theta_hi : out.theta_lo) = mid;
  } else {
    const double rm = std::sqrt(0.5 * (c.r_lo * c.r_lo + c.r_hi * c.r_hi));
    (d == 0 ? out.r_hi : out.r_lo) = rm;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spherical triangle bisection

/// Point on the arc from b to c at parameter t in [0, 1].
inline Vec3 arc_point(Vec3 b, Vec3 c, double t) { return normalized((1.0 - t) * b + t * c); }

/// P on arc BC with area(A, B, P) = area(A, B, C) / 2, by bisection on the arc
/// parameter until the relative area mismatch is below 1e-12. Reference
/// implementation for split_point_spherical.
inline Vec3 bisect_spherical_triangle(const SphericalTriangle& t) {
  const double half = 0.5 * spherical_excess(t.a, t.b, t.c);
  double lo = 0.0, hi = 1.0;
  Vec3 p = arc_point(t.b, t.c, 0.5);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    p = arc_point(t.b, t.c, mid);
    const double diff = spherical_excess(t.a, t.b, p) - half;
    if (std::abs(diff) <= 1e-12 * half || hi - lo <= 1e-17) break;
    (diff < 0.0 ? lo : hi) = mid;
  }
  return p;
}

/// Same point as bisect_spherical_triangle, same stopping rule, found with
/// the Illinois variant of regula falsi (a few area evaluations per split).
inline Vec3 split_point_spherical(const SphericalTriangle& t) {
  const double half = 0.5 * spherical_excess(t.a, t.b, t.c);
  double lo = 0.0, hi = 1.0;
  double f_lo = -half, f_hi = half;
  int side = 0;
  Vec3 p = arc_point(t.b, t.c, 0.5);
  for (int it = 0; it < 100; ++it) {
    double x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    p = arc_point(t.b, t.c, x);
    const double fx = spherical_excess(t.a, t.b, p) - half;
    if (std::abs(fx) <= 1e-12 * half || hi - lo <= 1e-17) break;
    if (fx < 0.0) {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Split schemes

enum class SplitRule { interval, triangle_b2, triangle_b3, triangle_b4, disk_aspect_b2, sphertri_b2 };

class SplitScheme {
 public:
  constexpr SplitScheme(SplitRule rule, int interval_base = 2) : rule_(rule), base_(implied_base(rule, interval_base)) {}

  static SplitScheme interval(int b) { return SplitScheme(SplitRule::interval, b); }

  SplitRule rule() const { return rule_; }
  int base() const { return base_; }

  /// triangle-b3 cells become arbitrarily elongated; every other rule converges.
  bool convergent() const { return rule_ != SplitRule::triangle_b3; }

  bool accepts(const Region& r) const {
    switch (rule_) {
      case SplitRule::interval: return std::holds_alternative<Interval>(r);
      case SplitRule::triangle_b2:
      case SplitRule::triangle_b3:
      case SplitRule::triangle_b4: return std::holds_alternative<Triangle>(r);
      case SplitRule::disk_aspect_b2: return std::holds_alternative<PolarCell>(r);
      case SplitRule::sphertri_b2: return std::holds_alternative<SphericalTriangle>(r);
    }
    return false;
  }

  Region split(const Region& r, Digit d) const {
    if (d >= base_) throw std::invalid_argument("split: digit out of range");
    if (!accepts(r)) throw std::invalid_argument("split: scheme does not apply to a " + std::string(variant_name(r)));
    switch (rule_) {
      case SplitRule::interval: {
        const auto& i = std::get<Interval>(r);
        const double w = i.hi - i.lo;
        const double lo = i.lo + w * d / base_;
        const double hi = d + 1 == base_ ? i.hi : i.lo + w * (d + 1) / base_;
        return Interval{lo, hi};
      }
      case SplitRule::triangle_b2: {
        const auto& t = std::get<Triangle>(r);
        const Vec2 m = midpoint(t.b, t.c);
        return d == 0 ? Triangle{m, t.a, t.b} : Triangle{m, t.c, t.a};
      }
      case SplitRule::triangle_b3: {
        const auto& t = std::get<Triangle>(r);
        const Vec2 g = (1.0 / 3.0) * (t.a + t.b + t.c);
        if (d == 0) return Triangle{g, t.b, t.c};
        if (d == 1) return Triangle{g, t.c, t.a};
        return Triangle{g, t.a, t.b};
      }
      case SplitRule::triangle_b4: {
        const auto& t = std::get<Triangle>(r);
        const Vec2 mbc = midpoint(t.b, t.c), mca = midpoint(t.c, t.a), mab = midpoint(t.a, t.b);
        switch (d) {
          case 0: return Triangle{mbc, mca, mab};
          case 1: return Triangle{t.a, mab, mca};
          case 2: return Triangle{mab, t.b, mbc};
          default: return Triangle{mca, mbc, t.c};
        }
      }
      case SplitRule::disk_aspect_b2: {
        const auto& c = std::get<PolarCell>(r);
        return split_polar(c, d, aspect_ratio(c) > 1.0 ? PolarSplit::angular : PolarSplit::radial);
      }
      case SplitRule::sphertri_b2: {
        const auto& t = std::get<SphericalTriangle>(r);
        const Vec3 p = split_point_spherical(t);
        return d == 0 ? SphericalTriangle{p, t.a, t.b} : SphericalTriangle{p, t.c, t.a};
      }
    }
    throw std::logic_error("unknown split rule");
  }

  std::string name() const {
    switch (rule_) {
      case SplitRule::interval: return "interval-b" + std::to_string(base_);
      case SplitRule::triangle_b2: return "triangle-b2";
      case SplitRule::triangle_b3: return "triangle-b3";
      case SplitRule::triangle_b4: return "triangle-b4";
      case SplitRule::disk_aspect_b2: return "disk-aspect-b2";
      case SplitRule::sphertri_b2: return "sphertri-b2";
    }
    return "?";
  }

  friend bool operator==(const SplitScheme&, const SplitScheme&) = default;

 private:
  static constexpr int implied_base(SplitRule rule, int interval_base) {
    switch (rule) {
      case SplitRule::interval: return interval_base;
      case SplitRule::triangle_b3: return 3;
      case SplitRule::triangle_b4: return 4;
      default: return 2;
    }
  }

  SplitRule rule_;
  int base_;
};

/// Parses "interval-b<k>", "triangle-b2", "triangle-b3", "triangle-b4",
/// "disk-aspect-b2" or "sphertri-b2".
inline std::optional<SplitScheme> parse_scheme(std::string_view name) {
  if (name == "triangle-b2") return SplitScheme(SplitRule::triangle_b2);
  if (name == "triangle-b3") return SplitScheme(SplitRule::triangle_b3);
  if (name == "triangle-b4") return SplitScheme(SplitRule::triangle_b4);
  if (name == "disk-aspect-b2") return SplitScheme(SplitRule::disk_aspect_b2);
  if (name == "sphertri-b2") return SplitScheme(SplitRule::sphertri_b2);
  constexpr std::string_view prefix = "interval-b";
  if (name.substr(0, prefix.size()) == prefix) {
    try {
      std::size_t used = 0;
      const std::string rest(name.substr(prefix.size()));
      const int b = std::stoi(rest, &used);
      if (used != rest.size() || b < 2 || b > kMaxBase) return std::nullopt;
      return SplitScheme::interval(b);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

/// The unit-size root region a scheme is normally applied to: [0,1), the
/// triangle (0,0),(1,0),(0,1), the unit disk, or the positive octant of the
/// unit sphere.
inline Region default_root(const SplitScheme& s) {
  switch (s.rule()) {
    case SplitRule::interval: return Interval{0.0, 1.0};
    case SplitRule::triangle_b2:
    case SplitRule::triangle_b3:
    case SplitRule::triangle_b4: return Triangle{{0, 0}, {1, 0}, {0, 1}};
    case SplitRule::disk_aspect_b2: return PolarCell{0.0, 1.0, 0.0, 2 * std::numbers::pi};
    case SplitRule::sphertri_b2: return SphericalTriangle{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  }
  throw std::logic_error("unknown split rule");
}

/// Anything that splits regions b ways.
template <class S>
concept Splitter = requires(const S& s, const Region& r, Digit d) {
  { s.base() } -> std::convertible_to<int>;
  { s.split(r, d) } -> std::convertible_to<Region>;
  { s.convergent() } -> std::convertible_to<bool>;
};

static_assert(Splitter<SplitScheme>);

// ---------------------------------------------------------------------------
// Points and cells

inline Point representative(const Region& r) {
  return std::visit(
      overloaded{[](const Interval& i) { return Point{0.5 * (i.lo + i.hi), 0, 0}; },
                 [](const Triangle& t) {
                   const Vec2 g = (1.0 / 3.0) * (t.a + t.b + t.c);
                   return Point{g.x, g.y, 0};
                 },
                 [](const PolarCell& c) {
                   const double rc = centroid_radius(c);
                   const double th = std::fmod(0.5 * (c.theta_lo + c.theta_hi), 2 * std::numbers::pi);
                   return Point{rc * std::cos(th), rc * std::sin(th), 0};
                 },
                 [](const SphericalTriangle& t) {
                   const Vec3 v = normalized(t.a + t.b + t.c);
                   return Point{v.x, v.y, v.z};
                 }},
      r);
}

/// Euclidean diameter of a region.
inline double diameter(const Region& r) {
  return std::visit(
      overloaded{[](const Interval& i) { return i.hi - i.lo; },
                 [](const Triangle& t) { return std::max({norm(t.b - t.a), norm(t.c - t.b), norm(t.a - t.c)}); },
                 [](const PolarCell& c) {
                   const double dt = c.theta_hi - c.theta_lo;
                   if (dt >= std::numbers::pi) return 2.0 * c.r_hi;
                   const Vec2 corners[] = {{c.r_lo * std::cos(c.theta_lo), c.r_lo * std::sin(c.theta_lo)},
                                           {c.r_lo * std::cos(c.theta_hi), c.r_lo * std::sin(c.theta_hi)},
                                           {c.r_hi * std::cos(c.theta_lo), c.r_hi * std::sin(c.theta_lo)},
                                           {c.r_hi * std::cos(c.theta_hi), c.r_hi * std::sin(c.theta_hi)}};
                   double best = c.r_hi - c.r_lo;
                   for (const auto& p : corners)
                     for (const auto& q : corners) best = std::max(best, norm(p - q));
                   return best;
                 },
                 [](const SphericalTriangle& t) { return std::max({norm(t.b - t.a), norm(t.c - t.b), norm(t.a - t.c)}); }},
      r);
}

/// Signed slack of a point with respect to a region: positive inside,
/// negative outside, roughly a distance to the nearest boundary.
inline double inside_margin(const Region& r, const Point& p) {
  return std::visit(
      overloaded{[&](const Interval& i) { return std::min(p[0] - i.lo, i.hi - p[0]); },
                 [&](const Triangle& t) {
                   const Vec2 q{p[0], p[1]};
                   const double orient = cross(t.b - t.a, t.c - t.a) > 0 ? 1.0 : -1.0;
                   auto edge = [&](Vec2 u, Vec2 v) { return orient * cross(v - u, q - u) / norm(v - u); };
                   return std::min({edge(t.a, t.b), edge(t.b, t.c), edge(t.c, t.a)});
                 },
                 [&](const PolarCell& c) {
                   constexpr double two_pi = 2 * std::numbers::pi;
                   const double rad = std::hypot(p[0], p[1]);
                   const double span = c.theta_hi - c.theta_lo;
                   double ang = std::numeric_limits<double>::infinity();
                   if (span < two_pi) {
                     double delta = std::fmod(std::atan2(p[1], p[0]) - c.theta_lo, two_pi);
                     if (delta < 0) delta += two_pi;
                     ang = delta <= span ? std::min(delta, span - delta) : -std::min(delta - span, two_pi - delta);
                     ang *= rad;
                   }
                   return std::min({rad - c.r_lo, c.r_hi - rad, ang});
                 },
                 [&](const SphericalTriangle& t) {
                   const Vec3 q{p[0], p[1], p[2]};
                   const double orient = dot(t.a, cross(t.b, t.c)) > 0 ? 1.0 : -1.0;
                   auto edge = [&](Vec3 u, Vec3 v) { return orient * dot(q, normalized(cross(u, v))); };
                   return std::min({edge(t.a, t.b), edge(t.b, t.c), edge(t.c, t.a)});
                 }},
      r);
}

inline bool contains(const Region& r, const Point& p, double tol = 1e-12) { return inside_margin(r, p) >= -tol; }

/// Cell X_{a_1..a_k} reached by descending the first k digits.
template <Splitter S>
Region descend(std::span<const Digit> digits, const Region& root, const S& scheme) {
  Region cell = root;
  for (Digit d : digits) cell = scheme.split(cell, d);
  return cell;
}

/// Geometric transformation from digit expansions to the region: the
/// representative point of the depth-K cell named by the digits.
template <Splitter S>
Point phi(std::span<const Digit> digits, const Region& root, const S& scheme) {
  if (!scheme.convergent()) throw std::invalid_argument("phi: split scheme is not convergent");
  return representative(descend(digits, root, scheme));
}

inline Point phi(const DigitVector& u, const Region& root, const SplitScheme& scheme) {
  if (u.base() != scheme.base()) throw std::invalid_argument("phi: digit base differs from split base");
  return phi(u.digits(), root, scheme);
}

/// All cells at the given level, ordered by digit path with a_1 most significant.
template <Splitter S>
std::vector<Region> enumerate_cells(const Region& root, const S& scheme, int level) {
  std::vector<Region> cells{root};
  const int b = scheme.base();
  for (int k = 0; k < level; ++k) {
    std::vector<Region> next;
    next.reserve(cells.size() * static_cast<std::size_t>(b));
    for (const auto& c : cells)
      for (int d = 0; d < b; ++d) next.push_back(scheme.split(c, static_cast<Digit>(d)));
    cells = std::move(next);
  }
  return cells;
}

/// Digit path of the level-k cell containing p: at each level the child with
/// the largest inside margin is taken.
template <Splitter S>
std::uint64_t locate_cell(const Point& p, const Region& root, const S& scheme, int level) {
  Region cell = root;
  std::uint64_t index = 0;
  const int b = scheme.base();
  for (int k = 0; k < level; ++k) {
    double best = -std::numeric_limits<double>::infinity();
    int best_d = 0;
    Region best_cell = cell;
    for (int d = 0; d < b; ++d) {
      Region child = scheme.split(cell, static_cast<Digit>(d));
      const double mg = inside_margin(child, p);
      if (mg > best) {
        best = mg;
        best_d = d;
        best_cell = std::move(child);
      }
    }
    index = index * static_cast<std::uint64_t>(b) + static_cast<std::uint64_t>(best_d);
    cell = std::move(best_cell);
  }
  return index;
}

/// Empirical sphericity constants: entry k is max over level-k cells of
/// diam(cell) * b^(k/d).
template <Splitter S>
std::vector<double> sphericity_profile(const Region& root, const S& scheme, int max_level) {
  const int b = scheme.base();
  const int d = intrinsic_dim(root);
  std::vector<double> out;
  std::vector<Region> cells{root};
  for (int k = 0; k <= max_level; ++k) {
    double worst = 0.0;
    for (const auto& c : cells) worst = std::max(worst, diameter(c));
    out.push_back(worst * std::pow(static_cast<double>(b), static_cast<double>(k) / d));
    if (k == max_level) break;
    std::vector<Region> next;
    next.reserve(cells.size() * static_cast<std::size_t>(b));
    for (const auto& c : cells)
      for (int a = 0; a < b; ++a) next.push_back(scheme.split(c, static_cast<Digit>(a)));
    cells = std::move(next);
  }
  return out;
}

/// Largest entry of the sphericity profile.
template <Splitter S>
double sphericity_probe(const Region& root, const S& scheme, int max_level) {
  const auto prof = sphericity_profile(root, scheme, max_level);
  return *std::max_element(prof.begin(), prof.end());
}

/// Maps N scrambled uniform digit vectors through phi, locates each image's
/// level-k cell geometrically and compares the counts with N vol(cell)/vol(root).
template <Splitter S>
ChiSquareResult measure_preservation_check(const Region& root, const S& scheme, std::uint64_t seed, std::size_t samples,
                                           int level, std::optional<int> depth = std::nullopt) {
  const int b = scheme.base();
  const std::uint64_t ncells = ipow(b, level);
  if (samples < 50 * ncells) throw std::invalid_argument("measure_preservation_check: need at least 50 samples per cell");
  const int k_digits = depth.value_or(default_depth(b));
  if (k_digits < level) throw std::invalid_argument("measure_preservation_check: digit depth below level");

  const auto cells = enumerate_cells(root, scheme, level);
  const double total = volume(root);
  std::vector<double> expected;
  expected.reserve(cells.size());
  for (const auto& c : cells) expected.push_back(static_cast<double>(samples) * volume(c) / total);

  std::vector<std::uint64_t> counts(cells.size(), 0);
  std::vector<Digit> raw(static_cast<std::size_t>(k_digits)), scrambled(raw.size());
  for (std::size_t r = 0; r < samples; ++r) {
    SplitMix64 rng(mix64(seed ^ mix64(r + 0x7f4a7c15ULL)));
    for (auto& dg : raw) dg = static_cast<Digit>(rng.below(static_cast<std::uint32_t>(b)));
    HashedPermutations src({seed, static_cast<std::uint64_t>(r) + 1});
    scramble_digits(src, 0, b, raw, scrambled);
    const Point p = phi(std::span<const Digit>(scrambled), root, scheme);
    ++counts[static_cast<std::size_t>(locate_cell(p, root, scheme, level))];
  }
  return chi_square(counts, expected);
}

}  // namespace geonet
