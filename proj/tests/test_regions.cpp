#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "geonet/regions.hpp"
#include "geonet/stats.hpp"

using namespace geonet;

namespace {

constexpr double kPi = std::numbers::pi;

Triangle unit_tri() { return {{0, 0}, {1, 0}, {0, 1}}; }
SphericalTriangle octant() { return {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}; }

void expect_vec(Vec2 got, Vec2 want) {
  EXPECT_NEAR(got.x, want.x, 1e-15);
  EXPECT_NEAR(got.y, want.y, 1e-15);
}

// Binary interval split with its cut at 0.6 instead of 0.5.
struct BiasedSplit {
  int base() const { return 2; }
  bool convergent() const { return true; }
  Region split(const Region& r, Digit d) const {
    const auto& i = std::get<Interval>(r);
    const double cut = i.lo + 0.6 * (i.hi - i.lo);
    return d == 0 ? Interval{i.lo, cut} : Interval{cut, i.hi};
  }
};
static_assert(Splitter<BiasedSplit>);

std::vector<SplitScheme> standard_schemes() {
  return {SplitScheme::interval(2), SplitScheme::interval(3), SplitScheme(SplitRule::triangle_b2),
          SplitScheme(SplitRule::triangle_b4), SplitScheme(SplitRule::disk_aspect_b2), SplitScheme(SplitRule::sphertri_b2)};
}

}  // namespace

TEST(Regions, Volumes) {
  EXPECT_DOUBLE_EQ(volume(Interval{0.25, 1}), 0.75);
  EXPECT_DOUBLE_EQ(volume(unit_tri()), 0.5);
  EXPECT_DOUBLE_EQ(volume(PolarCell{}), kPi);
  EXPECT_NEAR(volume(octant()), kPi / 2, 1e-15);
}

TEST(Regions, ValidateRejectsBadRegions) {
  EXPECT_NO_THROW(validate(octant()));
  EXPECT_THROW(validate(Interval{1, 1}), std::invalid_argument);
  EXPECT_THROW(validate(Triangle{{0, 0}, {1, 1}, {2, 2}}), std::invalid_argument);
  EXPECT_THROW(validate(PolarCell{-0.1, 1, 0, 1}), std::invalid_argument);
  EXPECT_THROW(validate(SphericalTriangle{{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}), std::invalid_argument);
  // antipodal-ish vertices: angle at a vertex reaches pi
  EXPECT_THROW(validate(SphericalTriangle{{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}}), std::invalid_argument);
}

TEST(Splits, TriangleB2Children) {
  const SplitScheme s(SplitRule::triangle_b2);
  const auto c0 = std::get<Triangle>(s.split(unit_tri(), 0));
  expect_vec(c0.a, {0.5, 0.5});
  expect_vec(c0.b, {0, 0});
  expect_vec(c0.c, {1, 0});
  const auto c1 = std::get<Triangle>(s.split(unit_tri(), 1));
  expect_vec(c1.a, {0.5, 0.5});
  expect_vec(c1.b, {0, 1});
  expect_vec(c1.c, {0, 0});
}

TEST(Splits, TriangleB4Children) {
  const SplitScheme s(SplitRule::triangle_b4);
  for (int d = 0; d < 4; ++d) EXPECT_DOUBLE_EQ(volume(s.split(unit_tri(), static_cast<Digit>(d))), 0.125);
  const auto corner = std::get<Triangle>(s.split(unit_tri(), 2));
  expect_vec(corner.b, {1, 0});
}

TEST(Splits, DiskAngularThenByAspect) {
  EXPECT_NEAR(aspect_ratio(PolarCell{}), 4 * kPi / 3, 1e-15);
  const SplitScheme s(SplitRule::disk_aspect_b2);
  const auto c0 = std::get<PolarCell>(s.split(PolarCell{}, 0));
  EXPECT_DOUBLE_EQ(c0.theta_lo, 0.0);
  EXPECT_DOUBLE_EQ(c0.theta_hi, kPi);
  EXPECT_DOUBLE_EQ(c0.r_hi, 1.0);

  const PolarCell wedge{0.5, 1, 0, 2.0 / 3.0};
  EXPECT_NEAR(centroid_radius(wedge), 7.0 / 9.0, 1e-15);
  EXPECT_NEAR(aspect_ratio(wedge), (2.0 / 3.0) * (7.0 / 9.0) / 0.5, 1e-15);

  // narrow wedge: aspect below one, so the cut is radial
  const PolarCell narrow{0, 1, 0, 0.5};
  EXPECT_LT(aspect_ratio(narrow), 1.0);
  const auto inner = std::get<PolarCell>(s.split(narrow, 0));
  EXPECT_NEAR(inner.r_hi, std::sqrt(0.5), 1e-15);
  EXPECT_DOUBLE_EQ(inner.theta_hi, 0.5);
}

TEST(Splits, ForcedRadialIsEqualArea) {
  const auto lo = split_polar(PolarCell{}, 0, PolarSplit::radial);
  const auto hi = split_polar(PolarCell{}, 1, PolarSplit::radial);
  EXPECT_NEAR(lo.r_hi, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(polar_area(lo), polar_area(hi), 1e-14);
}

TEST(Splits, DegenerateAspectThrows) {
  EXPECT_THROW(aspect_ratio(PolarCell{0.5, 0.5, 0, 1}), std::domain_error);
}

TEST(Splits, ErrorPaths) {
  const SplitScheme s(SplitRule::triangle_b2);
  EXPECT_THROW(s.split(unit_tri(), 2), std::invalid_argument);
  EXPECT_THROW(s.split(Interval{}, 0), std::invalid_argument);
  EXPECT_FALSE(parse_scheme("hexagon-b6"));
  EXPECT_FALSE(parse_scheme("interval-b1"));
  EXPECT_FALSE(parse_scheme("interval-b7x"));
  EXPECT_EQ(*parse_scheme("interval-b5"), SplitScheme::interval(5));
  for (const auto& sc : standard_schemes()) EXPECT_EQ(*parse_scheme(sc.name()), sc);
}

TEST(Spherical, OctantAndHalf) {
  EXPECT_NEAR(spherical_area(octant()), kPi / 2, 1e-15);
  const SplitScheme s(SplitRule::sphertri_b2);
  for (Digit d : {Digit{0}, Digit{1}}) EXPECT_NEAR(volume(s.split(octant(), d)), kPi / 4, 1e-14);
  const Vec3 p = split_point_spherical(octant());
  EXPECT_NEAR(p.y, std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(p.z, std::sqrt(0.5), 1e-12);
}

TEST(Spherical, AreaAgreesWithGirard) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  int checked = 0;
  while (checked < 200) {
    const SphericalTriangle t{normalized({g(rng), g(rng), g(rng)}), normalized({g(rng), g(rng), g(rng)}),
                              normalized({g(rng), g(rng), g(rng)})};
    const double girard = spherical_angle(t.a, t.b, t.c) + spherical_angle(t.b, t.c, t.a) +
                          spherical_angle(t.c, t.a, t.b) - kPi;
    if (girard < 1e-3) continue;
    EXPECT_NEAR(spherical_area(t), girard, 1e-11 * std::max(1.0, girard));
    ++checked;
  }
}

TEST(Spherical, AreaAgreesWithMonteCarlo) {
  // moderately thin triangle near the north pole
  const SphericalTriangle t{normalized({0, 0, 1}), normalized({0.3, 0, 1}), normalized({0.3, 0.05, 1})};
  const double area = spherical_area(t);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const int n = 2'000'000;
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    const Vec3 v = normalized({g(rng), g(rng), g(rng)});
    inside += contains(t, Point{v.x, v.y, v.z}, 0.0);
  }
  const double p = area / (4 * kPi);
  const double est = 4 * kPi * inside / n;
  EXPECT_NEAR(est, area, 4 * 4 * kPi * std::sqrt(p * (1 - p) / n));
}

TEST(Spherical, SliverKeepsRelativeAccuracy) {
  const double eps = 1e-6;
  const SphericalTriangle t{normalized({0, 0, 1}), normalized({eps, 0, 1}), normalized({0, eps, 1})};
  // planar area eps^2/2 to leading order
  EXPECT_NEAR(spherical_area(t) / (0.5 * eps * eps), 1.0, 1e-6);
  EXPECT_THROW(spherical_area(SphericalTriangle{{1, 0, 0}, {1, 0, 0}, {0, 1, 0}}), std::domain_error);
}

TEST(Spherical, IllinoisMatchesBisection) {
  const SplitScheme s(SplitRule::sphertri_b2);
  for (const auto& cell : enumerate_cells(octant(), s, 6)) {
    const auto& t = std::get<SphericalTriangle>(cell);
    const Vec3 a = split_point_spherical(t), b = bisect_spherical_triangle(t);
    ASSERT_LT(norm(a - b), 1e-10 * diameter(cell));
    const double half = 0.5 * spherical_area(t);
    ASSERT_NEAR(spherical_excess(t.a, t.b, a), half, 1e-11 * half);
  }
}

TEST(Phi, Representatives) {
  const auto r = representative(unit_tri());
  EXPECT_DOUBLE_EQ(r[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r[1], 1.0 / 3.0);
  const auto d = representative(PolarCell{});
  EXPECT_NEAR(d[0], 2.0 / 3.0 * std::cos(kPi), 1e-15);
  const auto o = representative(octant());
  EXPECT_NEAR(o[0], 1 / std::sqrt(3.0), 1e-15);
  EXPECT_DOUBLE_EQ(representative(Interval{0.25, 0.5})[0], 0.375);
}

TEST(Phi, TriangleB4Examples) {
  const SplitScheme s(SplitRule::triangle_b4);
  const DigitVector zero(4, std::vector<Digit>(26, 0));
  const auto p = phi(zero, unit_tri(), s);
  EXPECT_NEAR(p[0], 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-14);

  std::vector<Digit> corner(26, 0);
  corner[0] = 2;
  const auto q = phi(DigitVector(4, corner), unit_tri(), s);
  EXPECT_NEAR(q[0], 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(q[1], 1.0 / 6.0, 1e-14);
  EXPECT_TRUE(contains(s.split(unit_tri(), 2), q));
}

TEST(Phi, IntervalIsRadicalInverseMidpoint) {
  const auto s = SplitScheme::interval(3);
  const DigitVector u(3, std::vector<Digit>{2, 1, 0, 2});
  const double x = phi(u, Interval{}, s)[0];
  EXPECT_NEAR(x, u.value() + 0.5 * std::pow(3.0, -4), 1e-15);
}

TEST(Phi, RejectsNonConvergentAndMismatchedBase) {
  const DigitVector u(3, std::vector<Digit>{1, 2});
  EXPECT_THROW(phi(u, unit_tri(), SplitScheme(SplitRule::triangle_b3)), std::invalid_argument);
  EXPECT_THROW(phi(u, unit_tri(), SplitScheme(SplitRule::triangle_b2)), std::invalid_argument);
}

TEST(Sphericity, Profiles) {
  for (double c : sphericity_profile(Interval{}, SplitScheme::interval(2), 10)) EXPECT_NEAR(c, 1.0, 1e-12);
  const auto b4 = sphericity_profile(Region(unit_tri()), SplitScheme(SplitRule::triangle_b4), 6);
  for (double c : b4) EXPECT_NEAR(c, std::sqrt(2.0), 1e-12);
  const auto b3 = sphericity_profile(Region(unit_tri()), SplitScheme(SplitRule::triangle_b3), 10);
  EXPECT_GT(b3.back(), 4 * b3.front());
  const auto b2 = sphericity_profile(Region(unit_tri()), SplitScheme(SplitRule::triangle_b2), 12);
  EXPECT_LT(sphericity_probe(Region(unit_tri()), SplitScheme(SplitRule::triangle_b2), 12), 2.5);
  EXPECT_EQ(b2.size(), 13u);
}

TEST(Cells, EqualVolumeContainmentAndPrefixes) {
  for (const auto& s : standard_schemes()) {
    const Region root = default_root(s);
    const int depth = s.base() == 2 ? 8 : 5;
    const auto cells = enumerate_cells(root, s, depth);
    ASSERT_EQ(cells.size(), ipow(s.base(), depth));
    const double want = volume(root) / static_cast<double>(cells.size());
    for (const auto& c : cells) ASSERT_NEAR(volume(c), want, 1e-9 * want) << s.name();

    // phi of random digits lies in every prefix cell, and locate_cell recovers the path
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> dig(0, s.base() - 1);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Digit> d(static_cast<std::size_t>(default_depth(s.base())));
      for (auto& x : d) x = static_cast<Digit>(dig(rng));
      const Point p = phi(std::span<const Digit>(d), root, s);
      std::uint64_t path = 0;
      for (int k = 1; k <= depth; ++k) {
        path = path * static_cast<std::uint64_t>(s.base()) + d[static_cast<std::size_t>(k - 1)];
        const Region cell = descend(std::span<const Digit>(d).first(static_cast<std::size_t>(k)), root, s);
        ASSERT_TRUE(contains(cell, p, 1e-12)) << s.name() << " level " << k;
        ASSERT_EQ(locate_cell(p, root, s, k), path) << s.name();
      }
    }
  }
}

TEST(Measure, StandardSchemesPass) {
  for (const auto& s : standard_schemes()) {
    const int level = s.base() == 2 ? 3 : 2;
    const std::size_t n = 100 * ipow(s.base(), level);
    const auto r = measure_preservation_check(default_root(s), s, 5, n, level);
    EXPECT_LT(r.statistic, chi_square_quantile(r.dof, 0.999)) << s.name();
  }
}

TEST(Measure, BiasedSplitFails) {
  const auto r = measure_preservation_check(Region(Interval{}), BiasedSplit{}, 5, 2000, 1);
  EXPECT_GT(r.statistic, chi_square_quantile(r.dof, 0.999));
}

TEST(Measure, TooFewSamples) {
  EXPECT_THROW(measure_preservation_check(Region(Interval{}), SplitScheme::interval(2), 5, 199, 2), std::invalid_argument);
}
