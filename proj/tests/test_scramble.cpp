#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "geonet/nets.hpp"
#include "geonet/scramble.hpp"
#include "geonet/stats.hpp"

using namespace geonet;

namespace {

// Test-only permutation sources: same tree walk as the hashed source, but
// with some node permutations forced.
struct IdentityPermutations {
  HashedPermutations inner{ScrambleKey{}};
  TreeNode root(int j) const { return inner.root(j); }
  TreeNode child(TreeNode n, Digit d) const { return inner.child(n, d); }
  Digit permute(TreeNode, int, Digit d) const { return d; }
};

struct PinnedRoot {
  HashedPermutations inner;
  TreeNode root(int j) const { return inner.root(j); }
  TreeNode child(TreeNode n, Digit d) const { return inner.child(n, d); }
  Digit permute(TreeNode n, int b, Digit d) const { return n.level == 0 ? d : inner.permute(n, b, d); }
};

static_assert(PermutationSource<IdentityPermutations>);
static_assert(PermutationSource<PinnedRoot>);

}  // namespace

TEST(Scramble, IdentityHookLeavesPointsUnchanged) {
  const auto ps = faure_net(2, 2, 4);
  EXPECT_EQ(scramble_point_set(ps, IdentityPermutations{}), ps);
}

TEST(Scramble, SinglePointFirstDigitIsFair) {
  const auto origin = vdc_points(2, 1);
  const int keys = 10000;
  int ones = 0;
  std::set<double> distinct;
  for (int r = 0; r < keys; ++r) {
    const auto out = scramble_point_set(origin, ScrambleKey{42, static_cast<std::uint64_t>(r)});
    ones += out.coord(0, 0)[0];
    distinct.insert(out.value(0, 0));
  }
  const double sigma = std::sqrt(0.25 / keys);
  EXPECT_LE(std::abs(ones / static_cast<double>(keys) - 0.5), 3 * sigma);
  EXPECT_GT(distinct.size(), 9990u);  // full-depth digits: essentially no repeats
}

TEST(Scramble, VanDerCorputStaysANet) {
  const auto ps = vdc_points(2, 4);
  for (std::uint64_t r = 0; r < 50; ++r) EXPECT_TRUE(verify_net(scramble_point_set(ps, ScrambleKey{7, r}), 0));
}

TEST(Scramble, NetPreservationAcrossGrid) {
  for (int b : {2, 3})
    for (int s = 1; s <= std::min(b, 3); ++s)
      for (int m : {1, 3, 4}) {
        const auto ps = faure_net(b, s, m);
        for (std::uint64_t r = 0; r < 20; ++r)
          ASSERT_TRUE(verify_net(scramble_point_set(ps, ScrambleKey{11, r}), 0)) << b << s << m << ' ' << r;
      }
}

TEST(Scramble, OutputDepthEqualsInputDepth) {
  const auto ps = faure_net(3, 2, 2, 9);
  const auto out = scramble_point_set(ps, ScrambleKey{1, 1});
  EXPECT_EQ(out.depth(), 9);
  // the zero tail beyond m is scrambled too
  bool tail_nonzero = false;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t k = 2; k < 9; ++k) tail_nonzero |= out.coord(i, 0)[k] != 0;
  EXPECT_TRUE(tail_nonzero);
}

TEST(Scramble, Determinism) {
  const auto ps = faure_net(5, 3, 3);
  const auto a = scramble_point_set(ps, ScrambleKey{99, 3});
  const auto b = scramble_point_set(ps, ScrambleKey{99, 3});
  const auto c = scramble_point_set(ps, ScrambleKey{99, 4});
  const auto d = scramble_point_set(ps, ScrambleKey{100, 3});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a, d);
}

// Points sharing a length-k prefix must see one permutation at digit k+1:
// b points differing only there map to b distinct digits.
TEST(Scramble, SameTreeForSharedPrefixes) {
  const int b = 5;
  const std::vector<Digit> prefix{3, 1, 4};
  for (std::uint64_t r = 0; r < 200; ++r) {
    HashedPermutations src({5, r});
    std::vector<std::vector<Digit>> outs;
    for (int c = 0; c < b; ++c) {
      std::vector<Digit> in = prefix;
      in.push_back(static_cast<Digit>(c));
      in.push_back(static_cast<Digit>((c * 2) % b));
      std::vector<Digit> out(in.size());
      scramble_digits(src, 0, b, in, out);
      outs.push_back(out);
    }
    std::set<Digit> level4;
    for (const auto& o : outs) {
      for (std::size_t k = 0; k < prefix.size(); ++k) ASSERT_EQ(o[k], outs[0][k]);
      level4.insert(o[3]);
    }
    ASSERT_EQ(level4.size(), static_cast<std::size_t>(b));
    // and the permutation used is the one held by the shared node
    TreeNode node = src.root(0);
    for (Digit d : prefix) node = src.child(node, d);
    std::array<Digit, 5> perm{};
    src.fill_permutation(node, b, perm);
    for (int c = 0; c < b; ++c) ASSERT_EQ(outs[static_cast<std::size_t>(c)][3], perm[static_cast<std::size_t>(c)]);
  }
}

TEST(Scramble, NodePermutationsAreUniform) {
  // all 6 permutations of Z_3 should appear equally often across nodes
  std::map<std::array<Digit, 3>, std::uint64_t> seen;
  const int trials = 60000;
  for (int r = 0; r < trials; ++r) {
    HashedPermutations src({3, static_cast<std::uint64_t>(r)});
    std::array<Digit, 3> p{};
    src.fill_permutation(src.root(0), 3, p);
    ++seen[p];
  }
  ASSERT_EQ(seen.size(), 6u);
  std::vector<std::uint64_t> obs;
  for (const auto& [p, c] : seen) obs.push_back(c);
  std::vector<double> exp(6, trials / 6.0);
  const auto chi = chi_square(obs, exp);
  EXPECT_LT(chi.statistic, chi_square_quantile(5, 0.999));
}

TEST(UniformityCheck, FairAtLevelOne) {
  const std::vector<DigitVector> pt{DigitVector(2, std::vector<Digit>{0, 1, 1, 0})};
  const auto r = uniformity_check(pt, 17, 1000, 1);
  EXPECT_EQ(r.dof, 1);
  EXPECT_LT(r.statistic, chi_square_quantile(1, 0.999));
}

TEST(UniformityCheck, FairAtLevelTwo) {
  const std::vector<DigitVector> pt{DigitVector(2, std::vector<Digit>{1, 0, 1})};
  const auto r = uniformity_check(pt, 23, 4000, 2);
  EXPECT_EQ(r.dof, 3);
  EXPECT_LT(r.statistic, chi_square_quantile(3, 0.999));
}

TEST(UniformityCheck, TwoDimensionalBase3) {
  const std::vector<DigitVector> pt{DigitVector(3, std::vector<Digit>{2, 1}), DigitVector(3, std::vector<Digit>{0, 0})};
  const auto r = uniformity_check(pt, 5, 50 * 81, 2);
  EXPECT_EQ(r.dof, 80);
  EXPECT_LT(r.statistic, chi_square_quantile(80, 0.999));
}

TEST(UniformityCheck, PinnedRootFails) {
  const std::vector<DigitVector> pt{DigitVector(2, std::vector<Digit>{0, 1})};
  const auto r = uniformity_check(
      pt, [](std::size_t k) { return PinnedRoot{HashedPermutations({1, k})}; }, 1000, 1);
  EXPECT_DOUBLE_EQ(r.statistic, 1000.0);  // every trial lands in cell 0
  EXPECT_GT(r.statistic, chi_square_quantile(1, 0.999));
}

TEST(UniformityCheck, TooFewTrials) {
  const std::vector<DigitVector> pt{DigitVector(2, std::vector<Digit>{0, 1})};
  EXPECT_THROW(uniformity_check(pt, 1, 199, 2), std::invalid_argument);
}
