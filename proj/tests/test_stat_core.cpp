#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "awmeta/rng.hpp"
#include "awmeta/stat_core.hpp"
#include "awmeta/tail_counts.hpp"
#include "oracles.hpp"

using namespace awmeta;
using namespace awmeta::stat;

namespace {

StudyDataset random_study(std::size_t genes, std::size_t n_control, std::size_t n_case, std::uint64_t seed,
                          std::string id = "S") {
  rng::Xoshiro256 gen(seed);
  StudyDataset d;
  d.study_id = std::move(id);
  d.values = Matrix<double>(genes, n_control + n_case);
  for (std::size_t g = 0; g < genes; ++g)
    for (std::size_t j = 0; j < n_control + n_case; ++j) d.values(g, j) = gen.normal();
  d.labels.assign(n_control, 0);
  d.labels.resize(n_control + n_case, 1);
  return d;
}

double straight_line_t(const std::vector<double>& c, const std::vector<double>& x, double s0) {
  double mc = 0, mx = 0;
  for (double v : c) mc += v;
  for (double v : x) mx += v;
  mc /= c.size();
  mx /= x.size();
  double ss = 0;
  for (double v : c) ss += (v - mc) * (v - mc);
  for (double v : x) ss += (v - mx) * (v - mx);
  const double sp2 = ss / (c.size() + x.size() - 2.0);
  return (mx - mc) / (std::sqrt(sp2 * (1.0 / c.size() + 1.0 / x.size())) + s0);
}

}  // namespace

TEST(ModeratedT, IdenticalGroupsGiveZero) {
  EXPECT_EQ(moderated_t(std::vector{1.0, 1.0, 1.0}, std::vector{1.0, 1.0, 1.0}, 0.5), 0.0);
}

TEST(ModeratedT, ZeroWithinVariance) {
  EXPECT_DOUBLE_EQ(moderated_t(std::vector{0.0, 0.0}, std::vector{2.0, 2.0}, 1.0), 2.0);
}

TEST(ModeratedT, MatchesStraightLineFormula) {
  const std::vector<double> c{0.1, -0.3, 0.2, 0.0, 0.5}, x{1.9, 2.4, 2.1, 1.7, 2.2};
  // Single-gene genome: the median rule gives s0 = that gene's own se.
  const double s0 = pooled_standard_error(c, x);
  EXPECT_NEAR(moderated_t(c, x, s0), straight_line_t(c, x, s0), 1e-12);
  EXPECT_NEAR(moderated_t(c, x, s0), straight_line_t(c, x, 0.0) / 2.0, 1e-12);
}

TEST(ModeratedT, Antisymmetric) {
  rng::Xoshiro256 gen(7);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a(2 + gen.below(5)), b(2 + gen.below(5));
    for (auto& v : a) v = gen.normal();
    for (auto& v : b) v = gen.normal();
    const double s0 = gen.uniform();
    EXPECT_EQ(moderated_t(a, b, s0), -moderated_t(b, a, s0));
  }
}

TEST(ModeratedT, Errors) {
  EXPECT_THROW(moderated_t(std::vector{1.0}, std::vector{1.0, 2.0}, 0.1), InvalidInput);
  EXPECT_THROW(moderated_t(std::vector{1.0, 2.0}, std::vector{1.0, 2.0}, -0.1), InvalidInput);
  EXPECT_THROW(moderated_t(std::vector{1.0, 1.0}, std::vector{2.0, 2.0}, 0.0), DegenerateVariance);
}

TEST(FudgeS0, IdenticalSpread) {
  // Every gene has the same within-group pattern, hence the same se.
  StudyDataset d;
  d.values = Matrix<double>(4, 4);
  for (std::size_t g = 0; g < 4; ++g) {
    const double row[] = {0.0, 1.0, 5.0 + g, 6.0 + g};
    for (std::size_t j = 0; j < 4; ++j) d.values(g, j) = row[j];
  }
  d.labels = {0, 0, 1, 1};
  const double se = pooled_standard_error(std::vector{0.0, 1.0}, std::vector{5.0, 6.0});
  EXPECT_DOUBLE_EQ(fudge_s0(d), se);
}

TEST(FudgeS0, OddMedian) {
  // Two-sample se with n = m = 2 is |d| / sqrt(2) for pairs (0, d) in both groups.
  StudyDataset d;
  d.values = Matrix<double>(3, 4);
  const double spreads[] = {0.9, 0.1, 0.5};
  for (std::size_t g = 0; g < 3; ++g) {
    const double s = spreads[g] * std::sqrt(2.0);
    const double row[] = {0.0, s, 0.0, s};
    for (std::size_t j = 0; j < 4; ++j) d.values(g, j) = row[j];
  }
  d.labels = {0, 0, 1, 1};
  EXPECT_NEAR(fudge_s0(d), 0.5, 1e-14);
}

TEST(FudgeS0, MatchesSortOracle) {
  for (std::size_t genes : {50u, 51u}) {
    const auto d = random_study(genes, 3, 4, genes);
    EXPECT_EQ(fudge_s0(d), oracle::median_by_sort(gene_standard_errors(d)));
  }
}

TEST(PermuteLabels, SingleSwapReproducible) {
  StudyDataset d;
  d.values = Matrix<double>(1, 2);
  d.labels = {0, 1};
  const auto a = permute_labels(d, 1, 42), b = permute_labels(d, 1, 42);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a[0] == (std::vector<std::uint8_t>{0, 1}) || a[0] == (std::vector<std::uint8_t>{1, 0}));
}

TEST(PermuteLabels, DeterministicAndLabelPreserving) {
  const auto d = random_study(3, 5, 5, 1);
  const auto a = permute_labels(d, 50, 9), b = permute_labels(d, 50, 9), c = permute_labels(d, 50, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const auto& l : a) EXPECT_EQ(std::count(l.begin(), l.end(), 1), 5);
}

TEST(PermuteLabels, IdentityFrequencyMatchesCombinatorics) {
  const auto d = random_study(1, 5, 5, 1);
  const auto perms = permute_labels(d, 1000, 2024);
  std::size_t fixed = 0;
  for (const auto& l : perms) fixed += l == d.labels;
  const double p = 1.0 / 252.0, mean = 1000 * p, se = std::sqrt(1000 * p * (1 - p));
  EXPECT_LE(std::fabs(static_cast<double>(fixed) - mean), 3 * se);
}

TEST(PooledPvalues, FloorAndCeiling) {
  Matrix<double> obs(2, 1);
  obs(0, 0) = 10.0;  // beyond every permuted |t|
  obs(1, 0) = 0.0;   // every permuted value rejects
  const std::vector<std::vector<double>> perm{{0.5, -1.0, 2.0, -0.1}};
  const auto p = pooled_pvalues(obs, perm, Sidedness::TwoSided);
  EXPECT_DOUBLE_EQ(p.observed(0, 0), 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(p.observed(1, 0), 1.0);
}

TEST(PooledPvalues, HandTable) {
  // G = 3, K = 1, B = 2; permuted t listed as b * G + g.
  Matrix<double> obs(3, 1);
  obs(0, 0) = 1.5;
  obs(1, 0) = -0.2;
  obs(2, 0) = 3.0;
  const std::vector<std::vector<double>> perm{{0.1, -2.0, 1.5, 0.7, -0.3, 2.5}};
  const auto p = pooled_pvalues(obs, perm, Sidedness::TwoSided);
  // |perm| = 0.1 2.0 1.5 0.7 0.3 2.5
  EXPECT_DOUBLE_EQ(p.observed(0, 0), 3.0 / 6.0);
  EXPECT_DOUBLE_EQ(p.observed(1, 0), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(p.observed(2, 0), 1.0 / 6.0);
  const std::vector<double> expected{6.0 / 6, 2.0 / 6, 3.0 / 6, 4.0 / 6, 5.0 / 6, 1.0 / 6};
  EXPECT_EQ(p.permuted[0], expected);

  const auto one = pooled_pvalues(obs, perm, Sidedness::OneSided);
  EXPECT_DOUBLE_EQ(one.observed(0, 0), 2.0 / 6.0);  // 1.5, 2.5
  EXPECT_DOUBLE_EQ(one.observed(1, 0), 4.0 / 6.0);  // 0.1, 1.5, 0.7, 2.5
}

TEST(PooledPvalues, MatchesCountingOracle) {
  rng::Xoshiro256 gen(99);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t g = 1 + gen.below(5), k = 1 + gen.below(3), b = 1 + gen.below(3);
    Matrix<double> obs(g, k);
    std::vector<std::vector<double>> perm(k, std::vector<double>(b * g));
    // Coarse values force ties, including ties across sign.
    auto draw = [&] { return static_cast<double>(static_cast<int>(gen.below(7)) - 3) * 0.5; };
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t j = 0; j < k; ++j) obs(i, j) = draw();
    for (auto& col : perm)
      for (auto& v : col) v = draw();
    for (auto sided : {Sidedness::TwoSided, Sidedness::OneSided}) {
      const auto p = pooled_pvalues(obs, perm, sided);
      for (std::size_t j = 0; j < k; ++j) {
        const auto ref = oracle::pooled_p(obs.column(j), perm[j], sided);
        EXPECT_EQ(p.observed.column(j), ref.observed);
        EXPECT_EQ(p.permuted[j], ref.permuted);
      }
    }
  }
}

TEST(PooledPvalues, MonotoneInAbsoluteT) {
  rng::Xoshiro256 gen(3);
  Matrix<double> obs(200, 1);
  for (std::size_t i = 0; i < 200; ++i) obs(i, 0) = gen.normal() * 2;
  std::vector<std::vector<double>> perm{std::vector<double>(1000)};
  for (auto& v : perm[0]) v = gen.normal();
  const auto p = pooled_pvalues(obs, perm, Sidedness::TwoSided);
  for (std::size_t a = 0; a < 200; ++a)
    for (std::size_t b = 0; b < 200; ++b)
      if (std::fabs(obs(a, 0)) >= std::fabs(obs(b, 0))) {
        EXPECT_LE(p.observed(a, 0), p.observed(b, 0));
      }
}

TEST(PooledPvalues, ClampedOneSidedStaysInside) {
  Matrix<double> obs(2, 1);
  obs(0, 0) = 100.0;
  obs(1, 0) = -100.0;
  const std::vector<std::vector<double>> perm{{0.0, 1.0, -1.0, 2.0}};
  const auto p = pooled_onesided_clamped(obs, perm);
  EXPECT_DOUBLE_EQ(p.observed(0, 0), 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(p.observed(1, 0), 3.0 / 4.0);
}

TEST(PooledPvalues, EmptyNullRejected) {
  Matrix<double> obs(1, 1);
  const std::vector<std::vector<double>> perm{{}};
  EXPECT_THROW(pooled_pvalues(obs, perm, Sidedness::TwoSided), InvalidInput);
}

TEST(TailCounts, MatchBruteForce) {
  rng::Xoshiro256 gen(17);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> ref(1 + gen.below(40)), q(gen.below(10));
    for (auto& v : ref) v = static_cast<double>(gen.below(9)) - 4.0;
    for (auto& v : q) v = static_cast<double>(gen.below(11)) - 5.0;
    if (!ref.empty()) ref[0] = -0.0;
    const auto up = upper_tail_counts(ref, q), lo = lower_tail_counts(ref, q);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_EQ(up.pool[i], std::count_if(ref.begin(), ref.end(), [&](double x) { return x >= ref[i]; }));
      EXPECT_EQ(lo.pool[i], std::count_if(ref.begin(), ref.end(), [&](double x) { return x <= ref[i]; }));
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
      EXPECT_EQ(up.queries[i], std::count_if(ref.begin(), ref.end(), [&](double x) { return x >= q[i]; }));
      EXPECT_EQ(lo.queries[i], std::count_if(ref.begin(), ref.end(), [&](double x) { return x <= q[i]; }));
    }
  }
}

TEST(TailCounts, NanRejected) {
  const std::vector<double> ref{1.0, std::nan("")};
  EXPECT_THROW(upper_tail_counts(ref, {}), InvalidInput);
}

TEST(PermutationNull, DeterministicAndShaped) {
  std::vector<StudyDataset> studies{random_study(40, 4, 5, 1, "A"), random_study(40, 3, 3, 2, "B")};
  const auto a = build_permutation_null(studies, {25, 7, Sidedness::TwoSided});
  const auto b = build_permutation_null(studies, {25, 7, Sidedness::TwoSided});
  EXPECT_EQ(a.observed_t, b.observed_t);
  EXPECT_EQ(a.permuted_t, b.permuted_t);
  EXPECT_EQ(a.observed_p, b.observed_p);
  EXPECT_EQ(a.permuted_p, b.permuted_p);
  EXPECT_EQ(a.observed_t.rows(), 40u);
  EXPECT_EQ(a.observed_t.cols(), 2u);
  ASSERT_EQ(a.permuted_t.size(), 2u);
  EXPECT_EQ(a.permuted_t[0].size(), 25u * 40u);
  for (double p : a.observed_p.values()) {
    EXPECT_GE(p, 1.0 / (25 * 40));
    EXPECT_LE(p, 1.0);
  }
}

TEST(PermutationNull, AgreesWithPerGeneFormula) {
  std::vector<StudyDataset> studies{random_study(30, 4, 5, 5, "A"), random_study(30, 5, 3, 6, "B")};
  const auto null = build_permutation_null(studies, {10, 3, Sidedness::TwoSided});
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& d = studies[k];
    EXPECT_EQ(null.s0[k], fudge_s0(d));
    const auto perms = permute_labels(d, 10, 3);
    for (std::size_t g = 0; g < 30; ++g) {
      std::vector<double> c, x;
      for (std::size_t j = 0; j < d.samples(); ++j) (d.labels[j] ? x : c).push_back(d.values(g, j));
      EXPECT_NEAR(null.observed_t(g, k), straight_line_t(c, x, null.s0[k]), 1e-12);
    }
    const auto t3 = moderated_t_all(d, perms[3], null.s0[k]);
    for (std::size_t g = 0; g < 30; ++g) EXPECT_EQ(null.permuted_t[k][3 * 30 + g], t3[g]);
  }
}

TEST(PermutationNull, ObservedPNearUniformUnderNull) {
  int passes = 0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<StudyDataset> studies{random_study(500, 5, 5, 1000 + rep, "A")};
    const auto null = build_permutation_null(studies, {60, static_cast<std::uint64_t>(rep), Sidedness::TwoSided});
    const double pv = oracle::ks_pvalue(null.observed_p.column(0), [](double x) { return std::clamp(x, 0.0, 1.0); });
    passes += pv >= 0.01;
  }
  EXPECT_GE(passes, 19);
}

TEST(PermutationNull, RejectsBadInput) {
  std::vector<StudyDataset> dup{random_study(10, 3, 3, 1, "A"), random_study(10, 3, 3, 2, "A")};
  EXPECT_THROW(build_permutation_null(dup, {5, 1, Sidedness::TwoSided}), InvalidInput);
  std::vector<StudyDataset> ragged{random_study(10, 3, 3, 1, "A"), random_study(11, 3, 3, 2, "B")};
  EXPECT_THROW(build_permutation_null(ragged, {5, 1, Sidedness::TwoSided}), InvalidInput);
  std::vector<StudyDataset> small{random_study(10, 1, 3, 1, "A")};
  EXPECT_THROW(build_permutation_null(small, {5, 1, Sidedness::TwoSided}), InvalidInput);

  // A constant gene with s0 = 0 (all genes constant) has a zero denominator.
  StudyDataset flat = random_study(3, 2, 2, 1, "F");
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t j = 0; j < 4; ++j) flat.values(g, j) = 1.0;
  std::vector<StudyDataset> degenerate{flat};
  EXPECT_THROW(build_permutation_null(degenerate, {5, 1, Sidedness::TwoSided}), DegenerateVariance);
}
