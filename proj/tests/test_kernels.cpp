#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "awmeta/kernels.hpp"
#include "awmeta/rng.hpp"
#include "awmeta/types.hpp"

using namespace awmeta;

namespace {

struct Batch {
  std::vector<double> x;
  std::vector<std::uint8_t> labels;
  kernels::TwoGroupBatch view;
};

Batch random_batch(std::size_t genes, std::size_t n_control, std::size_t n_case, std::uint64_t seed) {
  rng::Xoshiro256 gen(seed);
  Batch b;
  const std::size_t samples = n_control + n_case;
  b.x.resize(samples * genes);
  for (auto& v : b.x) v = gen.normal() * 3.0 + 1.0;
  b.labels.assign(samples, 0);
  for (std::size_t i = 0; i < n_case; ++i) b.labels[i] = 1;
  for (std::size_t i = samples; i > 1; --i) std::swap(b.labels[i - 1], b.labels[gen.below(i)]);
  b.view = {b.x.data(), samples, genes, b.labels.data(), n_control, n_case};
  return b;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Direct transcription of the two-sample formula for one gene.
double t_reference(const Batch& b, std::size_t g, double s0, double* se_out) {
  double sc = 0, sx = 0;
  for (std::size_t s = 0; s < b.view.samples; ++s) (b.labels[s] ? sx : sc) += b.x[s * b.view.genes + g];
  const double mc = sc / static_cast<double>(b.view.n_control), mx = sx / static_cast<double>(b.view.n_case);
  double ssc = 0, ssx = 0;
  for (std::size_t s = 0; s < b.view.samples; ++s) {
    const double v = b.x[s * b.view.genes + g];
    if (b.labels[s]) ssx += (v - mx) * (v - mx);
    else ssc += (v - mc) * (v - mc);
  }
  const double dof = static_cast<double>(b.view.n_control + b.view.n_case - 2);
  const double se =
      std::sqrt((ssc + ssx) / dof * (1.0 / static_cast<double>(b.view.n_control) + 1.0 / static_cast<double>(b.view.n_case)));
  *se_out = se;
  return (mx - mc) / (se + s0);
}

}  // namespace

TEST(Kernels, ScalarMatchesFormula) {
  const Batch b = random_batch(37, 5, 4, 11);
  std::vector<double> t(37), se(37);
  kernels::scalar::moderated_t(b.view, 0.3, t.data(), se.data());
  for (std::size_t g = 0; g < 37; ++g) {
    double se_ref;
    EXPECT_NEAR(t[g], t_reference(b, g, 0.3, &se_ref), 1e-12);
    EXPECT_NEAR(se[g], se_ref, 1e-12);
  }
}

#if defined(AWMETA_HAVE_AVX2)
TEST(Kernels, Avx2BitIdenticalToScalar) {
  if (kernels::detected_isa() != kernels::Isa::Avx2) GTEST_SKIP() << "CPU lacks AVX2";
  for (std::size_t genes : {1u, 3u, 4u, 5u, 8u, 17u, 1000u, 2003u}) {
    for (auto [nc, nx] : {std::pair{2u, 2u}, {5u, 5u}, {3u, 7u}}) {
      const Batch b = random_batch(genes, nc, nx, genes * 31 + nc);
      std::vector<double> t1(genes), s1(genes), t2(genes), s2(genes);
      kernels::scalar::moderated_t(b.view, 0.25, t1.data(), s1.data());
      kernels::avx2::moderated_t(b.view, 0.25, t2.data(), s2.data());
      EXPECT_TRUE(same_bits(t1, t2)) << "genes=" << genes;
      EXPECT_TRUE(same_bits(s1, s2)) << "genes=" << genes;
    }
  }
}

TEST(Kernels, Avx2ElementwiseBitIdentical) {
  if (kernels::detected_isa() != kernels::Isa::Avx2) GTEST_SKIP() << "CPU lacks AVX2";
  rng::Xoshiro256 gen(5);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 1001u}) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = gen.normal();
      b[i] = i % 5 == 0 ? a[i] : gen.normal();  // exact ties
    }
    if (n > 2) {
      a[1] = 0.0;
      b[1] = -0.0;
      a[2] = -0.0;
      b[2] = 0.0;
    }
    std::vector<double> o1(n), o2(n);
    kernels::scalar::add(a.data(), b.data(), o1.data(), n);
    kernels::avx2::add(a.data(), b.data(), o2.data(), n);
    EXPECT_TRUE(same_bits(o1, o2));
    kernels::scalar::min(a.data(), b.data(), o1.data(), n);
    kernels::avx2::min(a.data(), b.data(), o2.data(), n);
    EXPECT_TRUE(same_bits(o1, o2));
    kernels::scalar::max(a.data(), b.data(), o1.data(), n);
    kernels::avx2::max(a.data(), b.data(), o2.data(), n);
    EXPECT_TRUE(same_bits(o1, o2));
  }
}
#endif

TEST(Kernels, DispatchFollowsSelectedIsa) {
  const auto original = kernels::active_isa();
  const Batch b = random_batch(101, 4, 6, 3);
  std::vector<double> ref(101), se(101), got(101);
  kernels::scalar::moderated_t(b.view, 0.1, ref.data(), se.data());
  kernels::set_isa(kernels::Isa::Scalar);
  EXPECT_EQ(kernels::active_isa(), kernels::Isa::Scalar);
  kernels::moderated_t(b.view, 0.1, got.data(), se.data());
  EXPECT_TRUE(same_bits(ref, got));
  kernels::set_isa(kernels::detected_isa());
  kernels::moderated_t(b.view, 0.1, got.data(), se.data());
  EXPECT_TRUE(same_bits(ref, got));
  kernels::set_isa(original);
}

TEST(Kernels, UnsupportedIsaRejected) {
#if !defined(AWMETA_HAVE_NEON)
  EXPECT_THROW(kernels::set_isa(kernels::Isa::Neon), InvalidInput);
#endif
  EXPECT_NO_THROW(kernels::set_isa(kernels::Isa::Scalar));
  kernels::set_isa(kernels::detected_isa());
}

TEST(Kernels, SpanSizeMismatchRejected) {
  std::vector<double> a(4), b(3), out(4);
  EXPECT_THROW(kernels::add(a, b, out), InvalidInput);
}

TEST(Kernels, MinMaxSemantics) {
  const std::vector<double> a{1.0, 2.0, -3.0}, b{2.0, 2.0, -4.0};
  std::vector<double> out(3);
  kernels::min(a, b, out);
  EXPECT_EQ(out, (std::vector<double>{1.0, 2.0, -4.0}));
  kernels::max(a, b, out);
  EXPECT_EQ(out, (std::vector<double>{2.0, 2.0, -3.0}));
}
