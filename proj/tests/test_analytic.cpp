#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <map>
#include <numbers>

#include "awmeta/analytic.hpp"
#include "awmeta/normal.hpp"
#include "awmeta/rng.hpp"

using namespace awmeta;
using namespace awmeta::analytic;

namespace {

double binomial_se(double p, double n) { return std::sqrt(p * (1 - p) / n); }

// Calibrations are expensive; share them across tests.
const NullCalibration& calibration(unsigned k, double alpha) {
  static std::map<std::pair<unsigned, double>, NullCalibration> cache;
  auto it = cache.find({k, alpha});
  if (it == cache.end()) it = cache.emplace(std::pair{k, alpha}, calibrate_null(k, alpha)).first;
  return it->second;
}

double chi2_histogram_pvalue(double c, std::size_t draws, std::uint64_t seed, Sidedness sided) {
  constexpr int kBins = 50;
  std::vector<double> observed(kBins, 0.0);
  rng::Xoshiro256 gen(seed);
  for (std::size_t i = 0; i < draws; ++i) {
    const double z = c + gen.normal();
    const double p = sided == Sidedness::TwoSided ? std::erfc(std::fabs(z) / std::numbers::sqrt2) : normal::upper_tail(z);
    observed[std::min(kBins - 1, static_cast<int>(p * kBins))] += 1;
  }
  boost::math::quadrature::tanh_sinh<double> integrator;
  double chi2 = 0.0;
  for (int b = 0; b < kBins; ++b) {
    const double mass = integrator.integrate([&](double p) { return pvalue_density(p, c, sided); },
                                             static_cast<double>(b) / kBins, static_cast<double>(b + 1) / kBins);
    const double expected = mass * static_cast<double>(draws);
    chi2 += (observed[b] - expected) * (observed[b] - expected) / expected;
  }
  return boost::math::gamma_q((kBins - 1) / 2.0, chi2 / 2.0);
}

}  // namespace

TEST(GammaNull, Examples) {
  EXPECT_NEAR(gamma_null_pvalue(-std::log(0.05), 1), 0.05, 1e-15);
  for (unsigned m : {1u, 2u, 7u}) EXPECT_EQ(gamma_null_pvalue(0.0, m), 1.0);
  EXPECT_THROW(gamma_null_pvalue(1.0, 0), InvalidInput);
  EXPECT_THROW(gamma_null_pvalue(-1.0, 2), InvalidInput);
}

TEST(GammaNull, MatchesQuadratureOfDensity) {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (auto [m, u] : {std::pair{3u, 5.0}, {1u, 0.3}, {4u, 12.0}, {10u, 3.0}}) {
    const double lg = std::lgamma(static_cast<double>(m));
    const double tail = integrator.integrate(
        [&](double x) { return std::exp((m - 1.0) * std::log(x) - x - lg); }, u, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(gamma_null_pvalue(u, m), tail, 1e-8) << m << " " << u;
  }
}

TEST(GammaNull, QuantileInvertsTail) {
  for (unsigned m : {1u, 2u, 4u, 10u})
    for (double a : {0.5, 0.05, 1e-4}) {
      const double x = gamma_upper_quantile(a, m);
      EXPECT_NEAR(gamma_null_pvalue(x, m), a, 1e-12 * std::max(1.0, a * 1e3));
      EXPECT_NEAR(x, boost::math::gamma_q_inv(static_cast<double>(m), a), 1e-9 * x);
    }
}

TEST(CriticalValues, ClosedForms) {
  EXPECT_NEAR(critical_minp(0.05, 1), 0.05, 1e-15);
  EXPECT_NEAR(critical_maxp(0.05, 1), 0.05, 1e-15);
  EXPECT_NEAR(critical_minp(0.05, 2), 1 - std::sqrt(0.95), 1e-15);
  EXPECT_NEAR(critical_minp(0.05, 2), 0.025321, 1e-6);
  EXPECT_NEAR(critical_maxp(0.05, 2), 0.223607, 1e-6);
  EXPECT_NEAR(critical_ew(0.05, 1), -std::log(0.05), 1e-12);
  EXPECT_THROW(critical_minp(0.0, 2), InvalidInput);
  EXPECT_THROW(critical_maxp(0.5, 0), InvalidInput);
}

TEST(CriticalValues, LevelExactUnderUniformPairs) {
  const double alpha = 0.05, n = 1e6;
  const auto& cal = calibration(2, alpha);
  std::array<std::size_t, 5> rejections{};
  std::vector<AcceptanceRule> rules;
  for (Method m : combine::kAllMethods) rules.emplace_back(m, alpha, cal);
  rng::Xoshiro256 gen(4242);
  for (std::size_t i = 0; i < 1000000; ++i) {
    const double z1 = gen.normal(), z2 = gen.normal();
    for (std::size_t m = 0; m < 5; ++m) rejections[m] += !rules[m](z1, z2);
  }
  for (Method m : combine::kAllMethods)
    EXPECT_NEAR(rejections[method_index(m)] / n, alpha, 3 * binomial_se(alpha, n)) << combine::method_name(m);
}

TEST(Normal, QuantileAccuracy) {
  for (double z = -8.0; z <= 8.0; z += 0.01) {
    const double p = normal::cdf(z);
    const double ref = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    EXPECT_NEAR(normal::quantile(p), ref, 1e-10) << z;
    EXPECT_NEAR(normal::upper_quantile(p), -ref, 1e-10) << z;
  }
  EXPECT_NEAR(normal::cdf(-1.959963984540054), 0.025, 1e-15);
  EXPECT_NEAR(normal::upper_tail(10.0), 7.619853024160527e-24, 1e-36);
  EXPECT_THROW(normal::quantile(0.0), InvalidInput);
}

TEST(PvalueDensity, NullIsUniform) {
  for (double p : {1e-6, 0.01, 0.3, 0.5, 0.99}) {
    EXPECT_NEAR(pvalue_density(p, 0.0), 1.0, 1e-14);
    EXPECT_NEAR(pvalue_density(p, 0.0, Sidedness::OneSided), 1.0, 1e-14);
  }
  EXPECT_THROW(pvalue_density(0.0, 1.0), InvalidInput);
  EXPECT_THROW(pvalue_density(1.0, 1.0), InvalidInput);
}

TEST(PvalueDensity, IntegratesToOne) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (double c : {0.0, 1.0, 2.0, 3.0})
    for (auto sided : {Sidedness::TwoSided, Sidedness::OneSided}) {
      const double total = integrator.integrate([&](double p) { return pvalue_density(p, c, sided); }, 0.0, 1.0);
      EXPECT_NEAR(total, 1.0, 1e-6) << c;
    }
  EXPECT_GT(pvalue_density(0.001, 2.0), 1.0);
}

TEST(PvalueDensity, MatchesSimulatedHistogram) {
  for (double c : {0.0, 1.0, 2.0, 3.0}) {
    EXPECT_GT(chi2_histogram_pvalue(c, 1000000, 100 + static_cast<std::uint64_t>(c), Sidedness::TwoSided), 0.01) << c;
    EXPECT_GT(chi2_histogram_pvalue(c, 200000, 200 + static_cast<std::uint64_t>(c), Sidedness::OneSided), 0.01) << c;
  }
}

TEST(GaussianAw, TopMReductionMatchesEnumeration) {
  rng::Xoshiro256 gen(3);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> p(1 + gen.below(6));
    for (auto& v : p) v = gen.uniform_open();
    double best = 1.0;
    for (std::uint32_t bits = 1; bits < (1u << p.size()); ++bits) {
      double u = 0.0;
      unsigned m = 0;
      for (std::size_t k = 0; k < p.size(); ++k)
        if (bits >> k & 1u) {
          u += -std::log(p[k]);
          ++m;
        }
      best = std::min(best, boost::math::gamma_q(static_cast<double>(m), u));
    }
    EXPECT_NEAR(aw_gamma_stat(p), best, 1e-12 * std::max(best, 1e-300) + 1e-300);
  }
}

TEST(PowerScenario, Validation) {
  PowerScenario s;
  s.nonnull = 0;
  EXPECT_THROW(s.validate(), InvalidInput);
  s.nonnull = 11;
  EXPECT_THROW(s.validate(), InvalidInput);
  s.nonnull = 2;
  s.sigma = {1.0};
  EXPECT_THROW(s.validate(), InvalidInput);
  s.sigma.clear();
  s.theta = 1.4;
  EXPECT_NEAR(s.noncentrality(0), 1.4 / std::sqrt(0.4), 1e-15);
  EXPECT_EQ(s.noncentrality(5), 0.0);
  EXPECT_THROW(power_mc(s, Method::EW, 0, 1, calibration(10, 0.05)), InvalidInput);
}

TEST(Power, SizeAtThetaZero) {
  PowerScenario s;
  s.theta = 0.0;
  const double reps = 10000;
  for (auto sided : {Sidedness::TwoSided, Sidedness::OneSided}) {
    s.sided = sided;
    const auto power = power_all(s, 10000, 77, calibration(10, 0.05));
    for (Method m : combine::kAllMethods)
      EXPECT_NEAR(power[method_index(m)], 0.05, 3 * binomial_se(0.05, reps)) << combine::method_name(m);
  }
}

TEST(Power, MaxPMatchesProductFormula) {
  // All p_k <= C independently: power = prod_k P(p_k <= C).
  PowerScenario s;
  s.theta = 1.4;
  s.sided = Sidedness::OneSided;
  const double c = critical_maxp(0.05, 10), reps = 20000;
  const double z = normal::upper_quantile(c);
  for (unsigned h : {1u, 5u, 8u, 10u}) {
    s.nonnull = h;
    const double per = normal::upper_tail(z - s.noncentrality(0));
    const double exact = std::pow(per, h) * std::pow(c, 10.0 - h);
    const double got = power_mc(s, Method::MaxP, 20000, 9, calibration(10, 0.05));
    EXPECT_NEAR(got, exact, 4 * binomial_se(exact, reps)) << h;
  }
}

TEST(Power, OrderingAtExtremes) {
  PowerScenario s;
  s.theta = 1.4;
  s.sided = Sidedness::OneSided;
  s.nonnull = 1;
  const auto p1 = power_all(s, 10000, 5, calibration(10, 0.05));
  EXPECT_GT(p1[method_index(Method::MinP)], p1[method_index(Method::EW)]);
  s.nonnull = 10;
  const auto p10 = power_all(s, 10000, 5, calibration(10, 0.05));
  EXPECT_GT(p10[method_index(Method::EW)], p10[method_index(Method::MinP)]);
}

TEST(Power, NondecreasingInTheta) {
  const std::vector<double> thetas{0.0, 0.4, 0.8, 1.2, 1.6, 2.0};
  for (auto sided : {Sidedness::OneSided, Sidedness::TwoSided}) {
    const auto rows = power_curve(10, thetas, 0.05, sided, 4000, 21, calibration(10, 0.05));
    for (unsigned h = 1; h <= 10; ++h) {
      for (std::size_t m = 0; m < 5; ++m) {
        double prev = -1.0;
        for (const auto& r : rows) {
          if (r.h != h) continue;
          // One-sided rejection is monotone in every z, so shared draws give
          // exact monotonicity; two-sided allows Monte Carlo slack.
          const double slack = sided == Sidedness::OneSided ? 0.0 : 2 * binomial_se(0.5, 4000);
          EXPECT_GE(r.power[m] + slack, prev) << "h=" << h << " method " << m << " theta " << r.theta;
          prev = r.power[m];
        }
      }
    }
  }
}

TEST(Power, AwSandwich) {
  const std::vector<double> thetas{1.2, 1.4};
  const double reps = 10000;
  const auto rows = power_curve(10, thetas, 0.05, Sidedness::OneSided, 10000, 8, calibration(10, 0.05));
  for (const auto& r : rows) {
    const double aw = r.power[method_index(Method::AW)];
    const double ew = r.power[method_index(Method::EW)];
    const double minp = r.power[method_index(Method::MinP)];
    const double se = binomial_se(std::max(0.05, std::min(ew, minp)), reps);
    EXPECT_GE(aw, std::min(ew, minp) - 2 * se) << "h=" << r.h << " theta=" << r.theta;
    if (r.h == 1 || r.h == 10) {
      EXPECT_LE(std::max(ew, minp) - aw, 0.05) << "h=" << r.h << " theta=" << r.theta;
    }
  }
}

TEST(AcceptanceProbe, ConvexityByMethodAndLevel) {
  for (double alpha : {0.01, 0.05, 0.10}) {
    const auto& cal = calibration(2, alpha);
    for (Method m : combine::kAllMethods) {
      const auto probe = acceptance_probe(m, alpha, 4.0, 0.05, cal);
      EXPECT_EQ(probe.side, 161u);
      if (m == Method::MaxP) EXPECT_GT(probe.violation_count, 0u) << "alpha " << alpha;
      else EXPECT_EQ(probe.violation_count, 0u) << combine::method_name(m) << " alpha " << alpha;
    }
  }
}

TEST(AcceptanceProbe, DeterministicAndConsistentWithMembership) {
  const auto& cal = calibration(2, 0.05);
  const auto a = acceptance_probe(Method::AW, 0.05, 2.0, 0.1, cal);
  const auto b = acceptance_probe(Method::AW, 0.05, 2.0, 0.1, cal);
  EXPECT_EQ(a.inside, b.inside);
  for (std::size_t i = 0; i < a.side; ++i)
    for (std::size_t j = 0; j < a.side; ++j)
      EXPECT_EQ(a.inside[i * a.side + j] != 0, accepts(Method::AW, a.coordinate(i), a.coordinate(j), 0.05, cal));
  const auto maxp = acceptance_probe(Method::MaxP, 0.05, 4.0, 0.05, cal);
  ASSERT_FALSE(maxp.violations.empty());
  const auto& v = maxp.violations[0];
  EXPECT_TRUE(maxp.inside[v.a_i * maxp.side + v.a_j]);
  EXPECT_TRUE(maxp.inside[v.b_i * maxp.side + v.b_j]);
  EXPECT_FALSE(maxp.inside[v.mid_i * maxp.side + v.mid_j]);
  EXPECT_THROW(acceptance_probe(Method::AW, 0.05, 4.0, 0.05, calibration(10, 0.05)), InvalidInput);
}
