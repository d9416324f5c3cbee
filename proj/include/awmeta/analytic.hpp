#pragma once

// Gaussian known-variance model for K independent two-sample Z tests:
// exact null distributions, critical values, p-value densities under the
// alternative, Monte Carlo power and planar acceptance-region probes.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "awmeta/combiners.hpp"
#include "awmeta/types.hpp"

namespace awmeta::analytic {

using combine::Method;

/// Upper tail of Gamma(m, 1) at u: e^{-u} sum_{i < m} u^i / i!.
double gamma_null_pvalue(double u, unsigned m);

/// x such that gamma_null_pvalue(x, m) == tail, by bisection to full precision.
double gamma_upper_quantile(double tail, unsigned m);

double critical_minp(double alpha, unsigned studies);  // 1 - (1 - alpha)^(1/K)
double critical_maxp(double alpha, unsigned studies);  // alpha^(1/K)
double critical_ew(double alpha, unsigned studies);    // Gamma(K, 1) upper alpha point

/// Density of a p-value under a Z ~ N(c, 1) alternative. Two-sided:
/// 1/2 exp{(c/2)(2z - c)} + 1/2 exp{-(c/2)(2z + c)} with z = Phi^{-1}(1 - P/2).
/// One-sided: exp{c z - c^2 / 2} with z = Phi^{-1}(1 - P).
double pvalue_density(double p, double c, Sidedness sided = Sidedness::TwoSided);

/// AW in the Gaussian model, with exact Gamma nulls for p_U:
/// min over weights of gamma_null_pvalue(U(w), |w|). For each |w| = m the
/// minimum is attained by the m smallest p-values, so this is O(K log K).
double aw_gamma_stat(std::span<const double> p);

/// PR from Z scores: max(-sum log(1 - Phi(z)), -sum log Phi(z)).
double pr_gaussian_stat(std::span<const double> z);

/// Simulated critical values for the two methods without closed forms.
struct NullCalibration {
  unsigned studies = 0;
  double alpha = 0.05;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
  double aw = 0.0;  // reject when V_AW <= aw
  double pr = 0.0;  // reject when V_PR >= pr
};

inline constexpr std::size_t kDefaultCalibrationDraws = 2'000'000;

/// Empirical alpha-quantile of V_AW and (1 - alpha)-quantile of V_PR from
/// independent uniform p-vectors. Independent of sidedness: both tests see
/// exactly uniform p-values under the null.
NullCalibration calibrate_null(unsigned studies, double alpha, std::size_t draws = kDefaultCalibrationDraws,
                               std::uint64_t seed = 20100815);

struct PowerScenario {
  unsigned studies = 10;      // K
  unsigned nonnull = 1;       // h, studies 1..h carry the effect
  double theta = 0.0;
  double n1 = 5.0;
  double n2 = 5.0;
  std::vector<double> sigma;  // per study; empty means all 1
  double alpha = 0.05;
  Sidedness sided = Sidedness::TwoSided;

  void validate() const;
  /// c_k = theta_k / (sigma_k sqrt(1/n1 + 1/n2)).
  double noncentrality(unsigned k) const;
};

/// Rejection rates of all five methods from the same draws, indexed in
/// kAllMethods order.
using PowerByMethod = std::array<double, 5>;

/// Draws Z_k ~ N(c_k, 1) per replicate from the stream keyed by (seed, rep),
/// so scenarios that differ only in theta or h share random numbers.
PowerByMethod power_all(const PowerScenario& scenario, std::size_t reps, std::uint64_t seed,
                        const NullCalibration& calibration);

double power_mc(const PowerScenario& scenario, Method method, std::size_t reps, std::uint64_t seed,
                const NullCalibration& calibration);

std::size_t method_index(Method method);

struct PowerCurveRow {
  unsigned h;
  double theta;
  PowerByMethod power;
};

std::vector<PowerCurveRow> power_curve(unsigned studies, std::span<const double> thetas, double alpha,
                                       Sidedness sided, std::size_t reps, std::uint64_t seed,
                                       const NullCalibration& calibration);

/// Lattice probe of the K = 2 acceptance region on the (z1, z2) plane.
struct AcceptanceProbe {
  struct Violation {
    std::size_t a_i, a_j, b_i, b_j, mid_i, mid_j;
  };

  Method method = Method::EW;
  double alpha = 0.05;
  double extent = 4.0;
  double step = 0.05;
  std::size_t side = 0;              // lattice points per axis
  std::vector<std::uint8_t> inside;  // side x side, index i * side + j for (z1_i, z2_j)
  std::size_t violation_count = 0;
  std::vector<Violation> violations;  // first few, for reporting

  double coordinate(std::size_t i) const { return -extent + static_cast<double>(i) * step; }
};

/// Membership in the K = 2 acceptance region on the (z1, z2) plane, with
/// two-sided p-values (PR works from z directly). Critical values are
/// resolved once at construction; AW and PR need a K = 2 calibration at the
/// same alpha.
class AcceptanceRule {
 public:
  AcceptanceRule(Method method, double alpha, const NullCalibration& calibration);
  bool operator()(double z1, double z2) const;

 private:
  Method method_;
  double critical_;
};

bool accepts(Method method, double z1, double z2, double alpha, const NullCalibration& calibration);

/// Falsification probe: every pair of in-region lattice points whose
/// midpoint is itself a lattice point must have an in-region midpoint.
AcceptanceProbe acceptance_probe(Method method, double alpha, double extent, double step,
                                 const NullCalibration& calibration, std::size_t keep_violations = 16);

}  // namespace awmeta::analytic
