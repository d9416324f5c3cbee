#include "awmeta/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "awmeta/normal.hpp"
#include "awmeta/rng.hpp"

namespace awmeta::analytic {

namespace {

constexpr std::uint64_t kCalibrationStream = 0x63616c6962ULL;  // "calib"

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
}

void check_studies(unsigned studies) {
  if (studies == 0) throw InvalidInput("need at least one study");
}

double p_from_z(double z, Sidedness sided) {
  return sided == Sidedness::OneSided ? normal::upper_tail(z) : std::erfc(std::fabs(z) / std::numbers::sqrt2);
}

struct Rules {
  double ew, minp, maxp;
  const NullCalibration* cal;
};

// Evaluates every method's rejection decision for one replicate.
void decide(std::span<const double> z, Sidedness sided, const Rules& rules, std::span<double> p,
            std::array<bool, 5>& reject) {
  double ew = 0.0, lo = 1.0, hi = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    p[k] = p_from_z(z[k], sided);
    ew += -std::log(p[k]);
    lo = std::min(lo, p[k]);
    hi = std::max(hi, p[k]);
  }
  reject[method_index(Method::EW)] = ew >= rules.ew;
  reject[method_index(Method::MinP)] = lo <= rules.minp;
  reject[method_index(Method::MaxP)] = hi <= rules.maxp;
  reject[method_index(Method::AW)] = aw_gamma_stat(p) <= rules.cal->aw;
  reject[method_index(Method::PR)] = pr_gaussian_stat(z) >= rules.cal->pr;
}

Rules rules_for(unsigned studies, double alpha, const NullCalibration& cal) {
  if (cal.studies != studies || cal.alpha != alpha)
    throw InvalidInput("null calibration was computed for a different K or alpha");
  return {critical_ew(alpha, studies), critical_minp(alpha, studies), critical_maxp(alpha, studies), &cal};
}

}  // namespace

double gamma_null_pvalue(double u, unsigned m) {
  if (m == 0) throw InvalidInput("gamma null: shape must be at least 1");
  if (!(u >= 0.0)) throw InvalidInput("gamma null: statistic must be nonnegative");
  if (u == 0.0) return 1.0;
  double term = 1.0, sum = 1.0;
  for (unsigned i = 1; i < m; ++i) {
    term *= u / static_cast<double>(i);
    sum += term;
  }
  // Scale in log space so large u with many terms does not overflow.
  return std::exp(-u + std::log(sum));
}

double gamma_upper_quantile(double tail, unsigned m) {
  check_alpha(tail);
  if (m == 0) throw InvalidInput("gamma quantile: shape must be at least 1");
  double lo = 0.0, hi = static_cast<double>(m) + 10.0;
  while (gamma_null_pvalue(hi, m) > tail) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    if (gamma_null_pvalue(mid, m) > tail) lo = mid;
    else hi = mid;
  }
  return lo + (hi - lo) / 2.0;
}

double critical_minp(double alpha, unsigned studies) {
  check_alpha(alpha);
  check_studies(studies);
  // 1 - (1 - alpha)^(1/K) without cancellation for small alpha.
  return -std::expm1(std::log1p(-alpha) / static_cast<double>(studies));
}

double critical_maxp(double alpha, unsigned studies) {
  check_alpha(alpha);
  check_studies(studies);
  return std::pow(alpha, 1.0 / static_cast<double>(studies));
}

double critical_ew(double alpha, unsigned studies) {
  check_studies(studies);
  return gamma_upper_quantile(alpha, studies);
}

double pvalue_density(double p, double c, Sidedness sided) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("p-value density: P must lie strictly inside (0, 1)");
  if (sided == Sidedness::OneSided) {
    const double z = normal::upper_quantile(p);
    return std::exp(c * z - c * c / 2.0);
  }
  const double z = normal::upper_quantile(p / 2.0);
  return 0.5 * std::exp(c / 2.0 * (2.0 * z - c)) + 0.5 * std::exp(-c / 2.0 * (2.0 * z + c));
}

double aw_gamma_stat(std::span<const double> p) {
  if (p.empty()) throw InvalidInput("AW: empty p-vector");
  std::array<double, 64> buf{};
  std::vector<double> heap;
  std::span<double> l;
  if (p.size() <= buf.size()) {
    l = std::span<double>(buf.data(), p.size());
  } else {
    heap.resize(p.size());
    l = heap;
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] > 0.0 && p[k] <= 1.0)) throw InvalidInput("AW: p-value outside (0, 1]");
    l[k] = -std::log(p[k]) + 0.0;
  }
  std::sort(l.begin(), l.end(), std::greater<>());
  double best = 1.0, u = 0.0;
  for (std::size_t m = 1; m <= l.size(); ++m) {
    u += l[m - 1];
    best = std::min(best, gamma_null_pvalue(u, static_cast<unsigned>(m)));
  }
  return best;
}

double pr_gaussian_stat(std::span<const double> z) {
  if (z.empty()) throw InvalidInput("PR: empty z-vector");
  double right = 0.0, left = 0.0;
  for (double v : z) {
    right += -std::log(normal::upper_tail(v));
    left += -std::log(normal::cdf(v));
  }
  return std::max(right, left);
}

NullCalibration calibrate_null(unsigned studies, double alpha, std::size_t draws, std::uint64_t seed) {
  check_alpha(alpha);
  check_studies(studies);
  if (draws == 0) throw InvalidInput("calibration: draws must be positive");
  std::vector<double> aw(draws), pr(draws), p(studies);
  for (std::size_t r = 0; r < draws; ++r) {
    rng::Xoshiro256 gen(rng::stream_key(seed, kCalibrationStream, r));
    double left = 0.0, right = 0.0;
    for (unsigned k = 0; k < studies; ++k) {
      p[k] = gen.uniform_open();
      right += -std::log(p[k]);
      left += -std::log1p(-p[k]);
    }
    aw[r] = aw_gamma_stat(p);
    pr[r] = std::max(left, right);
  }
  // Rejecting V <= aw[idx] (resp. V >= pr[idx]) covers ceil(alpha * draws) of the draws.
  const auto idx = static_cast<std::size_t>(std::max(1.0, std::ceil(alpha * static_cast<double>(draws)))) - 1;
  std::nth_element(aw.begin(), aw.begin() + idx, aw.end());
  std::nth_element(pr.begin(), pr.begin() + idx, pr.end(), std::greater<>());
  return {studies, alpha, draws, seed, aw[idx], pr[idx]};
}

void PowerScenario::validate() const {
  if (studies == 0) throw InvalidInput("power scenario: K must be at least 1");
  if (nonnull < 1 || nonnull > studies) throw InvalidInput("power scenario: need 1 <= h <= K");
  check_alpha(alpha);
  if (!(n1 > 0.0 && n2 > 0.0)) throw InvalidInput("power scenario: group sizes must be positive");
  if (!sigma.empty() && sigma.size() != studies) throw InvalidInput("power scenario: one sigma per study");
  for (unsigned k = 0; k < studies; ++k)
    if (!std::isfinite(noncentrality(k))) throw InvalidInput("power scenario: non-finite effect c_k");
}

double PowerScenario::noncentrality(unsigned k) const {
  if (k >= nonnull) return 0.0;
  const double s = sigma.empty() ? 1.0 : sigma[k];
  return theta / (s * std::sqrt(1.0 / n1 + 1.0 / n2));
}

std::size_t method_index(Method method) {
  for (std::size_t i = 0; i < std::size(combine::kAllMethods); ++i)
    if (combine::kAllMethods[i] == method) return i;
  return 0;
}

PowerByMethod power_all(const PowerScenario& scenario, std::size_t reps, std::uint64_t seed,
                        const NullCalibration& calibration) {
  scenario.validate();
  if (reps == 0) throw InvalidInput("power: reps must be positive");
  const Rules rules = rules_for(scenario.studies, scenario.alpha, calibration);
  std::vector<double> c(scenario.studies), z(scenario.studies), p(scenario.studies);
  for (unsigned k = 0; k < scenario.studies; ++k) c[k] = scenario.noncentrality(k);

  std::array<std::size_t, 5> hits{};
  std::array<bool, 5> reject{};
  for (std::size_t r = 0; r < reps; ++r) {
    rng::Xoshiro256 gen(rng::stream_key(seed, r));
    for (unsigned k = 0; k < scenario.studies; ++k) z[k] = c[k] + gen.normal();
    decide(z, scenario.sided, rules, p, reject);
    for (std::size_t m = 0; m < 5; ++m) hits[m] += reject[m];
  }
  PowerByMethod out{};
  for (std::size_t m = 0; m < 5; ++m) out[m] = static_cast<double>(hits[m]) / static_cast<double>(reps);
  return out;
}

double power_mc(const PowerScenario& scenario, Method method, std::size_t reps, std::uint64_t seed,
                const NullCalibration& calibration) {
  return power_all(scenario, reps, seed, calibration)[method_index(method)];
}

std::vector<PowerCurveRow> power_curve(unsigned studies, std::span<const double> thetas, double alpha,
                                       Sidedness sided, std::size_t reps, std::uint64_t seed,
                                       const NullCalibration& calibration) {
  std::vector<PowerCurveRow> rows;
  for (double theta : thetas) {
    for (unsigned h = 1; h <= studies; ++h) {
      PowerScenario s;
      s.studies = studies;
      s.nonnull = h;
      s.theta = theta;
      s.alpha = alpha;
      s.sided = sided;
      rows.push_back({h, theta, power_all(s, reps, seed, calibration)});
    }
  }
  return rows;
}

AcceptanceRule::AcceptanceRule(Method method, double alpha, const NullCalibration& calibration)
    : method_(method) {
  check_alpha(alpha);
  switch (method) {
    case Method::EW: critical_ = critical_ew(alpha, 2); break;
    case Method::MinP: critical_ = critical_minp(alpha, 2); break;
    case Method::MaxP: critical_ = critical_maxp(alpha, 2); break;
    case Method::PR:
    case Method::AW:
      if (calibration.studies != 2 || calibration.alpha != alpha)
        throw InvalidInput("acceptance region: AW and PR need a K = 2 calibration at the same alpha");
      critical_ = method == Method::PR ? calibration.pr : calibration.aw;
      break;
  }
}

bool AcceptanceRule::operator()(double z1, double z2) const {
  const std::array<double, 2> z{z1, z2};
  const std::array<double, 2> p{p_from_z(z1, Sidedness::TwoSided), p_from_z(z2, Sidedness::TwoSided)};
  switch (method_) {
    case Method::EW: return -std::log(p[0]) - std::log(p[1]) < critical_;
    case Method::MinP: return std::min(p[0], p[1]) > critical_;
    case Method::MaxP: return std::max(p[0], p[1]) > critical_;
    case Method::PR: return pr_gaussian_stat(z) < critical_;
    case Method::AW: return aw_gamma_stat(p) > critical_;
  }
  return true;
}

bool accepts(Method method, double z1, double z2, double alpha, const NullCalibration& calibration) {
  return AcceptanceRule(method, alpha, calibration)(z1, z2);
}

AcceptanceProbe acceptance_probe(Method method, double alpha, double extent, double step,
                                 const NullCalibration& calibration, std::size_t keep_violations) {
  check_alpha(alpha);
  if (!(extent > 0.0 && step > 0.0)) throw InvalidInput("probe: extent and step must be positive");
  const AcceptanceRule rule(method, alpha, calibration);

  AcceptanceProbe probe;
  probe.method = method;
  probe.alpha = alpha;
  probe.extent = extent;
  probe.step = step;
  probe.side = static_cast<std::size_t>(std::llround(2.0 * extent / step)) + 1;
  const std::size_t n = probe.side;
  probe.inside.assign(n * n, 0);

  // Points grouped by index parity; only same-parity pairs have lattice midpoints.
  std::array<std::vector<std::pair<std::uint32_t, std::uint32_t>>, 4> classes;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!rule(probe.coordinate(i), probe.coordinate(j))) continue;
      probe.inside[i * n + j] = 1;
      classes[(i & 1) * 2 + (j & 1)].emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  }

  for (const auto& pts : classes) {
    for (std::size_t a = 0; a < pts.size(); ++a) {
      for (std::size_t b = a + 1; b < pts.size(); ++b) {
        const std::size_t mi = (pts[a].first + pts[b].first) / 2;
        const std::size_t mj = (pts[a].second + pts[b].second) / 2;
        if (probe.inside[mi * n + mj]) continue;
        ++probe.violation_count;
        if (probe.violations.size() < keep_violations)
          probe.violations.push_back({pts[a].first, pts[a].second, pts[b].first, pts[b].second, mi, mj});
      }
    }
  }
  return probe;
}

}  // namespace awmeta::analytic
