#include "awmeta/inference.hpp"

#include <algorithm>
#include <numeric>

#include "awmeta/tail_counts.hpp"

namespace awmeta::inference {

namespace {

std::vector<std::uint32_t> null_counts(const SortedReference& ref, std::span<const double> observed,
                                       Direction direction) {
  std::vector<std::uint32_t> out(observed.size());
  for (std::size_t g = 0; g < observed.size(); ++g)
    out[g] = direction == Direction::SmallIsSignificant ? ref.count_at_most(observed[g])
                                                        : ref.count_at_least(observed[g]);
  return out;
}

}  // namespace

std::vector<double> meta_pvalues(std::span<const double> observed, std::span<const double> null,
                                 Direction direction) {
  if (null.empty()) throw InvalidInput("meta p-values: empty null");
  return meta_pvalues(observed, SortedReference(null), direction);
}

std::vector<double> meta_pvalues(std::span<const double> observed, const SortedReference& null,
                                 Direction direction) {
  if (null.size() == 0) throw InvalidInput("meta p-values: empty null");
  const auto counts = null_counts(null, observed, direction);
  const double n = static_cast<double>(null.size());
  std::vector<double> p(observed.size());
  for (std::size_t g = 0; g < observed.size(); ++g) p[g] = static_cast<double>(std::max(counts[g], 1u)) / n;
  return p;
}

Pi0Estimate estimate_pi0(std::span<const double> meta_p, double lower, double upper) {
  if (meta_p.empty()) throw InvalidInput("pi0: no p-values");
  if (!(upper > lower)) throw InvalidInput("pi0: window A has zero length");
  Pi0Estimate est;
  est.lower = lower;
  est.upper = upper;
  for (double p : meta_p) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("pi0: p-value outside (0, 1]");
    if (p >= lower && p <= upper) ++est.mass;
  }
  const double g = static_cast<double>(meta_p.size());
  est.raw = static_cast<double>(est.mass) / (g * (upper - lower));
  est.pi0 = std::clamp(est.raw, 1.0 / g, 1.0);
  return est;
}

std::vector<double> qvalues(std::span<const double> observed, std::span<const double> null,
                            std::size_t permutations, double pi0, Direction direction) {
  if (null.empty()) throw InvalidInput("q-values: empty null");
  return qvalues(observed, SortedReference(null), permutations, pi0, direction);
}

std::vector<double> qvalues(std::span<const double> observed, const SortedReference& null,
                            std::size_t permutations, double pi0, Direction direction) {
  if (null.size() == 0 || permutations == 0) throw InvalidInput("q-values: empty null");
  if (!(pi0 > 0.0 && pi0 <= 1.0)) throw InvalidInput("q-values: pi0 outside (0, 1]");
  const std::size_t genes = observed.size();
  const auto ncount = null_counts(null, observed, direction);
  const auto ocount = null_counts(SortedReference(observed), observed, direction);

  std::vector<double> q(genes);
  for (std::size_t g = 0; g < genes; ++g)
    q[g] = pi0 * static_cast<double>(std::max(ncount[g], 1u)) /
           (static_cast<double>(permutations) * static_cast<double>(ocount[g]));

  // Most significant first; ties share a raw q so their relative order is immaterial.
  std::vector<std::size_t> order(genes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return direction == Direction::SmallIsSignificant ? observed[a] < observed[b] : observed[a] > observed[b];
  });
  double running = 1.0;
  for (std::size_t i = genes; i-- > 0;) {
    running = std::min(running, q[order[i]]);
    q[order[i]] = running;
  }
  return q;
}

std::string_view concordance_name(Concordance c) {
  switch (c) {
    case Concordance::Concordant:
      return "concordant";
    case Concordance::Discordant:
      return "discordant";
    case Concordance::NotApplicable:
      return "NA";
  }
  return "?";
}

Concordance classify_concordance(std::span<const double> t_row, WeightVector w, bool* zero_sign) {
  if (t_row.size() != w.size()) throw InvalidInput("concordance: weight length differs from K");
  if (zero_sign) *zero_sign = false;
  int sum = 0;
  for (unsigned k = 0; k < w.size(); ++k) {
    if (!w[k]) continue;
    if (t_row[k] == 0.0) {
      if (zero_sign) *zero_sign = true;
      return Concordance::Discordant;
    }
    sum += t_row[k] > 0.0 ? 1 : -1;
  }
  return std::abs(sum) == static_cast<int>(w.count()) ? Concordance::Concordant : Concordance::Discordant;
}

ConcordanceSplit concordance_split(std::span<const std::size_t> detected, const Matrix<double>& observed_t,
                                   std::span<const WeightVector> weights) {
  if (weights.size() != observed_t.rows()) throw InvalidInput("concordance: one weight per gene required");
  ConcordanceSplit split;
  for (std::size_t g : detected) {
    if (g >= observed_t.rows()) throw InvalidInput("concordance: gene index out of range");
    bool zero = false;
    if (classify_concordance(observed_t.row(g), weights[g], &zero) == Concordance::Concordant) {
      split.concordant.push_back(g);
    } else {
      split.discordant.push_back(g);
      if (zero) split.zero_sign.push_back(g);
    }
  }
  return split;
}

}  // namespace awmeta::inference
