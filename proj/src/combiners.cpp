#include "awmeta/combiners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "awmeta/kernels.hpp"

namespace awmeta::combine {

namespace {

// -log p with -0.0 normalized to +0.0 (p == 1).
inline double neglog(double p) { return -std::log(p) + 0.0; }

void check_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("p-value outside (0, 1]: " + std::to_string(p));
}

void check_studies(std::size_t studies, unsigned max_studies) {
  if (studies == 0) throw InvalidInput("no studies to combine");
  const unsigned cap = std::min(max_studies, WeightVector::kRepresentableStudies);
  if (studies > cap)
    throw InvalidInput("weight search: K = " + std::to_string(studies) + " exceeds the configured cap of " +
                       std::to_string(cap));
}

// Lexicographic (count, contributing studies, counting index).
struct AwCandidate {
  std::uint32_t count = std::numeric_limits<std::uint32_t>::max();
  unsigned studies = 0;
  std::uint32_t bits = 0;

  bool better_than(const AwCandidate& o) const {
    return std::tie(count, studies, bits) < std::tie(o.count, o.studies, o.bits);
  }
};

std::vector<std::vector<double>> neglog_columns(const std::vector<std::vector<double>>& p) {
  std::vector<std::vector<double>> out(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    out[k].resize(p[k].size());
    for (std::size_t i = 0; i < p[k].size(); ++i) out[k][i] = neglog(p[k][i]);
  }
  return out;
}

std::vector<std::vector<double>> observed_columns(const Matrix<double>& m) {
  std::vector<std::vector<double>> out(m.cols());
  for (std::size_t k = 0; k < m.cols(); ++k) out[k] = m.column(k);
  return out;
}

// Walks every weight vector depth-first, extending with studies in
// ascending order so each U(w) is accumulated as sum over ascending k, the
// same order weighted_stat() uses.
class WeightWalker {
 public:
  WeightWalker(const std::vector<std::vector<double>>& null_cols, const std::vector<std::vector<double>>& obs_cols)
      : null_cols_(null_cols), obs_cols_(obs_cols), k_(null_cols.size()) {
    null_buf_.assign(k_ + 1, std::vector<double>(null_cols.empty() ? 0 : null_cols[0].size()));
    obs_buf_.assign(k_ + 1, std::vector<double>(obs_cols.empty() ? 0 : obs_cols[0].size()));
  }

  template <typename Visit>
  void run(Visit&& visit) {
    descend(0u, 0u, 0u, visit);
  }

 private:
  template <typename Visit>
  void descend(std::uint32_t bits, unsigned depth, unsigned first, Visit& visit) {
    for (unsigned k = first; k < k_; ++k) {
      const std::uint32_t next = bits | (1u << k);
      if (depth == 0) {
        std::copy(null_cols_[k].begin(), null_cols_[k].end(), null_buf_[1].begin());
        std::copy(obs_cols_[k].begin(), obs_cols_[k].end(), obs_buf_[1].begin());
      } else {
        kernels::add(null_buf_[depth], null_cols_[k], null_buf_[depth + 1]);
        kernels::add(obs_buf_[depth], obs_cols_[k], obs_buf_[depth + 1]);
      }
      visit(next, depth + 1, std::span<const double>(null_buf_[depth + 1]),
            std::span<const double>(obs_buf_[depth + 1]));
      descend(next, depth + 1, k + 1, visit);
    }
  }

  const std::vector<std::vector<double>>& null_cols_;
  const std::vector<std::vector<double>>& obs_cols_;
  unsigned k_;
  std::vector<std::vector<double>> null_buf_;
  std::vector<std::vector<double>> obs_buf_;
};

void check_null(const stat::PermutationNull& null) {
  if (null.pool_size() == 0 || null.permuted_p.size() != null.studies)
    throw InvalidInput("permutation null is not populated");
}

}  // namespace

Direction direction(Method method) {
  switch (method) {
    case Method::EW:
    case Method::PR:
      return Direction::LargeIsSignificant;
    case Method::MinP:
    case Method::MaxP:
    case Method::AW:
      return Direction::SmallIsSignificant;
  }
  return Direction::SmallIsSignificant;
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::EW:
      return "ew";
    case Method::MinP:
      return "minp";
    case Method::MaxP:
      return "maxp";
    case Method::PR:
      return "pr";
    case Method::AW:
      return "aw";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (method_name(m) == name) return m;
  throw InvalidInput("unknown method: " + std::string(name));
}

double weighted_stat(std::span<const double> p, WeightVector w) {
  if (w.size() != p.size()) throw InvalidInput("weighted statistic: weight length differs from K");
  double u = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    check_p(p[k]);
    if (w[static_cast<unsigned>(k)]) u += neglog(p[k]);
  }
  return u;
}

double ew_stat(std::span<const double> p) {
  if (p.empty()) throw InvalidInput("EW: empty p-vector");
  return weighted_stat(p, WeightVector::all(static_cast<unsigned>(p.size())));
}

double minp_stat(std::span<const double> p) {
  if (p.empty()) throw InvalidInput("minP: empty p-vector");
  double m = p[0];
  for (double v : p) m = m < v ? m : v;
  return m;
}

double maxp_stat(std::span<const double> p) {
  if (p.empty()) throw InvalidInput("maxP: empty p-vector");
  double m = p[0];
  for (double v : p) m = m > v ? m : v;
  return m;
}

double pr_stat(std::span<const double> p) {
  if (p.empty()) throw InvalidInput("PR: empty p-vector");
  double left = 0.0, right = 0.0;
  for (double v : p) {
    if (!(v > 0.0 && v < 1.0)) throw InvalidInput("PR: one-sided p-value must lie strictly inside (0, 1)");
    left += neglog(v);
    right += neglog(1.0 - v);
  }
  return std::max(left, right);
}

AwNullTable::AwNullTable(const stat::PermutationNull& null, unsigned max_studies)
    : studies_(static_cast<unsigned>(null.studies)), pool_(null.pool_size()) {
  check_studies(null.studies, max_studies);
  check_null(null);
  const auto lnull = neglog_columns(null.permuted_p);
  const std::vector<std::vector<double>> lobs(studies_);
  tables_.resize((std::size_t{1} << studies_) - 1);
  WeightWalker walker(lnull, lobs);
  walker.run([&](std::uint32_t bits, unsigned, std::span<const double> un, std::span<const double>) {
    tables_[bits - 1] = SortedReference(un);
  });
}

CombinedScore aw_search(std::span<const double> observed_p, const AwNullTable& table) {
  const unsigned k = table.studies();
  if (observed_p.size() != k) throw InvalidInput("AW search: p-vector length differs from K");
  AwCandidate best;
  double best_u = 0.0;
  for (std::uint32_t bits = 1; bits < (1u << k); ++bits) {
    const WeightVector w(bits, k);
    const double u = weighted_stat(observed_p, w);
    AwCandidate c{std::max(table.reference(bits).count_at_least(u), 1u), w.count(), bits};
    if (c.better_than(best)) {
      best = c;
      best_u = u;
    }
  }
  const double p_u = static_cast<double>(best.count) / static_cast<double>(table.pool_size());
  return {Method::AW, p_u, WeightVector(best.bits, k), best_u, p_u};
}

MethodScores aw_scores(const stat::PermutationNull& null, unsigned max_studies) {
  check_studies(null.studies, max_studies);
  check_null(null);
  const std::size_t genes = null.genes;
  const std::size_t pool = null.pool_size();
  const auto k = static_cast<unsigned>(null.studies);
  const auto lnull = neglog_columns(null.permuted_p);
  const auto lobs = neglog_columns(observed_columns(null.observed_p));

  std::vector<std::uint32_t> best_null(pool, std::numeric_limits<std::uint32_t>::max());
  std::vector<AwCandidate> best_obs(genes);
  std::vector<double> best_u(genes, 0.0);

  WeightWalker walker(lnull, lobs);
  walker.run([&](std::uint32_t bits, unsigned depth, std::span<const double> un, std::span<const double> uo) {
    const TailCounts counts = upper_tail_counts(un, uo);
    for (std::size_t i = 0; i < pool; ++i) best_null[i] = std::min(best_null[i], counts.pool[i]);
    for (std::size_t g = 0; g < genes; ++g) {
      const AwCandidate c{std::max(counts.queries[g], 1u), depth, bits};
      if (c.better_than(best_obs[g])) {
        best_obs[g] = c;
        best_u[g] = uo[g];
      }
    }
  });

  MethodScores out{Method::AW, Direction::SmallIsSignificant, {}, {}, {}, {}};
  const double n = static_cast<double>(pool);
  out.observed.resize(genes);
  out.weights.reserve(genes);
  for (std::size_t g = 0; g < genes; ++g) {
    out.observed[g] = static_cast<double>(best_obs[g].count) / n;
    out.weights.emplace_back(best_obs[g].bits, k);
  }
  out.u_statistic = std::move(best_u);
  out.null.resize(pool);
  for (std::size_t i = 0; i < pool; ++i) out.null[i] = static_cast<double>(best_null[i]) / n;
  return out;
}

std::vector<double> aw_null_scores(const stat::PermutationNull& null, unsigned max_studies) {
  return aw_scores(null, max_studies).null;
}

MethodScores score(Method method, const stat::PermutationNull& null, unsigned max_studies) {
  if (method == Method::AW) return aw_scores(null, max_studies);
  check_null(null);
  const std::size_t genes = null.genes;
  const std::size_t pool = null.pool_size();
  const std::size_t studies = null.studies;
  MethodScores out{method, direction(method), std::vector<double>(genes), std::vector<double>(pool), {}, {}};

  if (method == Method::PR) {
    if (null.permuted_p_upper.size() != studies) throw InvalidInput("PR needs one-sided p-values (B * G >= 2)");
    for (std::size_t g = 0; g < genes; ++g) out.observed[g] = pr_stat(null.observed_p_upper.row(g));
    std::vector<double> row(studies);
    for (std::size_t i = 0; i < pool; ++i) {
      for (std::size_t k = 0; k < studies; ++k) row[k] = null.permuted_p_upper[k][i];
      out.null[i] = pr_stat(row);
    }
    return out;
  }

  using Reduce = double (*)(std::span<const double>);
  Reduce reduce = method == Method::EW ? ew_stat : method == Method::MinP ? minp_stat : maxp_stat;
  for (std::size_t g = 0; g < genes; ++g) out.observed[g] = reduce(null.observed_p.row(g));

  // Column-wise accumulation in ascending study order, matching the
  // per-vector reductions above element by element.
  if (method == Method::EW) {
    const auto cols = neglog_columns(null.permuted_p);
    out.null = cols[0];
    for (std::size_t k = 1; k < studies; ++k) kernels::add(out.null, cols[k], out.null);
  } else {
    out.null = null.permuted_p[0];
    for (std::size_t k = 1; k < studies; ++k) {
      if (method == Method::MinP) kernels::min(out.null, null.permuted_p[k], out.null);
      else kernels::max(out.null, null.permuted_p[k], out.null);
    }
  }
  return out;
}

}  // namespace awmeta::combine
