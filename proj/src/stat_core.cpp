#include "awmeta/stat_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "awmeta/kernels.hpp"
#include "awmeta/rng.hpp"
#include "awmeta/tail_counts.hpp"

namespace awmeta::stat {

namespace {

struct GroupSummary {
  double mean_diff;
  double se;
};

// Operation order matches kernels::scalar::moderated_t so a single gene
// evaluated here agrees bit-for-bit with the batch kernel.
GroupSummary summarize(std::span<const double> control, std::span<const double> cases) {
  if (control.size() < 2 || cases.size() < 2)
    throw InvalidInput("moderated t: each group needs at least two samples");
  const double n = static_cast<double>(control.size());
  const double m = static_cast<double>(cases.size());
  double sum_c = 0.0, sum_x = 0.0;
  for (double v : control) sum_c += v;
  for (double v : cases) sum_x += v;
  const double mean_c = sum_c / n;
  const double mean_x = sum_x / m;
  double ss_c = 0.0, ss_x = 0.0;
  for (double v : control) {
    const double d = v - mean_c;
    ss_c += d * d;
  }
  for (double v : cases) {
    const double d = v - mean_x;
    ss_x += d * d;
  }
  const double var = (ss_c + ss_x) / (n + m - 2.0);
  return {mean_x - mean_c, std::sqrt(var * (1.0 / n + 1.0 / m))};
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("median of empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return lower + (upper - lower) / 2.0;
}

kernels::TwoGroupBatch make_batch(const Matrix<double>& sample_major, std::span<const std::uint8_t> labels) {
  kernels::TwoGroupBatch b;
  b.x = sample_major.data();
  b.samples = sample_major.rows();
  b.genes = sample_major.cols();
  b.labels = labels.data();
  b.n_case = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
  b.n_control = labels.size() - b.n_case;
  return b;
}

void run_batch(const kernels::TwoGroupBatch& batch, double s0, double* t, std::vector<double>& se_scratch) {
  se_scratch.resize(batch.genes);
  kernels::moderated_t(batch, s0, t, se_scratch.data());
  for (std::size_t g = 0; g < batch.genes; ++g)
    if (se_scratch[g] + s0 == 0.0)
      throw DegenerateVariance("moderated t: zero denominator for gene row " + std::to_string(g));
}

void check_labels(const StudyDataset& d, std::span<const std::uint8_t> labels) {
  if (labels.size() != d.samples()) throw InvalidInput("label vector length differs from sample count");
  std::size_t cases = 0;
  for (auto l : labels) {
    if (l > 1) throw InvalidInput("labels must be 0 (control) or 1 (case)");
    cases += l;
  }
  if (cases < 2 || labels.size() - cases < 2)
    throw InvalidInput("moderated t: each group needs at least two samples");
}

// Shared counting core for observed and permuted p-values of each study.
template <typename Transform, typename Finish>
PooledPvalues pooled_impl(const Matrix<double>& observed_t, std::span<const std::vector<double>> permuted_t,
                          Transform transform, Finish finish) {
  const std::size_t genes = observed_t.rows();
  const std::size_t studies = observed_t.cols();
  if (permuted_t.size() != studies) throw InvalidInput("pooled p-values: study count mismatch");
  if (genes == 0) throw InvalidInput("pooled p-values: B * G = 0");
  const std::size_t pool = permuted_t.empty() ? 0 : permuted_t[0].size();
  if (pool == 0 || pool % genes != 0) throw InvalidInput("pooled p-values: B * G = 0 or ragged permutation tensor");

  PooledPvalues out;
  out.observed = Matrix<double>(genes, studies);
  out.permuted.resize(studies);
  std::vector<double> ref(pool), obs(genes);
  for (std::size_t k = 0; k < studies; ++k) {
    if (permuted_t[k].size() != pool) throw InvalidInput("pooled p-values: ragged permutation tensor");
    for (std::size_t i = 0; i < pool; ++i) ref[i] = transform(permuted_t[k][i]);
    for (std::size_t g = 0; g < genes; ++g) obs[g] = transform(observed_t(g, k));
    const TailCounts counts = upper_tail_counts(ref, obs);
    const double n = static_cast<double>(pool);
    out.permuted[k].resize(pool);
    for (std::size_t i = 0; i < pool; ++i) out.permuted[k][i] = finish(counts.pool[i], n);
    for (std::size_t g = 0; g < genes; ++g) out.observed(g, k) = finish(counts.queries[g], n);
  }
  return out;
}

}  // namespace

std::size_t StudyDataset::n_case() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

std::size_t StudyDataset::n_control() const { return labels.size() - n_case(); }

void StudyDataset::validate() const {
  if (genes() == 0) throw InvalidInput("study " + study_id + ": no genes");
  if (!gene_ids.empty() && gene_ids.size() != genes())
    throw InvalidInput("study " + study_id + ": gene id count differs from row count");
  if (!sample_ids.empty() && sample_ids.size() != samples())
    throw InvalidInput("study " + study_id + ": sample id count differs from column count");
  check_labels(*this, labels);
  for (std::size_t g = 0; g < genes(); ++g)
    for (std::size_t s = 0; s < samples(); ++s)
      if (!std::isfinite(values(g, s)))
        throw InvalidInput("study " + study_id + ": missing or non-finite value at row " + std::to_string(g) +
                           ", column " + std::to_string(s));
}

double moderated_t(std::span<const double> control, std::span<const double> cases, double s0) {
  if (!(s0 >= 0.0)) throw InvalidInput("moderated t: s0 must be nonnegative");
  const GroupSummary s = summarize(control, cases);
  const double denom = s.se + s0;
  if (denom == 0.0) throw DegenerateVariance("moderated t: zero denominator");
  return s.mean_diff / denom;
}

double pooled_standard_error(std::span<const double> control, std::span<const double> cases) {
  return summarize(control, cases).se;
}

std::vector<double> gene_standard_errors(const StudyDataset& dataset) {
  dataset.validate();
  const Matrix<double> xs = dataset.values.transposed();
  const auto batch = make_batch(xs, dataset.labels);
  std::vector<double> t(dataset.genes()), se(dataset.genes());
  kernels::moderated_t(batch, 0.0, t.data(), se.data());
  return se;
}

double fudge_s0(const StudyDataset& dataset) { return median(gene_standard_errors(dataset)); }

std::vector<double> moderated_t_all(const StudyDataset& dataset, std::span<const std::uint8_t> labels, double s0) {
  dataset.validate();
  check_labels(dataset, labels);
  if (!(s0 >= 0.0)) throw InvalidInput("moderated t: s0 must be nonnegative");
  const Matrix<double> xs = dataset.values.transposed();
  std::vector<double> t(dataset.genes()), se;
  run_batch(make_batch(xs, labels), s0, t.data(), se);
  return t;
}

std::vector<std::vector<std::uint8_t>> permute_labels(const StudyDataset& dataset, std::size_t permutations,
                                                      std::uint64_t seed) {
  if (permutations == 0) throw InvalidInput("permutations: B must be at least 1");
  const std::size_t n = dataset.labels.size();
  const std::uint64_t study_key = rng::hash_string(dataset.study_id);
  std::vector<std::vector<std::uint8_t>> out(permutations);
  std::vector<std::size_t> order(n);
  for (std::size_t b = 0; b < permutations; ++b) {
    rng::Xoshiro256 gen(rng::stream_key(seed, study_key, b));
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[gen.below(i)]);
    out[b].resize(n);
    for (std::size_t i = 0; i < n; ++i) out[b][i] = dataset.labels[order[i]];
  }
  return out;
}

PooledPvalues pooled_pvalues(const Matrix<double>& observed_t, std::span<const std::vector<double>> permuted_t,
                             Sidedness sided) {
  const auto floor_p = [](std::uint32_t count, double n) { return static_cast<double>(std::max(count, 1u)) / n; };
  if (sided == Sidedness::TwoSided)
    return pooled_impl(observed_t, permuted_t, [](double t) { return std::fabs(t); }, floor_p);
  return pooled_impl(observed_t, permuted_t, [](double t) { return t; }, floor_p);
}

PooledPvalues pooled_onesided_clamped(const Matrix<double>& observed_t,
                                      std::span<const std::vector<double>> permuted_t) {
  if (!permuted_t.empty() && permuted_t[0].size() < 2)
    throw InvalidInput("one-sided clamped p-values need B * G >= 2");
  return pooled_impl(
      observed_t, permuted_t, [](double t) { return t; },
      [](std::uint32_t count, double n) {
        const double c = std::clamp(static_cast<double>(count), 1.0, n - 1.0);
        return c / n;
      });
}

PermutationNull build_permutation_null(std::span<const StudyDataset> studies, const NullOptions& options) {
  if (studies.empty()) throw InvalidInput("permutation null: no studies");
  if (options.permutations == 0) throw InvalidInput("permutations: B must be at least 1");
  const std::size_t genes = studies[0].genes();
  std::set<std::string> ids;
  for (const auto& s : studies) {
    s.validate();
    if (s.genes() != genes) throw InvalidInput("studies differ in gene count");
    if (!ids.insert(s.study_id).second) throw InvalidInput("duplicate study id: " + s.study_id);
  }

  PermutationNull null;
  null.genes = genes;
  null.studies = studies.size();
  null.permutations = options.permutations;
  null.seed = options.seed;
  null.sided = options.sided;
  null.observed_t = Matrix<double>(genes, studies.size());
  null.permuted_t.resize(studies.size());

  std::vector<double> se, t(genes);
  for (std::size_t k = 0; k < studies.size(); ++k) {
    const StudyDataset& d = studies[k];
    null.study_ids.push_back(d.study_id);
    const Matrix<double> xs = d.values.transposed();

    std::vector<double> observed_se(genes);
    kernels::moderated_t(make_batch(xs, d.labels), 0.0, t.data(), observed_se.data());
    const double s0 = median(observed_se);
    null.s0.push_back(s0);

    run_batch(make_batch(xs, d.labels), s0, t.data(), se);
    for (std::size_t g = 0; g < genes; ++g) null.observed_t(g, k) = t[g];

    const auto perms = permute_labels(d, options.permutations, options.seed);
    auto& tensor = null.permuted_t[k];
    tensor.resize(options.permutations * genes);
    for (std::size_t b = 0; b < options.permutations; ++b)
      run_batch(make_batch(xs, perms[b]), s0, tensor.data() + b * genes, se);
  }

  auto main = pooled_pvalues(null.observed_t, null.permuted_t, options.sided);
  null.observed_p = std::move(main.observed);
  null.permuted_p = std::move(main.permuted);
  if (null.pool_size() >= 2) {
    auto upper = pooled_onesided_clamped(null.observed_t, null.permuted_t);
    null.observed_p_upper = std::move(upper.observed);
    null.permuted_p_upper = std::move(upper.permuted);
  }
  return null;
}

}  // namespace awmeta::stat
