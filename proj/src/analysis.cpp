#include "awmeta/analysis.hpp"

namespace awmeta {

MethodResult assess(const combine::MethodScores& scores, const stat::PermutationNull& null,
                    const AnalysisOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  const std::size_t genes = scores.observed.size();
  MethodResult out;
  out.method = scores.method;

  if (scores.null.empty()) throw InvalidInput("assess: empty null");
  const SortedReference reference(scores.null);
  const auto meta_p = inference::meta_pvalues(scores.observed, reference, scores.direction);
  out.pi0 = inference::estimate_pi0(meta_p, options.pi0_lower, options.pi0_upper);
  const auto q = inference::qvalues(scores.observed, reference, null.permutations, out.pi0.pi0, scores.direction);

  const bool aw = scores.method == combine::Method::AW;
  std::vector<std::size_t> passing;
  out.genes.resize(genes);
  for (std::size_t g = 0; g < genes; ++g) {
    GeneMetaResult& r = out.genes[g];
    r.gene = g;
    r.method = scores.method;
    r.statistic = scores.observed[g];
    r.meta_p = meta_p[g];
    r.q = q[g];
    if (aw) {
      r.weight = scores.weights[g];
      r.concordance = inference::classify_concordance(null.observed_t.row(g), scores.weights[g], &r.zero_sign);
    }
    if (q[g] <= options.alpha) passing.push_back(g);
  }

  if (aw) out.split = inference::concordance_split(passing, null.observed_t, scores.weights);
  out.detected = aw && options.concordance_filter ? out.split.concordant : passing;
  for (std::size_t g : out.detected) out.genes[g].detected = true;
  return out;
}

AnalysisResult analyze(std::span<const stat::StudyDataset> studies, std::span<const combine::Method> methods,
                       const AnalysisOptions& options) {
  AnalysisResult result;
  result.null = stat::build_permutation_null(
      studies, stat::NullOptions{options.permutations, options.seed, options.sided});
  for (combine::Method m : methods)
    result.methods.push_back(assess(combine::score(m, result.null, options.max_studies), result.null, options));
  return result;
}

}  // namespace awmeta
