#pragma once

// End-to-end meta-analysis: permutation null, combined statistics, meta
// p-values, q-values, detection and (AW) concordance.

#include <optional>
#include <span>
#include <vector>

#include "awmeta/combiners.hpp"
#include "awmeta/inference.hpp"
#include "awmeta/stat_core.hpp"

namespace awmeta {

struct AnalysisOptions {
  std::size_t permutations = 500;
  std::uint64_t seed = 1;
  Sidedness sided = Sidedness::TwoSided;
  double alpha = 0.05;
  bool concordance_filter = false;  // AW detections restricted to concordant genes
  unsigned max_studies = combine::kDefaultMaxStudies;
  double pi0_lower = 0.5;
  double pi0_upper = 1.0;
};

struct GeneMetaResult {
  std::size_t gene = 0;
  combine::Method method = combine::Method::AW;
  double statistic = 0.0;
  double meta_p = 1.0;
  double q = 1.0;
  std::optional<WeightVector> weight;  // AW only
  inference::Concordance concordance = inference::Concordance::NotApplicable;
  bool zero_sign = false;
  bool detected = false;
};

struct MethodResult {
  combine::Method method = combine::Method::AW;
  inference::Pi0Estimate pi0;
  std::vector<GeneMetaResult> genes;
  std::vector<std::size_t> detected;    // after the concordance filter, if enabled
  inference::ConcordanceSplit split;    // AW only: split of q <= alpha genes
};

/// Steps III and IV for one method's scores.
MethodResult assess(const combine::MethodScores& scores, const stat::PermutationNull& null,
                    const AnalysisOptions& options);

struct AnalysisResult {
  stat::PermutationNull null;
  std::vector<MethodResult> methods;
};

AnalysisResult analyze(std::span<const stat::StudyDataset> studies, std::span<const combine::Method> methods,
                       const AnalysisOptions& options);

}  // namespace awmeta
