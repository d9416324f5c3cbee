#pragma once

// Combined statistics across K studies: EW (Fisher), minP (Tippett),
// maxP (Wilkinson), PR (Pearson) and the adaptively weighted (AW) statistic.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "awmeta/stat_core.hpp"
#include "awmeta/tail_counts.hpp"
#include "awmeta/types.hpp"

namespace awmeta::combine {

enum class Method { EW, MinP, MaxP, PR, AW };

inline constexpr Method kAllMethods[] = {Method::AW, Method::EW, Method::MinP, Method::MaxP, Method::PR};

/// Which end of the statistic's scale is evidence against the null.
enum class Direction { SmallIsSignificant, LargeIsSignificant };

Direction direction(Method method);
std::string_view method_name(Method method);  // "aw", "ew", "minp", "maxp", "pr"
Method parse_method(std::string_view name);

/// Default bound on K for the 2^K - 1 weight search.
inline constexpr unsigned kDefaultMaxStudies = 16;

/// U = -sum_k w_k log p_k, summed over selected studies in ascending k.
double weighted_stat(std::span<const double> p, WeightVector w);
double ew_stat(std::span<const double> p);
double minp_stat(std::span<const double> p);
double maxp_stat(std::span<const double> p);
/// max(-sum log p~, -sum log(1 - p~)) for one-sided p~ strictly inside (0, 1).
double pr_stat(std::span<const double> p_onesided);

struct CombinedScore {
  Method method;
  double statistic;                   // V_g; for AW the minimal p_U
  std::optional<WeightVector> weight;  // AW only
  double u_statistic = 0.0;            // AW only: u_g(w*)
  double u_pvalue = 1.0;               // AW only: p_U(u_g(w*))
};

/// Sorted permutation null of U(w) for every weight vector; memory grows as
/// (2^K - 1) * B * G, so this is for per-gene queries on modest K. The
/// whole-table path is aw_scores().
class AwNullTable {
 public:
  explicit AwNullTable(const stat::PermutationNull& null, unsigned max_studies = kDefaultMaxStudies);

  unsigned studies() const { return studies_; }
  std::size_t pool_size() const { return pool_; }
  const SortedReference& reference(std::uint32_t weight_bits) const { return tables_[weight_bits - 1]; }

 private:
  unsigned studies_;
  std::size_t pool_;
  std::vector<SortedReference> tables_;
};

/// AW for one observed p-vector: the weight minimizing p_U, with ties broken
/// by (smallest p_U, fewest contributing studies, lowest counting index).
CombinedScore aw_search(std::span<const double> observed_p, const AwNullTable& table);

/// Per-method scores for every gene (observed) and every permuted (b, g).
struct MethodScores {
  Method method;
  Direction direction;
  std::vector<double> observed;        // G
  std::vector<double> null;            // B * G, index b * G + g
  std::vector<WeightVector> weights;   // AW only, per gene
  std::vector<double> u_statistic;     // AW only, per gene
};

/// AW over the whole null in one pass per weight: each weight's null U
/// values are ranked once and reused for every observed and permuted query.
MethodScores aw_scores(const stat::PermutationNull& null, unsigned max_studies = kDefaultMaxStudies);

/// V^(b) for every permuted p-vector (the AW permutation null).
std::vector<double> aw_null_scores(const stat::PermutationNull& null, unsigned max_studies = kDefaultMaxStudies);

MethodScores score(Method method, const stat::PermutationNull& null, unsigned max_studies = kDefaultMaxStudies);

}  // namespace awmeta::combine
