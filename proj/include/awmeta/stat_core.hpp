#pragma once

// Per-study moderated t-statistics and pooled permutation p-values.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "awmeta/types.hpp"

namespace awmeta::stat {

/// One study: genes x samples intensities with two-group labels.
/// Row order defines gene identity and must agree across studies.
struct StudyDataset {
  std::string study_id;
  std::vector<std::string> gene_ids;    // optional; empty or one per row
  std::vector<std::string> sample_ids;  // optional; empty or one per column
  Matrix<double> values;                // genes x samples
  std::vector<std::uint8_t> labels;     // per sample: 0 control, 1 case

  std::size_t genes() const { return values.rows(); }
  std::size_t samples() const { return values.cols(); }
  std::size_t n_control() const;
  std::size_t n_case() const;

  /// Throws InvalidInput unless shapes agree, labels are 0/1, each group
  /// has at least two samples and every value is finite.
  void validate() const;

  friend bool operator==(const StudyDataset&, const StudyDataset&) = default;
};

/// (mean(case) - mean(control)) / (se + s0) where se is the pooled-variance
/// two-sample standard error.
double moderated_t(std::span<const double> control, std::span<const double> cases, double s0);

/// Pooled-variance standard error sqrt(sp^2 (1/n + 1/m)).
double pooled_standard_error(std::span<const double> control, std::span<const double> cases);

/// se for every gene under the dataset's own labels.
std::vector<double> gene_standard_errors(const StudyDataset& dataset);

/// Fudge constant: median over genes of the per-gene standard error.
/// With an even gene count the two middle values are averaged.
double fudge_s0(const StudyDataset& dataset);

/// Moderated t for every gene under `labels` (a relabelling of the samples).
std::vector<double> moderated_t_all(const StudyDataset& dataset, std::span<const std::uint8_t> labels, double s0);

/// B uniform relabellings of the samples. Permutation b is drawn from the
/// stream keyed by (seed, study_id, b) and applies to all genes alike.
std::vector<std::vector<std::uint8_t>> permute_labels(const StudyDataset& dataset, std::size_t permutations,
                                                      std::uint64_t seed);

/// p-values against the pooled null of one study or of all K studies.
/// `permuted[k]` holds study k's B x G permuted values at index b * G + g.
struct PooledPvalues {
  Matrix<double> observed;                   // G x K
  std::vector<std::vector<double>> permuted;  // [k][b * G + g]
};

/// p = #{(b, g') : t_{g'k}^(b) in R(t)} / (B G), floored at 1 / (B G).
/// Two-sided: R(t) = {|t'| >= |t|}. One-sided: R(t) = {t' >= t}.
PooledPvalues pooled_pvalues(const Matrix<double>& observed_t, std::span<const std::vector<double>> permuted_t,
                             Sidedness sided);

/// Upper-tail pooled p-values clamped to [1/(BG), 1 - 1/(BG)] so that both
/// log p and log(1 - p) stay finite; the input of the PR combiner.
PooledPvalues pooled_onesided_clamped(const Matrix<double>& observed_t,
                                      std::span<const std::vector<double>> permuted_t);

struct NullOptions {
  std::size_t permutations = 500;
  std::uint64_t seed = 1;
  Sidedness sided = Sidedness::TwoSided;
};

/// Observed and permuted statistics for all K studies against one shared
/// permutation scheme.
struct PermutationNull {
  std::size_t genes = 0;
  std::size_t studies = 0;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
  Sidedness sided = Sidedness::TwoSided;
  std::vector<std::string> study_ids;
  std::vector<double> s0;

  Matrix<double> observed_t;                      // G x K
  std::vector<std::vector<double>> permuted_t;    // [k][b * G + g]
  Matrix<double> observed_p;                      // G x K
  std::vector<std::vector<double>> permuted_p;    // [k][b * G + g]
  Matrix<double> observed_p_upper;                // clamped one-sided, G x K
  std::vector<std::vector<double>> permuted_p_upper;

  std::size_t pool_size() const { return permutations * genes; }
};

/// Steps: s0 per study from observed labels, observed and permuted t,
/// pooled p-values. Studies must share G and carry distinct study ids.
PermutationNull build_permutation_null(std::span<const StudyDataset> studies, const NullOptions& options);

}  // namespace awmeta::stat
