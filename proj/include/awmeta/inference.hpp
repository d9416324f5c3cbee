#pragma once

// Meta p-values, pi0, q-values and the concordance split of detected genes.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "awmeta/combiners.hpp"
#include "awmeta/tail_counts.hpp"
#include "awmeta/types.hpp"

namespace awmeta::inference {

using combine::Direction;

/// p_V(V_g) = #{(b, g') : V^(b)_g' at least as extreme as V_g} / (B G),
/// floored at 1 / (B G).
std::vector<double> meta_pvalues(std::span<const double> observed, std::span<const double> null,
                                 Direction direction);
std::vector<double> meta_pvalues(std::span<const double> observed, const SortedReference& null,
                                 Direction direction);

struct Pi0Estimate {
  double pi0 = 1.0;    // clamped to [1/G, 1]
  double raw = 1.0;    // before clamping
  double lower = 0.5;  // window A = [lower, upper]
  double upper = 1.0;
  std::size_t mass = 0;  // meta p-values inside A
};

/// pi0 = #{p in A} / (G * |A|), clamped to [1/G, 1].
Pi0Estimate estimate_pi0(std::span<const double> meta_p, double lower = 0.5, double upper = 1.0);

/// q(V_g) = pi0 * #{null at least as extreme} / (B * #{observed at least as
/// extreme}), null count floored at 1, then made monotone by a cumulative
/// minimum from the least significant gene upward and capped at 1.
std::vector<double> qvalues(std::span<const double> observed, std::span<const double> null,
                            std::size_t permutations, double pi0, Direction direction);
std::vector<double> qvalues(std::span<const double> observed, const SortedReference& null,
                            std::size_t permutations, double pi0, Direction direction);

enum class Concordance { Concordant, Discordant, NotApplicable };

std::string_view concordance_name(Concordance c);

/// Concordant iff every study with weight 1 has the same nonzero sign of t.
/// A zero t in a contributing study breaks concordance and sets *zero_sign.
Concordance classify_concordance(std::span<const double> t_row, WeightVector w, bool* zero_sign = nullptr);

struct ConcordanceSplit {
  std::vector<std::size_t> concordant;
  std::vector<std::size_t> discordant;
  std::vector<std::size_t> zero_sign;  // subset of discordant flagged for exact zeros
};

ConcordanceSplit concordance_split(std::span<const std::size_t> detected, const Matrix<double>& observed_t,
                                   std::span<const WeightVector> weights);

}  // namespace awmeta::inference
