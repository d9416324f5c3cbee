#pragma once

// Synthetic multi-study expression data with known differential expression,
// run end to end through the permutation pipeline for each method.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "awmeta/analysis.hpp"
#include "awmeta/combiners.hpp"
#include "awmeta/stat_core.hpp"

namespace awmeta::sim {

// Gene layout per study: [0, g1) category I, [g1, g1 + g2) category II,
// then nulls. Category I shifts the case mean by theta in every study,
// category II only in the last study.
struct SimScenario {
  unsigned studies = 4;
  std::size_t n_control = 5;
  std::size_t n_case = 5;
  std::size_t g1 = 0;
  std::size_t g2 = 400;
  std::size_t nulls = 1600;
  double theta = 2.0;
  std::size_t reps = 200;
  std::size_t permutations = 300;
  std::uint64_t seed = 2010;
  double alpha = 0.05;
  Sidedness sided = Sidedness::TwoSided;
  std::vector<combine::Method> methods{std::begin(combine::kAllMethods), std::end(combine::kAllMethods)};
  // Flip the sign of the category-I effect in the first study for every
  // other category-I gene, producing discordant genes.
  bool sign_flip = false;
  bool concordance_filter = false;
  unsigned threads = 0;  // 0: hardware concurrency

  static constexpr std::size_t kDefaultReps = 200;
  static constexpr std::size_t kFullReps = 1000;

  std::size_t genes() const { return g1 + g2 + nulls; }
  void validate() const;
};

enum class Category { I, II, Null };

Category category(const SimScenario& s, std::size_t gene);

/// Effect added to case samples of `gene` in study `study`.
double effect(const SimScenario& s, std::size_t gene, unsigned study);

/// K datasets for one repetition; deterministic in (seed, rep).
std::vector<stat::StudyDataset> generate_scenario(const SimScenario& s, std::size_t rep);

struct RepCounts {
  std::size_t cat1 = 0, cat2 = 0, null = 0;
  std::size_t total() const { return cat1 + cat2 + null; }
  double fdr() const { return static_cast<double>(null) / static_cast<double>(std::max<std::size_t>(total(), 1)); }
  friend bool operator==(const RepCounts&, const RepCounts&) = default;
};

struct MethodSummary {
  combine::Method method;
  double mean_cat1 = 0.0, mean_cat2 = 0.0, mean_null = 0.0;
  double mean_fdr = 0.0, se_fdr = 0.0;
  std::vector<RepCounts> per_rep;
  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct SimReport {
  SimScenario scenario;
  std::vector<MethodSummary> methods;  // in scenario.methods order

  const MethodSummary& at(combine::Method m) const;
};

/// Detections for one repetition, one entry per scenario method.
std::vector<RepCounts> run_rep(const SimScenario& s, std::size_t rep);

SimReport run_scenario(const SimScenario& s);

/// Columns: method, I, II, Null, FDR, FDR_se.
std::string format_report(const SimReport& report);

SimScenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const SimScenario& s);

}  // namespace awmeta::sim
