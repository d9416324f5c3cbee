#pragma once

// Tab-delimited study ingest, run configuration and result tables.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "awmeta/analysis.hpp"
#include "awmeta/combiners.hpp"
#include "awmeta/stat_core.hpp"

namespace awmeta::io {

/// Sample columns of each group; every sample column must appear in exactly one.
struct LabelSpec {
  std::vector<std::string> control;
  std::vector<std::string> cases;
};

/// Header row: gene id column, then sample names. One row per probe.
/// Missing or non-numeric cells raise DataError naming line and column.
/// Repeated gene ids are averaged into one row at their first position.
stat::StudyDataset parse_study(std::istream& in, const LabelSpec& labels, std::string study_id,
                               const std::string& source = "<input>");
stat::StudyDataset ingest(const std::filesystem::path& path, const LabelSpec& labels, std::string study_id);

/// Inverse of parse_study at full precision; needs gene and sample ids.
void write_study(std::ostream& out, const stat::StudyDataset& dataset);

/// The label spec that reproduces `dataset.labels` from its sample ids.
LabelSpec label_spec(const stat::StudyDataset& dataset);

/// Reorders every study to the first study's gene order. Throws DataError
/// listing the symmetric difference when gene sets disagree.
void align_studies(std::span<stat::StudyDataset> studies);

struct StudySpec {
  std::string id;
  std::filesystem::path path;
  LabelSpec labels;
};

struct AnalysisConfig {
  std::vector<StudySpec> studies;
  std::vector<combine::Method> methods{combine::Method::AW};
  std::size_t permutations = 500;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  Sidedness sided = Sidedness::TwoSided;
  bool concordance_filter = false;
  unsigned max_studies = combine::kDefaultMaxStudies;
  std::filesystem::path out = "awmeta_out";
  bool full_precision = false;

  void validate() const;
  AnalysisOptions options() const;
};

/// Relative study paths resolve against `base_dir`.
AnalysisConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
AnalysisConfig load_config(const std::filesystem::path& path);

/// "aw", ..., or "all".
std::vector<combine::Method> parse_methods(const std::string& name);

std::string format_number(double v, bool full_precision);

/// Result tables keyed by file name, in write order.
struct OutputFiles {
  std::vector<std::pair<std::string, std::string>> files;
};

OutputFiles render_outputs(const AnalysisConfig& config, std::span<const stat::StudyDataset> studies,
                           const AnalysisResult& result);

struct RunSummary {
  std::vector<std::filesystem::path> written;
  std::vector<std::pair<combine::Method, std::size_t>> detected;
};

/// Ingests, aligns and analyzes everything before the first file is written.
RunSummary run_analysis(const AnalysisConfig& config);

}  // namespace awmeta::io
