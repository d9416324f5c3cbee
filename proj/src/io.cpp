#include "awmeta/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

namespace awmeta::io {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string cell_name(const std::string& source, std::size_t line, std::size_t column, std::string_view header) {
  return source + ": line " + std::to_string(line) + ", column " + std::to_string(column) + " (" +
         std::string(header) + ")";
}

std::string list_names(const std::vector<std::string>& names, std::size_t limit = 20) {
  std::string out;
  for (std::size_t i = 0; i < names.size() && i < limit; ++i) out += (i ? ", " : "") + names[i];
  if (names.size() > limit) out += ", ... (" + std::to_string(names.size()) + " total)";
  return out;
}

}  // namespace

stat::StudyDataset parse_study(std::istream& in, const LabelSpec& labels, std::string study_id,
                               const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto f : split_tabs(line)) header.emplace_back(trim(f));
    break;
  }
  if (header.size() < 2) throw DataError(source + ": missing header row with sample columns");

  stat::StudyDataset d;
  d.study_id = std::move(study_id);
  d.sample_ids.assign(header.begin() + 1, header.end());
  const std::size_t samples = d.sample_ids.size();

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t j = 0; j < samples; ++j) {
    if (d.sample_ids[j].empty()) throw DataError(source + ": empty sample name in header column " + std::to_string(j + 2));
    if (!column.emplace(d.sample_ids[j], j).second)
      throw DataError(source + ": duplicate sample column '" + d.sample_ids[j] + "'");
  }
  std::vector<int> group(samples, -1);
  auto assign = [&](const std::vector<std::string>& names, int g) {
    for (const auto& name : names) {
      const auto it = column.find(name);
      if (it == column.end()) throw DataError(source + ": labelled sample '" + name + "' is not a column");
      if (group[it->second] != -1) throw DataError(source + ": sample '" + name + "' is labelled twice");
      group[it->second] = g;
    }
  };
  assign(labels.control, 0);
  assign(labels.cases, 1);
  std::vector<std::string> unlabelled;
  for (std::size_t j = 0; j < samples; ++j)
    if (group[j] < 0) unlabelled.push_back(d.sample_ids[j]);
  if (!unlabelled.empty()) throw DataError(source + ": sample columns without a group label: " + list_names(unlabelled));
  for (int g : group) d.labels.push_back(static_cast<std::uint8_t>(g));

  // Rows accumulate into their gene's first position; repeats are averaged.
  std::unordered_map<std::string, std::size_t> row_of;
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  std::vector<double> row(samples);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() > header.size())
      throw DataError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()));
    const std::string gene(trim(fields[0]));
    if (gene.empty()) throw DataError(cell_name(source, line_no, 1, header[0]) + ": empty gene id");
    for (std::size_t j = 0; j < samples; ++j) {
      const std::size_t col = j + 2;
      if (j + 1 >= fields.size()) throw DataError(cell_name(source, line_no, col, header[j + 1]) + ": missing value");
      const std::string_view cell = trim(fields[j + 1]);
      if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "NULL")
        throw DataError(cell_name(source, line_no, col, header[j + 1]) + ": missing value");
      const char* first = cell.data();
      if (*first == '+') ++first;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError(cell_name(source, line_no, col, header[j + 1]) + ": not a number: '" + std::string(cell) + "'");
      if (!std::isfinite(v)) throw DataError(cell_name(source, line_no, col, header[j + 1]) + ": non-finite value");
      row[j] = v;
    }
    const auto [it, fresh] = row_of.emplace(gene, d.gene_ids.size());
    if (fresh) {
      d.gene_ids.push_back(gene);
      sums.insert(sums.end(), row.begin(), row.end());
      counts.push_back(1);
    } else {
      double* acc = sums.data() + it->second * samples;
      for (std::size_t j = 0; j < samples; ++j) acc[j] += row[j];
      ++counts[it->second];
    }
  }
  if (d.gene_ids.empty()) throw DataError(source + ": no data rows");

  d.values = Matrix<double>(d.gene_ids.size(), samples);
  for (std::size_t g = 0; g < d.gene_ids.size(); ++g)
    for (std::size_t j = 0; j < samples; ++j)
      d.values(g, j) = counts[g] == 1 ? sums[g * samples + j] : sums[g * samples + j] / static_cast<double>(counts[g]);
  try {
    d.validate();
  } catch (const InvalidInput& e) {
    throw DataError(source + ": " + e.what());
  }
  return d;
}

stat::StudyDataset ingest(const std::filesystem::path& path, const LabelSpec& labels, std::string study_id) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open study file " + path.string());
  return parse_study(in, labels, std::move(study_id), path.string());
}

void write_study(std::ostream& out, const stat::StudyDataset& d) {
  d.validate();
  if (d.gene_ids.size() != d.genes() || d.sample_ids.size() != d.samples())
    throw InvalidInput("write_study: gene and sample ids are required");
  out << "gene";
  for (const auto& s : d.sample_ids) out << '\t' << s;
  out << '\n';
  char buf[32];
  for (std::size_t g = 0; g < d.genes(); ++g) {
    out << d.gene_ids[g];
    for (std::size_t j = 0; j < d.samples(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, d.values(g, j));  // shortest round-trip form
      out << '\t' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

LabelSpec label_spec(const stat::StudyDataset& d) {
  LabelSpec spec;
  for (std::size_t j = 0; j < d.sample_ids.size(); ++j)
    (d.labels.at(j) ? spec.cases : spec.control).push_back(d.sample_ids[j]);
  return spec;
}

void align_studies(std::span<stat::StudyDataset> studies) {
  if (studies.empty()) return;
  const auto& ref = studies[0];
  std::unordered_map<std::string, std::size_t> ref_pos;
  for (std::size_t g = 0; g < ref.gene_ids.size(); ++g) ref_pos.emplace(ref.gene_ids[g], g);

  for (std::size_t k = 1; k < studies.size(); ++k) {
    auto& d = studies[k];
    const std::set<std::string> mine(d.gene_ids.begin(), d.gene_ids.end());
    std::vector<std::string> only_ref, only_mine;
    for (const auto& g : ref.gene_ids)
      if (!mine.count(g)) only_ref.push_back(g);
    for (const auto& g : d.gene_ids)
      if (!ref_pos.count(g)) only_mine.push_back(g);
    if (!only_ref.empty() || !only_mine.empty()) {
      std::string msg = "gene sets differ between studies '" + ref.study_id + "' and '" + d.study_id + "'";
      if (!only_ref.empty()) msg += "; only in '" + ref.study_id + "': " + list_names(only_ref);
      if (!only_mine.empty()) msg += "; only in '" + d.study_id + "': " + list_names(only_mine);
      throw DataError(msg);
    }
    Matrix<double> values(d.genes(), d.samples());
    for (std::size_t g = 0; g < d.genes(); ++g) {
      const std::size_t dst = ref_pos.at(d.gene_ids[g]);
      for (std::size_t j = 0; j < d.samples(); ++j) values(dst, j) = d.values(g, j);
    }
    d.values = std::move(values);
    d.gene_ids = ref.gene_ids;
  }
}

std::string format_number(double v, bool full_precision) {
  char buf[40];
  if (full_precision) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace awmeta::io
