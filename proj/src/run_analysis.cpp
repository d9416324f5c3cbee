#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "awmeta/io.hpp"

namespace awmeta::io {

namespace {

using combine::Method;

std::string join(const std::vector<std::string>& v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : "") + v[i];
  return out;
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string("config: '") + what + "' must be an array of sample names");
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(v.get<std::string>());
  return out;
}

// Heat-map order: more contributing studies first, then bitstrings descending.
bool category_before(const WeightVector& a, const WeightVector& b) {
  if (a.count() != b.count()) return a.count() > b.count();
  return a.bitstring() > b.bitstring();
}

}  // namespace

std::vector<Method> parse_methods(const std::string& name) {
  if (name == "all") return {std::begin(combine::kAllMethods), std::end(combine::kAllMethods)};
  return {combine::parse_method(name)};
}

void AnalysisConfig::validate() const {
  if (studies.size() < 2) throw InvalidInput("config: meta-analysis needs at least two studies");
  std::set<std::string> ids;
  for (const auto& s : studies) {
    if (s.id.empty()) throw InvalidInput("config: every study needs a non-empty id");
    if (!ids.insert(s.id).second) throw InvalidInput("config: duplicate study id '" + s.id + "'");
    if (s.path.empty()) throw InvalidInput("config: study '" + s.id + "' has no path");
    if (s.labels.control.empty() || s.labels.cases.empty())
      throw InvalidInput("config: study '" + s.id + "' needs control and case sample lists");
  }
  if (methods.empty()) throw InvalidInput("config: no method selected");
  std::set<Method> seen;
  for (Method m : methods)
    if (!seen.insert(m).second) throw InvalidInput("config: method listed twice: " + std::string(combine::method_name(m)));
  if (permutations == 0) throw InvalidInput("config: permutations must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("config: alpha must lie in (0, 1)");
  if (max_studies == 0 || max_studies > WeightVector::kRepresentableStudies)
    throw InvalidInput("config: max_studies must lie in [1, " + std::to_string(WeightVector::kRepresentableStudies) + "]");
  if (seen.count(Method::AW) && studies.size() > max_studies)
    throw InvalidInput("config: AW over " + std::to_string(studies.size()) + " studies exceeds max_studies = " +
                       std::to_string(max_studies));
  if (out.empty()) throw InvalidInput("config: output directory is empty");
}

AnalysisOptions AnalysisConfig::options() const {
  AnalysisOptions o;
  o.permutations = permutations;
  o.seed = seed;
  o.sided = sided;
  o.alpha = alpha;
  o.concordance_filter = concordance_filter;
  o.max_studies = max_studies;
  return o;
}

AnalysisConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  AnalysisConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw InvalidInput("config: expected a JSON object");
    static const std::set<std::string> known{"studies", "method", "permutations", "alpha", "seed", "one_sided",
                                             "concordance_filter", "max_studies", "out", "full_precision"};
    for (const auto& [key, value] : j.items())
      if (!known.count(key)) throw InvalidInput("config: unknown key '" + key + "'");
    for (const auto& s : j.at("studies")) {
      StudySpec spec;
      spec.id = s.at("id").get<std::string>();
      spec.path = s.at("path").get<std::string>();
      if (spec.path.is_relative() && !base_dir.empty()) spec.path = base_dir / spec.path;
      spec.labels.control = string_list(s.at("control"), "control");
      spec.labels.cases = string_list(s.at("case"), "case");
      c.studies.push_back(std::move(spec));
    }
    if (j.contains("method")) {
      const auto& m = j.at("method");
      if (m.is_string()) {
        c.methods = parse_methods(m.get<std::string>());
      } else {
        c.methods.clear();
        for (const auto& name : m) {
          for (Method x : parse_methods(name.get<std::string>())) c.methods.push_back(x);
        }
      }
    }
    c.permutations = j.value("permutations", c.permutations);
    c.alpha = j.value("alpha", c.alpha);
    c.seed = j.value("seed", c.seed);
    c.sided = j.value("one_sided", false) ? Sidedness::OneSided : Sidedness::TwoSided;
    c.concordance_filter = j.value("concordance_filter", c.concordance_filter);
    c.max_studies = j.value("max_studies", c.max_studies);
    if (j.contains("out")) {
      c.out = j.at("out").get<std::string>();
      if (c.out.is_relative() && !base_dir.empty()) c.out = base_dir / c.out;
    }
    c.full_precision = j.value("full_precision", c.full_precision);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return c;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), path.parent_path());
}

OutputFiles render_outputs(const AnalysisConfig& config, std::span<const stat::StudyDataset> studies,
                           const AnalysisResult& result) {
  const bool full = config.full_precision;
  auto num = [&](double v) { return format_number(v, full); };
  const auto& null = result.null;
  const std::vector<std::string>& genes = studies.front().gene_ids;
  OutputFiles out;

  std::string study_cols;
  for (const auto& id : null.study_ids) study_cols += "\tt_" + id;
  for (const auto& id : null.study_ids) study_cols += "\tp_" + id;
  auto study_values = [&](std::size_t g) {
    std::string s;
    for (std::size_t k = 0; k < null.studies; ++k) s += "\t" + num(null.observed_t(g, k));
    for (std::size_t k = 0; k < null.studies; ++k) s += "\t" + num(null.observed_p(g, k));
    return s;
  };

  for (const MethodResult& mr : result.methods) {
    const std::string name(combine::method_name(mr.method));
    std::string t = "gene" + study_cols + "\tstatistic\tmeta_p\tq\tdetected\tweight\tconcordance\n";
    for (const GeneMetaResult& r : mr.genes) {
      t += genes[r.gene] + study_values(r.gene) + "\t" + num(r.statistic) + "\t" + num(r.meta_p) + "\t" + num(r.q) +
           "\t" + (r.detected ? "1" : "0") + "\t" + (r.weight ? r.weight->bitstring() : "NA") + "\t" +
           std::string(inference::concordance_name(r.concordance)) + "\n";
    }
    out.files.emplace_back("genes_" + name + ".tsv", std::move(t));

    if (mr.method != Method::AW) continue;

    // Weight categories over genes passing the q threshold.
    std::vector<std::size_t> passing;
    for (const auto& r : mr.genes)
      if (r.q <= config.alpha) passing.push_back(r.gene);
    std::vector<WeightVector> cats;
    for (std::size_t g : passing)
      if (std::find(cats.begin(), cats.end(), *mr.genes[g].weight) == cats.end()) cats.push_back(*mr.genes[g].weight);
    std::sort(cats.begin(), cats.end(), category_before);
    std::string w = "weight\tstudies\tgenes\tconcordant\tdiscordant\n";
    for (const WeightVector& c : cats) {
      std::size_t n = 0, conc = 0;
      for (std::size_t g : passing) {
        if (!(*mr.genes[g].weight == c)) continue;
        ++n;
        conc += mr.genes[g].concordance == inference::Concordance::Concordant;
      }
      w += c.bitstring() + "\t" + std::to_string(c.count()) + "\t" + std::to_string(n) + "\t" + std::to_string(conc) +
           "\t" + std::to_string(n - conc) + "\n";
    }
    out.files.emplace_back("weight_categories.tsv", std::move(w));

    // Detected genes grouped by weight category, most significant first.
    std::vector<std::size_t> det = mr.detected;
    std::stable_sort(det.begin(), det.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = mr.genes[a];
      const auto& rb = mr.genes[b];
      if (!(*ra.weight == *rb.weight)) return category_before(*ra.weight, *rb.weight);
      if (ra.meta_p != rb.meta_p) return ra.meta_p < rb.meta_p;
      return a < b;
    });
    std::string d = "gene\tweight\tconcordance\tstatistic\tmeta_p\tq";
    for (const auto& id : null.study_ids) d += "\tt_" + id;
    d += "\n";
    for (std::size_t g : det) {
      const auto& r = mr.genes[g];
      d += genes[g] + "\t" + r.weight->bitstring() + "\t" + std::string(inference::concordance_name(r.concordance)) +
           "\t" + num(r.statistic) + "\t" + num(r.meta_p) + "\t" + num(r.q);
      for (std::size_t k = 0; k < null.studies; ++k) d += "\t" + num(null.observed_t(g, k));
      d += "\n";
    }
    out.files.emplace_back("aw_detected.tsv", std::move(d));
  }

  // Everything needed to regenerate the run; numbers at full precision.
  auto exact = [](double v) { return format_number(v, true); };
  std::string m = "key\tvalue\n";
  auto kv = [&](const std::string& k, const std::string& v) { m += k + "\t" + v + "\n"; };
  kv("software", "awmeta");
  kv("version", AWMETA_VERSION);
  kv("seed", std::to_string(config.seed));
  kv("permutations", std::to_string(config.permutations));
  kv("alpha", exact(config.alpha));
  kv("sidedness", config.sided == Sidedness::OneSided ? "one-sided" : "two-sided");
  std::vector<std::string> names;
  for (Method x : config.methods) names.emplace_back(combine::method_name(x));
  kv("methods", join(names));
  kv("max_studies", std::to_string(config.max_studies));
  kv("concordance_filter", config.concordance_filter ? "1" : "0");
  kv("full_precision", config.full_precision ? "1" : "0");
  kv("rng", "xoshiro256** seeded by splitmix64; permutation b of study k keyed by (seed, fnv1a64(study id), b)");
  kv("pi0_window", exact(config.options().pi0_lower) + "," + exact(config.options().pi0_upper));
  kv("genes", std::to_string(null.genes));
  kv("studies", std::to_string(null.studies));
  for (std::size_t k = 0; k < config.studies.size(); ++k) {
    const auto& s = config.studies[k];
    const std::string p = "study." + std::to_string(k + 1) + ".";
    kv(p + "id", s.id);
    kv(p + "path", s.path.string());
    kv(p + "control", join(s.labels.control));
    kv(p + "case", join(s.labels.cases));
    kv(p + "s0", exact(null.s0[k]));
  }
  for (const MethodResult& mr : result.methods) {
    const std::string p = "method." + std::string(combine::method_name(mr.method)) + ".";
    kv(p + "pi0", exact(mr.pi0.pi0));
    kv(p + "detected", std::to_string(mr.detected.size()));
  }
  out.files.emplace_back("manifest.tsv", std::move(m));
  return out;
}

RunSummary run_analysis(const AnalysisConfig& config) {
  config.validate();
  std::vector<stat::StudyDataset> studies;
  for (const auto& s : config.studies) studies.push_back(ingest(s.path, s.labels, s.id));
  align_studies(studies);
  const AnalysisResult result = analyze(studies, config.methods, config.options());
  const OutputFiles files = render_outputs(config, studies, result);

  RunSummary summary;
  std::filesystem::create_directories(config.out);
  for (const auto& [name, content] : files.files) {
    const auto path = config.out / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw DataError("failed writing " + path.string());
    summary.written.push_back(path);
  }
  for (const auto& mr : result.methods) summary.detected.emplace_back(mr.method, mr.detected.size());
  return summary;
}

}  // namespace awmeta::io
