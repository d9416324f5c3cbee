#include "awmeta/simharness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "awmeta/rng.hpp"

namespace awmeta::sim {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461;  // "data"
constexpr std::uint64_t kPermStream = 0x7065726d;  // "perm"

}  // namespace

void SimScenario::validate() const {
  if (studies < 2) throw InvalidInput("scenario: need at least two studies");
  if (n_control < 2 || n_case < 2) throw InvalidInput("scenario: need at least two samples per group");
  if (genes() < 2) throw InvalidInput("scenario: need at least two genes");
  if (!std::isfinite(theta)) throw InvalidInput("scenario: theta must be finite");
  if (reps == 0) throw InvalidInput("scenario: reps must be positive");
  if (permutations == 0) throw InvalidInput("scenario: permutations must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("scenario: alpha must lie in (0, 1)");
  if (methods.empty()) throw InvalidInput("scenario: no methods selected");
}

Category category(const SimScenario& s, std::size_t gene) {
  if (gene < s.g1) return Category::I;
  if (gene < s.g1 + s.g2) return Category::II;
  return Category::Null;
}

double effect(const SimScenario& s, std::size_t gene, unsigned study) {
  switch (category(s, gene)) {
    case Category::I:
      return s.sign_flip && study == 0 && gene % 2 == 1 ? -s.theta : s.theta;
    case Category::II:
      return study + 1 == s.studies ? s.theta : 0.0;
    case Category::Null:
      break;
  }
  return 0.0;
}

std::vector<stat::StudyDataset> generate_scenario(const SimScenario& s, std::size_t rep) {
  s.validate();
  const std::size_t genes = s.genes();
  const std::size_t samples = s.n_control + s.n_case;
  std::vector<stat::StudyDataset> out(s.studies);
  for (unsigned k = 0; k < s.studies; ++k) {
    stat::StudyDataset& d = out[k];
    d.study_id = "S" + std::to_string(k + 1);
    d.labels.assign(samples, 0);
    std::fill(d.labels.begin() + static_cast<std::ptrdiff_t>(s.n_control), d.labels.end(), 1);
    d.values = Matrix<double>(genes, samples);
    rng::Xoshiro256 gen(rng::stream_key(rng::stream_key(s.seed, kDataStream, rep), k));
    for (std::size_t g = 0; g < genes; ++g) {
      const double shift = effect(s, g, k);
      for (std::size_t j = 0; j < samples; ++j) d.values(g, j) = gen.normal() + (d.labels[j] ? shift : 0.0);
    }
  }
  return out;
}

std::vector<RepCounts> run_rep(const SimScenario& s, std::size_t rep) {
  const auto studies = generate_scenario(s, rep);
  AnalysisOptions opt;
  opt.permutations = s.permutations;
  opt.seed = rng::stream_key(s.seed, kPermStream, rep);
  opt.alpha = s.alpha;
  opt.sided = s.sided;
  opt.concordance_filter = s.concordance_filter;
  const auto null = stat::build_permutation_null(studies, stat::NullOptions{opt.permutations, opt.seed, opt.sided});

  std::vector<RepCounts> out;
  for (combine::Method m : s.methods) {
    const MethodResult r = assess(combine::score(m, null, opt.max_studies), null, opt);
    RepCounts c;
    for (std::size_t g : r.detected) {
      switch (category(s, g)) {
        case Category::I: ++c.cat1; break;
        case Category::II: ++c.cat2; break;
        case Category::Null: ++c.null; break;
      }
    }
    out.push_back(c);
  }
  return out;
}

const MethodSummary& SimReport::at(combine::Method m) const {
  for (const auto& s : methods)
    if (s.method == m) return s;
  throw InvalidInput("report has no entry for method " + std::string(combine::method_name(m)));
}

SimReport run_scenario(const SimScenario& s) {
  s.validate();
  std::vector<std::vector<RepCounts>> reps(s.reps);

  unsigned threads = s.threads ? s.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, s.reps));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < s.reps;) {
      try {
        reps[r] = run_rep(s, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = s.reps;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SimReport report;
  report.scenario = s;
  const double n = static_cast<double>(s.reps);
  for (std::size_t mi = 0; mi < s.methods.size(); ++mi) {
    MethodSummary sum;
    sum.method = s.methods[mi];
    for (const auto& rep : reps) {
      const RepCounts& c = rep[mi];
      sum.per_rep.push_back(c);
      sum.mean_cat1 += static_cast<double>(c.cat1);
      sum.mean_cat2 += static_cast<double>(c.cat2);
      sum.mean_null += static_cast<double>(c.null);
      sum.mean_fdr += c.fdr();
    }
    sum.mean_cat1 /= n;
    sum.mean_cat2 /= n;
    sum.mean_null /= n;
    sum.mean_fdr /= n;
    if (s.reps > 1) {
      double ss = 0.0;
      for (const auto& c : sum.per_rep) ss += (c.fdr() - sum.mean_fdr) * (c.fdr() - sum.mean_fdr);
      sum.se_fdr = std::sqrt(ss / (n - 1.0) / n);
    }
    report.methods.push_back(std::move(sum));
  }
  return report;
}

std::string format_report(const SimReport& report) {
  std::string out = "method\tI\tII\tNull\tFDR\tFDR_se\n";
  char buf[160];
  for (const auto& m : report.methods) {
    std::snprintf(buf, sizeof buf, "%s\t%.1f\t%.1f\t%.1f\t%.4f\t%.4f\n", std::string(combine::method_name(m.method)).c_str(),
                  m.mean_cat1, m.mean_cat2, m.mean_null, m.mean_fdr, m.se_fdr);
    out += buf;
  }
  return out;
}

SimScenario scenario_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("scenario config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("scenario config: expected a JSON object");
  static const char* const known[] = {"studies", "n_control", "n_case", "g1", "g2", "nulls", "theta", "reps",
                                      "permutations", "seed", "alpha", "one_sided", "methods", "sign_flip",
                                      "concordance_filter", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
      throw InvalidInput("scenario config: unknown key '" + key + "'");
  }
  SimScenario s;
  try {
    s.studies = j.value("studies", s.studies);
    s.n_control = j.value("n_control", s.n_control);
    s.n_case = j.value("n_case", s.n_case);
    s.g1 = j.value("g1", s.g1);
    s.g2 = j.value("g2", s.g2);
    s.nulls = j.value("nulls", s.nulls);
    s.theta = j.value("theta", s.theta);
    s.reps = j.value("reps", s.reps);
    s.permutations = j.value("permutations", s.permutations);
    s.seed = j.value("seed", s.seed);
    s.alpha = j.value("alpha", s.alpha);
    s.sided = j.value("one_sided", false) ? Sidedness::OneSided : Sidedness::TwoSided;
    s.sign_flip = j.value("sign_flip", s.sign_flip);
    s.concordance_filter = j.value("concordance_filter", s.concordance_filter);
    s.threads = j.value("threads", s.threads);
    if (j.contains("methods")) {
      s.methods.clear();
      for (const auto& m : j.at("methods")) {
        const auto name = m.get<std::string>();
        if (name == "all") {
          s.methods.assign(std::begin(combine::kAllMethods), std::end(combine::kAllMethods));
        } else {
          s.methods.push_back(combine::parse_method(name));
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("scenario config: ") + e.what());
  }
  s.validate();
  return s;
}

std::string scenario_to_json(const SimScenario& s) {
  nlohmann::ordered_json j;
  j["studies"] = s.studies;
  j["n_control"] = s.n_control;
  j["n_case"] = s.n_case;
  j["g1"] = s.g1;
  j["g2"] = s.g2;
  j["nulls"] = s.nulls;
  j["theta"] = s.theta;
  j["reps"] = s.reps;
  j["permutations"] = s.permutations;
  j["seed"] = s.seed;
  j["alpha"] = s.alpha;
  j["one_sided"] = s.sided == Sidedness::OneSided;
  auto& methods = j["methods"] = nlohmann::ordered_json::array();
  for (auto m : s.methods) methods.push_back(std::string(combine::method_name(m)));
  j["sign_flip"] = s.sign_flip;
  j["concordance_filter"] = s.concordance_filter;
  j["threads"] = s.threads;
  return j.dump(2) + "\n";
}

}  // namespace awmeta::sim
