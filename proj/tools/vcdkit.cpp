// Copyright 2026-present the vcdkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// vcdkit: batch front end for simulation, search, localization, evaluation
// and submission checks.
//
// Exit codes: 0 ok, 1 I/O or file format, 2 config or usage, 3 validation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vcd/baseline.hpp"
#include "vcd/errors.hpp"
#include "vcd/io.hpp"

namespace fs = std::filesystem;
using namespace vcd;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;

// Raised for bad flag combinations detected after parsing.
struct UsageError : Error {
  using Error::Error;
};

struct Options {
  unsigned threads = 1;

  struct {
    std::string config, out;
  } simulate;

  struct Descriptors {
    std::string queries, refs;
    std::string normalize = "none";
    std::string score_norm;
    std::size_t k_sn = 1;
    double beta = 1.2;
  };

  struct : Descriptors {
    std::size_t k = 20000;
    std::string out;
  } search;

  struct : Descriptors {
    std::string candidates, from_search, out;
    std::size_t max_candidates = 0;
    double threshold = 0.0, max_gap = 10.0;
    std::optional<double> offset;
    std::size_t min_length = 3, max_paths = 5;
  } localize;

  struct {
    std::string task = "detection", preds, gt, subset, tags, curve;
  } evaluate;

  struct {
    std::string descriptors, durations;
  } validate;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void add_descriptor_flags(CLI::App* cmd, Options::Descriptors& d) {
  cmd->add_option("--queries", d.queries, "Query descriptor file")->required();
  cmd->add_option("--refs", d.refs, "Reference descriptor file")->required();
  cmd->add_option("--normalize", d.normalize, "Row normalization")->check(CLI::IsMember({"none", "l2"}));
  cmd->add_option("--score-norm", d.score_norm, "Training descriptor file, or a simulate output directory");
  cmd->add_option("--k-sn", d.k_sn, "Background neighbour rank for score normalization");
  cmd->add_option("--beta", d.beta, "Score normalization weight");
}

SearchConfig search_config(const Options::Descriptors& d, unsigned threads) {
  SearchConfig cfg;
  cfg.normalization = d.normalize == "l2" ? RowNormalization::L2 : RowNormalization::None;
  if (!d.score_norm.empty()) cfg.score_normalization = ScoreNormalizationParams{d.k_sn, d.beta};
  cfg.threads = threads;
  return cfg;
}

PreparedDescriptors load_prepared(const Options::Descriptors& d, const SearchConfig& cfg) {
  const auto queries = read_descriptors(d.queries);
  const auto refs = read_descriptors(d.refs);
  std::vector<DescriptorSet> training;
  if (cfg.score_normalization) {
    fs::path path = d.score_norm;
    if (fs::is_directory(path)) path /= instance_files::kTraining;
    training = read_descriptors(path);
  }
  return prepare_descriptors(queries, refs, training, cfg);
}

int run_simulate(const Options& o) {
  SimConfig cfg;
  try {
    cfg = parse_sim_config(read_text(o.simulate.config));
    cfg.validate();
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  BenchmarkInstance instance;
  try {
    instance = generate(cfg);
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  write_instance(o.simulate.out, instance);
  const auto s = summarize(instance);
  std::cout << "queries,references,copied_segments,queries_with_copies,distractor_queries,hard_negative_pairs\n"
            << s.queries << ',' << s.references << ',' << s.copied_segments << ',' << s.queries_with_copies << ','
            << s.distractor_queries << ',' << s.hard_negative_pairs << '\n';
  return 0;
}

int run_search_cmd(const Options& o) {
  auto cfg = search_config(o.search, o.threads);
  cfg.k = o.search.k;
  const auto prepared = load_prepared(o.search, cfg);
  if (prepared.zero_rows > 0) std::cerr << "warning: " << prepared.zero_rows << " zero rows left unnormalized\n";
  const auto result = run_search(prepared, cfg);
  const fs::path out = o.search.out;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  write_matches(out / "matches.csv", result.matches);
  write_detection_predictions(out / "detections.csv", result.detections);
  std::cerr << result.matches.size() << " frame matches, " << result.detections.size() << " video pairs\n";
  return 0;
}

int run_localize(const Options& o) {
  const auto& l = o.localize;
  if (l.candidates.empty() == l.from_search.empty()) {
    throw UsageError("exactly one of --candidates and --from-search is required");
  }
  auto cfg = search_config(l, o.threads);
  TNConfig tn = cfg.score_normalization ? TNConfig::score_normalized() : TNConfig{};
  tn.similarity_threshold = l.threshold;
  if (l.offset) tn.offset = *l.offset;
  tn.max_time_gap = l.max_gap;
  tn.min_path_length = l.min_length;
  tn.max_paths_per_pair = l.max_paths;
  tn.validate();

  std::vector<VideoPair> candidates;
  if (!l.candidates.empty()) {
    candidates = read_pairs(l.candidates);
    if (l.max_candidates > 0 && candidates.size() > l.max_candidates) {
      candidates.erase(candidates.begin() + static_cast<long>(l.max_candidates), candidates.end());
    }
  } else {
    const auto ranked = rank_detections(read_detection_predictions(fs::path(l.from_search) / "detections.csv"));
    candidates = candidate_pairs(ranked, l.max_candidates);
  }
  const auto prepared = load_prepared(l, cfg);
  const auto preds = localize_candidates(candidates, prepared.queries, prepared.references, tn, o.threads);
  write_localization_predictions(l.out, preds);
  std::cerr << preds.size() << " segments from " << candidates.size() << " candidate pairs\n";
  return 0;
}

// Comma-separated tag terms that must all hold; a leading `!` negates one.
QueryFilter parse_subset(const std::string& expr) {
  std::vector<std::pair<std::string, bool>> terms;
  std::stringstream ss(expr);
  std::string term;
  while (std::getline(ss, term, ',')) {
    const bool negated = !term.empty() && term.front() == '!';
    if (negated) term.erase(0, 1);
    if (term.empty()) throw UsageError("empty term in subset expression '" + expr + "'");
    terms.emplace_back(term, negated);
  }
  if (terms.empty()) throw UsageError("empty subset expression");
  return [terms](const VideoId&, const TransformTag& tag) {
    for (const auto& [name, negated] : terms) {
      if (tag.tags.contains(name) == negated) return false;
    }
    return true;
  };
}

int run_evaluate(const Options& o) {
  const auto& e = o.evaluate;
  const auto gt = read_ground_truth(e.gt);
  const bool subset = !e.subset.empty();
  if (subset && e.tags.empty()) throw UsageError("--subset needs --tags");
  std::vector<TransformTag> tags;
  if (subset) tags = read_tags(e.tags);

  double value = 0.0;
  PRCurve curve;
  if (e.task == "localization") {
    const auto preds = read_localization_predictions(e.preds);
    curve = subset ? evaluate_subset(preds, gt, tags, parse_subset(e.subset)).curve : localization_uap(preds, gt);
    value = curve.uap;
  } else {
    const auto preds = read_detection_predictions(e.preds);
    if (subset) {
      auto r = evaluate_subset(preds, gt, tags, parse_subset(e.subset));
      std::cerr << r.matched_queries << " matched queries, " << r.distractor_queries << " distractor queries\n";
      curve = std::move(r.curve);
      value = e.task == "map" ? *r.mean_ap : curve.uap;
    } else {
      curve = detection_uap(preds, gt);
      value = e.task == "map" ? mean_ap(preds, gt) : curve.uap;
    }
  }
  if (!e.curve.empty()) write_pr_curve(e.curve, curve);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::cout << buf << '\n';
  return 0;
}

int run_validate(const Options& o) {
  const auto sets = read_descriptors(o.validate.descriptors);
  const auto durations = read_durations(o.validate.durations);
  const auto report = validate_descriptor_budget(sets, durations);
  std::cout << "videos " << sets.size() << "\n"
            << "max_dim " << report.max_dim << "\n"
            << "descriptors " << report.total_descriptors << "\n"
            << "seconds " << format_number(report.total_seconds) << "\n";
  for (const auto& v : report.over_rate_videos) std::cout << "note: " << v.str() << " exceeds 1 descriptor/s\n";
  for (const auto& v : report.violations) std::cout << "violation: " << v << "\n";
  std::cout << (report.passed ? "PASS" : "FAIL") << '\n';
  return report.passed ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Video copy detection toolkit"};
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "Worker threads for search and localization")
      ->check(CLI::Range(1u, 1024u));
  app.set_version_flag("--version", std::string("vcdkit ") + VCDKIT_VERSION + " (descriptor format " +
                                        std::to_string(kDescriptorFormatVersion) + ")");

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic benchmark instance");
  sim->add_option("--config", o.simulate.config, "key = value config file")->required();
  sim->add_option("--out", o.simulate.out, "Output directory")->required();

  auto* search = app.add_subcommand("search", "Global top-k frame matching and pair scores");
  add_descriptor_flags(search, o.search);
  search->add_option("--k", o.search.k, "Frame pairs retrieved across all queries")->check(CLI::PositiveNumber);
  search->add_option("--out", o.search.out, "Output directory for matches.csv and detections.csv")->required();

  auto* loc = app.add_subcommand("localize", "Temporal localization of candidate pairs");
  add_descriptor_flags(loc, o.localize);
  loc->add_option("--candidates", o.localize.candidates, "CSV of query_id,ref_id pairs");
  loc->add_option("--from-search", o.localize.from_search, "Directory written by `search`");
  loc->add_option("--max-candidates", o.localize.max_candidates, "Keep only the best N pairs (0 keeps all)");
  loc->add_option("--threshold", o.localize.threshold, "Node threshold on similarity + offset");
  loc->add_option("--offset", o.localize.offset, "Similarity offset (0.5 with --score-norm, else 0)");
  loc->add_option("--max-gap", o.localize.max_gap, "Largest step between path nodes, in seconds");
  loc->add_option("--min-length", o.localize.min_length, "Shortest path kept, in nodes");
  loc->add_option("--max-paths", o.localize.max_paths, "Path extraction rounds per pair");
  loc->add_option("--out", o.localize.out, "Localization predictions CSV")->required();

  auto* eval = app.add_subcommand("evaluate", "Score predictions against ground truth");
  eval->add_option("--task", o.evaluate.task)->check(CLI::IsMember({"detection", "localization", "map"}));
  eval->add_option("--preds", o.evaluate.preds, "Predictions CSV")->required();
  eval->add_option("--gt", o.evaluate.gt, "Ground truth CSV")->required();
  eval->add_option("--subset", o.evaluate.subset, "Tag filter, e.g. speed_2,!multi_segment");
  eval->add_option("--tags", o.evaluate.tags, "Tags CSV used by --subset");
  eval->add_option("--curve", o.evaluate.curve, "Write the PR curve to this CSV");

  auto* val = app.add_subcommand("validate-submission", "Check descriptor dimension and rate limits");
  val->add_option("--descriptors", o.validate.descriptors, "Descriptor file to check")->required();
  val->add_option("--durations", o.validate.durations, "CSV of video_id,duration in seconds")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return run_simulate(o);
    if (*search) return run_search_cmd(o);
    if (*loc) return run_localize(o);
    if (*eval) return run_evaluate(o);
    return run_validate(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  }
}
