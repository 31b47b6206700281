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

#include "vcd/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <map>
#include <optional>
#include <random>

#include "vcd/errors.hpp"
#include "vcd/io.hpp"

namespace vcd {

namespace {

constexpr long kFirstId = 100000;

// Stand-in labels for the visual edits that the per-frame noise models.
constexpr std::string_view kVisualTransforms[] = {
    "brightness", "color_jitter", "grayscale", "emoji_overlay", "text_overlay", "frame_effect",
    "stack",      "blur",         "noise",     "pixelize",      "encoding",     "blend",
    "crop",       "padding",      "rotate",    "flip",          "aspect_ratio", "rescale",
};

bool whole(double v) { return std::isfinite(v) && v == std::floor(v); }

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
  bool coin(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  Eigen::VectorXd gaussian(long dim, double sigma = 1.0) {
    std::normal_distribution<double> n(0.0, sigma);
    Eigen::VectorXd v(dim);
    for (long i = 0; i < dim; ++i) v(i) = n(rng_);
    return v;
  }

  Eigen::VectorXd unit(long dim) {
    while (true) {
      Eigen::VectorXd v = gaussian(dim);
      const double norm = v.norm();
      if (norm > 0.0) return v / norm;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), rng_);
  }

 private:
  std::mt19937_64 rng_;
};

struct Video {
  VideoId id;
  DescriptorMatrix frames;

  DescriptorSet finish() const {
    std::vector<double> times(static_cast<std::size_t>(frames.rows()));
    for (std::size_t t = 0; t < times.size(); ++t) times[t] = static_cast<double>(t);
    return {id, std::move(times), frames};
  }
};

VideoId make_id(VideoKind kind, std::size_t index) {
  return {kind, std::string(1, kind_prefix(kind)) + std::to_string(kFirstId + static_cast<long>(index))};
}

// Draws filler frames. A fraction of them are low-content frames clustered
// around one instance-wide direction, so they resemble each other across
// unrelated videos.
class FrameSource {
 public:
  FrameSource(const SimConfig& cfg, Sampler& rng)
      : dim_(cfg.dim), p_low_content_(cfg.p_low_content), rng_(rng), low_content_dir_(rng.unit(cfg.dim)) {}

  Eigen::VectorXd frame() {
    if (p_low_content_ > 0.0 && rng_.coin(p_low_content_)) {
      const Eigen::VectorXd mix = std::sqrt(kLowContentWeight) * low_content_dir_ +
                                  std::sqrt(1.0 - kLowContentWeight) * rng_.unit(dim_);
      return mix / mix.norm();
    }
    return rng_.unit(dim_);
  }

  Video video(VideoId id, long frames) {
    Video v{std::move(id), DescriptorMatrix(frames, dim_)};
    for (long t = 0; t < frames; ++t) v.frames.row(t) = frame().cast<float>().transpose();
    return v;
  }

 private:
  static constexpr double kLowContentWeight = 0.9;
  long dim_;
  double p_low_content_;
  Sampler& rng_;
  Eigen::VectorXd low_content_dir_;
};

// Frames that all sit near a shared latent direction; two such videos built
// from the same latent have inner products close to `correlation`.
Video latent_video(Sampler& rng, VideoId id, long frames, long dim, const Eigen::VectorXd& latent,
                   double correlation) {
  Video v{std::move(id), DescriptorMatrix(frames, dim)};
  const double a = std::sqrt(correlation);
  const double b = std::sqrt(1.0 - correlation);
  for (long t = 0; t < frames; ++t) {
    const Eigen::VectorXd mix = a * latent + b * rng.unit(dim);
    v.frames.row(t) = (mix / mix.norm()).cast<float>().transpose();
  }
  return v;
}

// Reference-side piece of a copy: frames [start, start + length).
struct Piece {
  std::size_t ref;
  long start;
  long length;
};

// Random length in [lo, hi]; even when `even`. Empty when impossible.
std::optional<long> draw_length(Sampler& rng, long lo, long hi, bool even) {
  if (even) {
    const long lo2 = (lo + 1) / 2;
    const long hi2 = hi / 2;
    if (lo2 > hi2 || lo2 < 1) return std::nullopt;
    return 2 * rng.integer(lo2, hi2);
  }
  if (lo > hi) return std::nullopt;
  return rng.integer(lo, hi);
}

class CopyBuilder {
 public:
  CopyBuilder(const SimConfig& cfg, Sampler& rng, FrameSource& filler, const std::vector<Video>& refs)
      : cfg_(cfg), rng_(rng), filler_(filler), refs_(refs) {}

  Video build(const VideoId& id, std::vector<GroundTruthBox>& boxes, std::vector<TransformTag>& tags) {
    const long min_seg = static_cast<long>(cfg_.min_segment);
    const long max_seg = static_cast<long>(cfg_.max_segment);
    std::set<std::string> applied;

    double factor = 1.0;
    if (rng_.coin(cfg_.p_speed_change)) factor = rng_.coin(0.5) ? 0.5 : 2.0;
    bool decimate = rng_.coin(cfg_.p_time_decimate);
    bool multi_segment = rng_.coin(cfg_.p_multi_segment);
    const bool multi_reference = rng_.coin(cfg_.p_multi_reference);

    auto min_len = [&](bool even) { return even ? 2 * ((min_seg + 1) / 2) : min_seg; };
    auto eligible = [&](long needed, std::optional<std::size_t> exclude) {
      std::vector<std::size_t> out;
      for (std::size_t r = 0; r < refs_.size(); ++r) {
        if (exclude && *exclude == r) continue;
        if (refs_[r].frames.rows() >= needed) out.push_back(r);
      }
      return out;
    };
    auto pick = [&](const std::vector<std::size_t>& from) {
      return from[static_cast<std::size_t>(rng_.integer(0, static_cast<long>(from.size()) - 1))];
    };

    bool even = factor == 2.0;
    if (even && eligible(min_len(true), std::nullopt).empty()) {
      factor = 1.0;
      even = false;
    }
    if (multi_segment && eligible(2 * min_len(even), std::nullopt).empty()) multi_segment = false;

    const std::size_t primary = pick(eligible(multi_segment ? 2 * min_len(even) : min_len(even), std::nullopt));
    const long ref_len = refs_[primary].frames.rows();

    std::vector<std::vector<Piece>> groups;
    if (multi_segment) {
      // The later query segment copies an earlier part of the reference, so
      // no monotone match path can join the two.
      const long first = *draw_length(rng_, min_seg, std::min(max_seg, ref_len - min_len(even)), even);
      const long second = *draw_length(rng_, min_seg, std::min(max_seg, ref_len - first), even);
      const long slack = ref_len - first - second;
      const long early = rng_.integer(0, slack);
      const long late = early + second + rng_.integer(0, slack - early);
      groups.push_back({{primary, late, first}});
      groups.push_back({{primary, early, second}});
      applied.insert("multi_segment");
    } else {
      const long len = *draw_length(rng_, min_seg, std::min(max_seg, ref_len), even);
      groups.push_back({{primary, rng_.integer(0, ref_len - len), len}});
    }

    if (decimate) {
      // Keep chunks 0, 2, 4, ... of the first copied segment.
      const Piece whole_piece = groups.front().front();
      const long chunk = even ? 2 * rng_.integer(1, 2) : rng_.integer(2, 4);
      std::vector<Piece> kept;
      for (long k = 0; (k + 1) * chunk <= whole_piece.length; k += 2) {
        kept.push_back({whole_piece.ref, whole_piece.start + k * chunk, chunk});
      }
      if (kept.size() >= 2) {
        groups.front() = std::move(kept);
        applied.insert("time_decimate");
      }
    }

    if (multi_reference) {
      const auto others = eligible(min_len(even), primary);
      if (!others.empty()) {
        const std::size_t other = pick(others);
        const long len_other = refs_[other].frames.rows();
        const long len = *draw_length(rng_, min_seg, std::min(max_seg, len_other), even);
        groups.push_back({{other, rng_.integer(0, len_other - len), len}});
        applied.insert("multi_reference");
      }
    }
    if (factor == 0.5) applied.insert("speed_0.5");
    if (factor == 2.0) applied.insert("speed_2");

    // Lay out the query timeline: filler, group, filler, group, ..., filler.
    const long max_filler = static_cast<long>(cfg_.max_filler);
    struct Placed {
      Piece piece;
      long query_start;
      long query_length;
    };
    std::vector<Placed> placed;
    long cursor = rng_.integer(0, max_filler);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (g > 0) cursor += rng_.integer(1, std::max(1L, max_filler));
      for (const auto& p : groups[g]) {
        const auto qlen = static_cast<long>(std::lround(static_cast<double>(p.length) / factor));
        placed.push_back({p, cursor, qlen});
        cursor += qlen;
      }
    }
    cursor += rng_.integer(0, max_filler);
    const long total = std::max(cursor, static_cast<long>(cfg_.min_duration));

    Video video = filler_.video(id, total);
    for (const auto& pl : placed) {
      const auto& src = refs_[pl.piece.ref];
      for (long tau = 0; tau < pl.query_length; ++tau) {
        const long frame = pl.piece.start + static_cast<long>(std::floor(static_cast<double>(tau) * factor));
        const auto row = src.frames.row(frame);
        if (cfg_.noise_sigma == 0.0) {
          video.frames.row(pl.query_start + tau) = row;
        } else {
          Eigen::VectorXd v = row.cast<double>().transpose() + rng_.gaussian(cfg_.dim, cfg_.noise_sigma);
          const double norm = v.norm();
          if (norm > 0.0) v /= norm;
          video.frames.row(pl.query_start + tau) = v.cast<float>().transpose();
        }
      }
      boxes.push_back({id, src.id,
                       SegmentBox(static_cast<double>(pl.query_start),
                                  static_cast<double>(pl.query_start + pl.query_length),
                                  static_cast<double>(pl.piece.start),
                                  static_cast<double>(pl.piece.start + pl.piece.length))});
    }

    if (cfg_.noise_sigma > 0.0) {
      std::vector<std::string_view> pool(std::begin(kVisualTransforms), std::end(kVisualTransforms));
      rng_.shuffle(pool);
      const long n = rng_.integer(1, 3);
      for (long k = 0; k < n; ++k) applied.emplace(pool[static_cast<std::size_t>(k)]);
    }
    tags.emplace_back(id, std::move(applied));
    return video;
  }

 private:
  const SimConfig& cfg_;
  Sampler& rng_;
  FrameSource& filler_;
  const std::vector<Video>& refs_;
};

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError("simulator config: " + field + " " + why);
  };
  if (dim < 2) fail("dim", "must be at least 2");
  if (!whole(min_duration) || !whole(max_duration) || min_duration < 1 || max_duration < min_duration) {
    fail("min_duration/max_duration", "must be whole seconds with 1 <= min_duration <= max_duration");
  }
  if (!whole(min_segment) || !whole(max_segment) || min_segment < 2 || max_segment < min_segment) {
    fail("min_segment/max_segment", "must be whole seconds with 2 <= min_segment <= max_segment");
  }
  if (!whole(max_filler) || max_filler < 0) fail("max_filler", "must be a non-negative whole number of seconds");
  if (!std::isfinite(noise_sigma) || noise_sigma < 0) fail("noise_sigma", "must be >= 0");
  const std::pair<const char*, double> probabilities[] = {{"p_low_content", p_low_content},
                                                          {"p_multi_segment", p_multi_segment},
                                                          {"p_multi_reference", p_multi_reference},
                                                          {"p_speed_change", p_speed_change},
                                                          {"p_time_decimate", p_time_decimate}};
  for (const auto& [name, p] : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) fail(name, "must lie in [0, 1]");
  }
  if (!(hard_negative_correlation >= 0.0 && hard_negative_correlation < 1.0)) {
    fail("hard_negative_correlation", "must lie in [0, 1)");
  }
  if (n_hard_negative_pairs > n_distractor_queries || n_hard_negative_pairs > n_references) {
    fail("n_hard_negative_pairs", "cannot exceed n_distractor_queries or n_references");
  }
  if (n_copied_queries > 0 && n_references == 0) fail("n_references", "must be positive when copies are requested");
}

SimConfig parse_sim_config(std::string_view text) {
  SimConfig cfg;
  bool have_seed = false;

  auto parse_number = [](std::string_view key, std::string_view value, auto& out) {
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
      throw ValidationError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "'");
    }
  };
  std::map<std::string, std::function<void(std::string_view, std::string_view)>, std::less<>> setters;
  auto bind = [&](const char* key, auto& field) {
    setters.emplace(key, [&parse_number, &field](std::string_view k, std::string_view v) { parse_number(k, v, field); });
  };
  bind("seed", cfg.seed);
  bind("dim", cfg.dim);
  bind("n_references", cfg.n_references);
  bind("n_distractor_queries", cfg.n_distractor_queries);
  bind("n_copied_queries", cfg.n_copied_queries);
  bind("n_training", cfg.n_training);
  bind("min_duration", cfg.min_duration);
  bind("max_duration", cfg.max_duration);
  bind("min_segment", cfg.min_segment);
  bind("max_segment", cfg.max_segment);
  bind("max_filler", cfg.max_filler);
  bind("noise_sigma", cfg.noise_sigma);
  bind("p_low_content", cfg.p_low_content);
  bind("p_multi_segment", cfg.p_multi_segment);
  bind("p_multi_reference", cfg.p_multi_reference);
  bind("p_speed_change", cfg.p_speed_change);
  bind("p_time_decimate", cfg.p_time_decimate);
  bind("n_hard_negative_pairs", cfg.n_hard_negative_pairs);
  bind("hard_negative_correlation", cfg.hard_negative_correlation);

  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };

  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ValidationError("config key '" + std::string(key) + "' is not recognised");
    it->second(key, value);
    if (key == "seed") have_seed = true;
  }
  if (!have_seed) throw ValidationError("config key 'seed' is required");
  cfg.validate();
  return cfg;
}

BenchmarkInstance generate(const SimConfig& cfg) {
  cfg.validate();
  Sampler rng(cfg.seed);
  FrameSource filler(cfg, rng);
  const long lo = static_cast<long>(cfg.min_duration);
  const long hi = static_cast<long>(cfg.max_duration);

  std::vector<Video> refs;
  refs.reserve(cfg.n_references);
  for (std::size_t r = 0; r < cfg.n_references; ++r) {
    refs.push_back(filler.video(make_id(VideoKind::Reference, r), rng.integer(lo, hi)));
  }
  if (cfg.n_copied_queries > 0) {
    long longest = 0;
    for (const auto& r : refs) longest = std::max<long>(longest, r.frames.rows());
    if (longest < static_cast<long>(cfg.min_segment)) {
      throw ValidationError("no reference is long enough to host a " + std::to_string(cfg.min_segment) +
                            " s copied segment");
    }
  }

  std::vector<Video> training;
  for (std::size_t t = 0; t < cfg.n_training; ++t) {
    training.push_back(filler.video(make_id(VideoKind::Training, t), rng.integer(lo, hi)));
  }

  // Query roles are shuffled so ids carry no information about copies.
  enum class Role { Copied, Distractor };
  std::vector<Role> roles(cfg.n_copied_queries, Role::Copied);
  roles.insert(roles.end(), cfg.n_distractor_queries, Role::Distractor);
  rng.shuffle(roles);

  // Hard negatives: distinct distractor queries paired with distinct references.
  std::vector<std::size_t> ref_order(refs.size());
  std::iota(ref_order.begin(), ref_order.end(), std::size_t{0});
  rng.shuffle(ref_order);
  std::map<std::size_t, std::pair<std::size_t, Eigen::VectorXd>> hard_negative_of_slot;
  {
    std::size_t assigned = 0;
    for (std::size_t slot = 0; slot < roles.size() && assigned < cfg.n_hard_negative_pairs; ++slot) {
      if (roles[slot] != Role::Distractor) continue;
      const std::size_t ref = ref_order[assigned++];
      Eigen::VectorXd latent = rng.unit(cfg.dim);
      refs[ref] = latent_video(rng, refs[ref].id, refs[ref].frames.rows(), cfg.dim, latent,
                               cfg.hard_negative_correlation);
      hard_negative_of_slot.emplace(slot, std::make_pair(ref, std::move(latent)));
    }
  }

  BenchmarkInstance out;
  std::vector<GroundTruthBox> boxes;
  CopyBuilder copier(cfg, rng, filler, refs);
  for (std::size_t slot = 0; slot < roles.size(); ++slot) {
    const VideoId id = make_id(VideoKind::Query, slot);
    if (roles[slot] == Role::Copied) {
      out.queries.push_back(copier.build(id, boxes, out.tags).finish());
      continue;
    }
    const long frames = rng.integer(lo, hi);
    if (const auto hn = hard_negative_of_slot.find(slot); hn != hard_negative_of_slot.end()) {
      const auto& [ref, latent] = hn->second;
      out.queries.push_back(latent_video(rng, id, frames, cfg.dim, latent, cfg.hard_negative_correlation).finish());
      out.hard_negative_pairs.push_back({id, refs[ref].id});
    } else {
      out.queries.push_back(filler.video(id, frames).finish());
    }
  }
  for (const auto& r : refs) out.references.push_back(r.finish());
  for (const auto& t : training) out.training.push_back(t.finish());
  out.gt = GroundTruth(std::move(boxes));
  return out;
}

InstanceSummary summarize(const BenchmarkInstance& instance) {
  InstanceSummary s;
  s.queries = instance.queries.size();
  s.references = instance.references.size();
  s.copied_segments = instance.gt.boxes().size();
  s.queries_with_copies = instance.gt.queries().size();
  for (const auto& q : instance.queries) {
    if (!instance.gt.has_copies(q.video())) ++s.distractor_queries;
  }
  s.hard_negative_pairs = instance.hard_negative_pairs.size();
  return s;
}

void write_instance(const std::filesystem::path& dir, const BenchmarkInstance& instance) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_descriptors(dir / instance_files::kQueries, instance.queries);
  write_descriptors(dir / instance_files::kReferences, instance.references);
  write_descriptors(dir / instance_files::kTraining, instance.training);
  write_ground_truth(dir / instance_files::kGroundTruth, instance.gt);
  write_tags(dir / instance_files::kTags, instance.tags);
  write_pairs(dir / instance_files::kHardNegatives, instance.hard_negative_pairs);
  std::map<VideoId, double> durations;
  for (const auto* group : {&instance.queries, &instance.references, &instance.training}) {
    for (const auto& s : *group) durations.emplace(s.video(), s.duration());
  }
  write_durations(dir / instance_files::kDurations, durations);
}

BenchmarkInstance read_instance(const std::filesystem::path& dir) {
  BenchmarkInstance out;
  out.queries = read_descriptors(dir / instance_files::kQueries);
  out.references = read_descriptors(dir / instance_files::kReferences);
  out.training = read_descriptors(dir / instance_files::kTraining);
  out.gt = read_ground_truth(dir / instance_files::kGroundTruth);
  out.tags = read_tags(dir / instance_files::kTags);
  out.hard_negative_pairs = read_pairs(dir / instance_files::kHardNegatives);
  return out;
}

}  // namespace vcd
