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

#pragma once

/** \file simulator.hpp
 *  \brief Seeded descriptor-level benchmark generator.
 *
 *  Videos are sequences of unit-norm Gaussian frame descriptors at one frame
 *  per second. Copied queries splice reference sub-segments (optionally
 *  noised, sped up or slowed down, decimated) into random filler, and the
 *  ground-truth boxes are recorded from the splice arithmetic. Distractor
 *  queries are pure filler; a configurable number of them are paired with a
 *  reference through a shared latent vector to form hard negatives.
 *
 *  Generation is single-threaded and fully determined by the config.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vcd/types.hpp"

namespace vcd {

struct SimConfig {
  std::uint64_t seed = 0;
  long dim = 64;
  std::size_t n_references = 100;
  std::size_t n_distractor_queries = 100;
  std::size_t n_copied_queries = 30;
  std::size_t n_training = 20;
  /// Whole-second video durations are drawn from [min_duration, max_duration].
  double min_duration = 5.0;
  double max_duration = 60.0;
  /// Reference-side length of each copied segment, in seconds.
  double min_segment = 10.0;
  double max_segment = 30.0;
  /// Longest run of filler frames between copied segments.
  double max_filler = 10.0;
  double noise_sigma = 0.0;
  /// Per-frame probability that a filler frame is near-empty: such frames sit
  /// close to one shared direction and look alike across unrelated videos.
  double p_low_content = 0.0;
  double p_multi_segment = 0.0;
  double p_multi_reference = 0.0;
  double p_speed_change = 0.0;
  double p_time_decimate = 0.0;
  std::size_t n_hard_negative_pairs = 0;
  double hard_negative_correlation = 0.5;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. `seed` is required and
/// unknown keys are rejected. Throws ValidationError naming the key.
SimConfig parse_sim_config(std::string_view text);

struct BenchmarkInstance {
  std::vector<DescriptorSet> queries;
  std::vector<DescriptorSet> references;
  std::vector<DescriptorSet> training;
  GroundTruth gt;
  std::vector<TransformTag> tags;  // one row per copied query
  std::vector<VideoPair> hard_negative_pairs;
};

/// Throws ValidationError when no reference can host a copied segment.
BenchmarkInstance generate(const SimConfig& cfg);

struct InstanceSummary {
  std::size_t queries = 0;
  std::size_t references = 0;
  std::size_t copied_segments = 0;
  std::size_t queries_with_copies = 0;
  std::size_t distractor_queries = 0;
  std::size_t hard_negative_pairs = 0;
};

InstanceSummary summarize(const BenchmarkInstance& instance);

/// File names used by write_instance / read_instance.
namespace instance_files {
inline constexpr std::string_view kQueries = "queries.vcbd";
inline constexpr std::string_view kReferences = "references.vcbd";
inline constexpr std::string_view kTraining = "training.vcbd";
inline constexpr std::string_view kGroundTruth = "ground_truth.csv";
inline constexpr std::string_view kTags = "tags.csv";
inline constexpr std::string_view kHardNegatives = "hard_negatives.csv";
inline constexpr std::string_view kDurations = "durations.csv";
}  // namespace instance_files

void write_instance(const std::filesystem::path& dir, const BenchmarkInstance& instance);
BenchmarkInstance read_instance(const std::filesystem::path& dir);

}  // namespace vcd
