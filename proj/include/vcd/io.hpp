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

/** \file io.hpp
 *  \brief On-disk formats for descriptors, annotations and predictions.
 *
 *  Descriptor file (`.vcbd`), little-endian throughout:
 *
 *    magic "VCBD" | version u32 (=1) | dim u32 | video count u32
 *    per video: id length u16 | id bytes (UTF-8) | row count u32 |
 *               timestamps f32[rows] | vectors f32[rows * dim] (row-major)
 *
 *  Everything else is CSV with a fixed header line, `,` separators and `\n`
 *  line ends. Numbers are written in shortest round-trip form.
 */

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vcd/types.hpp"

namespace vcd {

inline constexpr std::uint32_t kDescriptorFormatVersion = 1;
inline constexpr char kDescriptorMagic[4] = {'V', 'C', 'B', 'D'};

void write_descriptors(const std::filesystem::path& path, std::span<const DescriptorSet> sets);
std::vector<DescriptorSet> read_descriptors(const std::filesystem::path& path);

/// Header `query_id,ref_id,query_start,query_end,ref_start,ref_end`.
GroundTruth read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);

/// Header `query_id,ref_id,score`. Rows are returned in file order, duplicates included.
std::vector<DetectionPrediction> read_detection_predictions(const std::filesystem::path& path);
void write_detection_predictions(const std::filesystem::path& path, std::span<const DetectionPrediction> preds);

/// Header `query_id,ref_id,query_start,query_end,ref_start,ref_end,score`.
std::vector<LocalizationPrediction> read_localization_predictions(const std::filesystem::path& path);
void write_localization_predictions(const std::filesystem::path& path,
                                    std::span<const LocalizationPrediction> preds);

/// Header `query_id,transforms,n_transforms`; transforms are `;`-joined.
std::vector<TransformTag> read_tags(const std::filesystem::path& path);
void write_tags(const std::filesystem::path& path, std::span<const TransformTag> tags);

/// Header starting with `query_id,ref_id`; extra columns are ignored so a
/// detection prediction file can be read as a candidate list.
std::vector<VideoPair> read_pairs(const std::filesystem::path& path);
void write_pairs(const std::filesystem::path& path, std::span<const VideoPair> pairs);

/// Header `video_id,duration`.
std::map<VideoId, double> read_durations(const std::filesystem::path& path);
void write_durations(const std::filesystem::path& path, const std::map<VideoId, double>& durations);

/// Header `query_id,query_frame,ref_id,ref_frame,similarity`.
void write_matches(const std::filesystem::path& path, std::span<const FrameMatch> matches);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

inline constexpr long kMaxDescriptorDim = 512;
inline constexpr double kMaxDescriptorsPerSecond = 1.0;

struct ValidationReport {
  bool passed = true;
  std::vector<std::string> violations;
  /// Videos individually above one descriptor per second. Informational only.
  std::vector<VideoId> over_rate_videos;
  long max_dim = 0;
  std::size_t total_descriptors = 0;
  double total_seconds = 0.0;
};

/// Checks the submission limits: dimension at most 512 and an aggregate
/// average of at most one descriptor per video second.
ValidationReport validate_descriptor_budget(std::span<const DescriptorSet> sets,
                                            const std::map<VideoId, double>& durations);

}  // namespace vcd
