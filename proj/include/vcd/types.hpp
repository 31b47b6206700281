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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vcd {

/// Role of a video in the benchmark. Encoded in I/O as the first character
/// of the id: `Q` query, `R` reference, `T` training.
enum class VideoKind : std::uint8_t { Query, Reference, Training };

char kind_prefix(VideoKind kind);
std::string_view kind_name(VideoKind kind);

class VideoId {
 public:
  /// Throws ValidationError when `id` is empty or its prefix disagrees with `kind`.
  VideoId(VideoKind kind, std::string id);

  /// Infers the kind from the prefix letter.
  static VideoId parse(std::string_view id);

  VideoKind kind() const { return kind_; }
  const std::string& str() const { return id_; }

  friend auto operator<=>(const VideoId&, const VideoId&) = default;
  friend bool operator==(const VideoId&, const VideoId&) = default;

 private:
  VideoKind kind_;
  std::string id_;
};

/// Frame descriptors, one row per sampled frame.
using DescriptorMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-video frame descriptors with their timestamps in seconds.
///
/// Immutable once built. The constructor rejects decreasing timestamps,
/// row/timestamp count mismatches, a zero dimension and non-finite entries.
class DescriptorSet {
 public:
  DescriptorSet(VideoId video, std::vector<double> timestamps, DescriptorMatrix vectors);

  const VideoId& video() const { return video_; }
  Eigen::Index dim() const { return vectors_.cols(); }
  Eigen::Index size() const { return vectors_.rows(); }
  std::span<const double> timestamps() const { return timestamps_; }
  const DescriptorMatrix& vectors() const { return vectors_; }

  /// Median spacing between consecutive timestamps; 1 s with fewer than two frames.
  double frame_period() const;

  /// Last timestamp plus one frame period; 0 for an empty set.
  double duration() const;

 private:
  VideoId video_;
  std::vector<double> timestamps_;
  DescriptorMatrix vectors_;
};

/// Median positive spacing of a timestamp sequence, defaulting to 1 s.
double median_period(std::span<const double> timestamps);

/// Half-open temporal box: [query_start, query_end) x [ref_start, ref_end).
class SegmentBox {
 public:
  /// Throws ValidationError unless both extents are strictly positive and finite.
  SegmentBox(double query_start, double query_end, double ref_start, double ref_end);

  double query_start() const { return query_start_; }
  double query_end() const { return query_end_; }
  double ref_start() const { return ref_start_; }
  double ref_end() const { return ref_end_; }

  double query_length() const { return query_end_ - query_start_; }
  double ref_length() const { return ref_end_ - ref_start_; }
  double area() const { return query_length() * ref_length(); }

  /// Intersection box, or nothing when the boxes do not overlap with positive area.
  std::optional<SegmentBox> intersect(const SegmentBox& other) const;

  /// 2D intersection over union.
  double iou(const SegmentBox& other) const;

  friend auto operator<=>(const SegmentBox&, const SegmentBox&) = default;
  friend bool operator==(const SegmentBox&, const SegmentBox&) = default;

 private:
  double query_start_;
  double query_end_;
  double ref_start_;
  double ref_end_;
};

struct VideoPair {
  VideoId query;
  VideoId reference;

  friend auto operator<=>(const VideoPair&, const VideoPair&) = default;
  friend bool operator==(const VideoPair&, const VideoPair&) = default;
};

struct DetectionPrediction {
  /// Throws ValidationError on a non-finite score or wrong id kinds.
  DetectionPrediction(VideoId query, VideoId reference, double score);

  VideoId query;
  VideoId reference;
  double score;

  VideoPair pair() const { return {query, reference}; }
};

struct LocalizationPrediction {
  LocalizationPrediction(VideoId query, VideoId reference, SegmentBox box, double score);

  VideoId query;
  VideoId reference;
  SegmentBox box;
  double score;

  VideoPair pair() const { return {query, reference}; }
};

struct GroundTruthBox {
  VideoId query;
  VideoId reference;
  SegmentBox box;
};

/// Copied-segment annotations. A query without any box is a distractor.
class GroundTruth {
 public:
  GroundTruth() = default;
  explicit GroundTruth(std::vector<GroundTruthBox> boxes);

  const std::vector<GroundTruthBox>& boxes() const { return boxes_; }
  const std::set<VideoPair>& pair_set() const { return pairs_; }
  const std::set<VideoId>& queries() const { return queries_; }

  bool is_match(const VideoPair& pair) const { return pairs_.contains(pair); }
  bool has_copies(const VideoId& query) const { return queries_.contains(query); }

  /// Boxes of one pair, in file order. Empty for non-matching pairs.
  std::vector<SegmentBox> boxes_for(const VideoPair& pair) const;

 private:
  std::vector<GroundTruthBox> boxes_;
  std::set<VideoPair> pairs_;
  std::set<VideoId> queries_;
};

/// One scored frame pair returned by the descriptor search.
struct FrameMatch {
  VideoId query;
  Eigen::Index query_frame;
  VideoId reference;
  Eigen::Index ref_frame;
  double similarity;

  VideoPair pair() const { return {query, reference}; }
};

/// Ranking orders used by search, localization and the metrics. Higher score
/// first; equal scores fall back to ascending ids, then frame indices or box
/// coordinates, so every ranking is reproducible.
bool ranks_before(const FrameMatch& a, const FrameMatch& b);
bool ranks_before(const DetectionPrediction& a, const DetectionPrediction& b);
bool ranks_before(const LocalizationPrediction& a, const LocalizationPrediction& b);

/// Edit types applied to one query.
struct TransformTag {
  /// `n_transforms` defaults to the number of distinct tags and must equal it.
  TransformTag(VideoId query, std::set<std::string> tags, std::optional<std::size_t> n_transforms = {});

  VideoId query;
  std::set<std::string> tags;
  std::size_t n_transforms;

  bool has(std::string_view tag) const { return tags.contains(std::string(tag)); }
};

}  // namespace vcd

template <>
struct std::hash<vcd::VideoId> {
  std::size_t operator()(const vcd::VideoId& v) const noexcept { return std::hash<std::string>{}(v.str()); }
};
