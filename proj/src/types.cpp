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

#include "vcd/types.hpp"

#include <algorithm>
#include <cmath>

#include "vcd/errors.hpp"

namespace vcd {

char kind_prefix(VideoKind kind) {
  switch (kind) {
    case VideoKind::Query:
      return 'Q';
    case VideoKind::Reference:
      return 'R';
    case VideoKind::Training:
      return 'T';
  }
  return '?';
}

std::string_view kind_name(VideoKind kind) {
  switch (kind) {
    case VideoKind::Query:
      return "query";
    case VideoKind::Reference:
      return "reference";
    case VideoKind::Training:
      return "training";
  }
  return "unknown";
}

VideoId::VideoId(VideoKind kind, std::string id) : kind_(kind), id_(std::move(id)) {
  if (id_.empty()) throw ValidationError("video id must be non-empty");
  if (id_.front() != kind_prefix(kind_)) {
    throw ValidationError("video id '" + id_ + "' does not carry the " + std::string(kind_name(kind_)) +
                          " prefix '" + kind_prefix(kind_) + "'");
  }
}

VideoId VideoId::parse(std::string_view id) {
  if (id.empty()) throw ValidationError("video id must be non-empty");
  switch (id.front()) {
    case 'Q':
      return {VideoKind::Query, std::string(id)};
    case 'R':
      return {VideoKind::Reference, std::string(id)};
    case 'T':
      return {VideoKind::Training, std::string(id)};
    default:
      throw ValidationError("video id '" + std::string(id) + "' has no Q/R/T prefix");
  }
}

double median_period(std::span<const double> timestamps) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    const double d = timestamps[i] - timestamps[i - 1];
    if (d > 0) gaps.push_back(d);
  }
  if (gaps.empty()) return 1.0;
  const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  if (gaps.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(gaps.begin(), mid);
  return 0.5 * (lower + upper);
}

DescriptorSet::DescriptorSet(VideoId video, std::vector<double> timestamps, DescriptorMatrix vectors)
    : video_(std::move(video)), timestamps_(std::move(timestamps)), vectors_(std::move(vectors)) {
  const std::string who = "descriptor set " + video_.str();
  if (vectors_.cols() <= 0) throw ValidationError(who + ": dimension must be positive");
  if (static_cast<Eigen::Index>(timestamps_.size()) != vectors_.rows()) {
    throw ValidationError(who + ": " + std::to_string(timestamps_.size()) + " timestamps for " +
                          std::to_string(vectors_.rows()) + " rows");
  }
  for (std::size_t i = 0; i < timestamps_.size(); ++i) {
    if (!std::isfinite(timestamps_[i]) || timestamps_[i] < 0) {
      throw ValidationError(who + ": timestamp " + std::to_string(i) + " is negative or not finite");
    }
    if (i > 0 && timestamps_[i] < timestamps_[i - 1]) {
      throw ValidationError(who + ": timestamps decrease at index " + std::to_string(i));
    }
  }
  if (!vectors_.allFinite()) throw ValidationError(who + ": non-finite descriptor entry");
}

double DescriptorSet::frame_period() const { return median_period(timestamps_); }

double DescriptorSet::duration() const {
  if (timestamps_.empty()) return 0.0;
  return timestamps_.back() + frame_period();
}

SegmentBox::SegmentBox(double query_start, double query_end, double ref_start, double ref_end)
    : query_start_(query_start), query_end_(query_end), ref_start_(ref_start), ref_end_(ref_end) {
  const bool finite = std::isfinite(query_start) && std::isfinite(query_end) && std::isfinite(ref_start) &&
                      std::isfinite(ref_end);
  if (!finite) throw ValidationError("segment box has a non-finite coordinate");
  if (!(query_start < query_end)) throw ValidationError("segment box query extent is empty");
  if (!(ref_start < ref_end)) throw ValidationError("segment box reference extent is empty");
}

std::optional<SegmentBox> SegmentBox::intersect(const SegmentBox& other) const {
  const double qs = std::max(query_start_, other.query_start_);
  const double qe = std::min(query_end_, other.query_end_);
  const double rs = std::max(ref_start_, other.ref_start_);
  const double re = std::min(ref_end_, other.ref_end_);
  if (!(qs < qe) || !(rs < re)) return std::nullopt;
  return SegmentBox(qs, qe, rs, re);
}

double SegmentBox::iou(const SegmentBox& other) const {
  const auto inter = intersect(other);
  if (!inter) return 0.0;
  const double overlap = inter->area();
  return overlap / (area() + other.area() - overlap);
}

namespace {

void check_pair_kinds(const VideoId& query, const VideoId& reference) {
  if (query.kind() != VideoKind::Query) throw ValidationError("'" + query.str() + "' is not a query id");
  if (reference.kind() != VideoKind::Reference) {
    throw ValidationError("'" + reference.str() + "' is not a reference id");
  }
}

}  // namespace

DetectionPrediction::DetectionPrediction(VideoId q, VideoId r, double s)
    : query(std::move(q)), reference(std::move(r)), score(s) {
  check_pair_kinds(query, reference);
  if (!std::isfinite(score)) throw ValidationError("detection score is not finite");
}

LocalizationPrediction::LocalizationPrediction(VideoId q, VideoId r, SegmentBox b, double s)
    : query(std::move(q)), reference(std::move(r)), box(b), score(s) {
  check_pair_kinds(query, reference);
  if (!std::isfinite(score)) throw ValidationError("localization score is not finite");
}

GroundTruth::GroundTruth(std::vector<GroundTruthBox> boxes) : boxes_(std::move(boxes)) {
  for (const auto& b : boxes_) {
    check_pair_kinds(b.query, b.reference);
    pairs_.insert({b.query, b.reference});
    queries_.insert(b.query);
  }
}

std::vector<SegmentBox> GroundTruth::boxes_for(const VideoPair& pair) const {
  std::vector<SegmentBox> out;
  for (const auto& b : boxes_) {
    if (b.query == pair.query && b.reference == pair.reference) out.push_back(b.box);
  }
  return out;
}

bool ranks_before(const FrameMatch& a, const FrameMatch& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  if (a.query != b.query) return a.query < b.query;
  if (a.query_frame != b.query_frame) return a.query_frame < b.query_frame;
  if (a.reference != b.reference) return a.reference < b.reference;
  return a.ref_frame < b.ref_frame;
}

bool ranks_before(const DetectionPrediction& a, const DetectionPrediction& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.query != b.query) return a.query < b.query;
  return a.reference < b.reference;
}

bool ranks_before(const LocalizationPrediction& a, const LocalizationPrediction& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.query != b.query) return a.query < b.query;
  if (a.reference != b.reference) return a.reference < b.reference;
  return a.box < b.box;
}

TransformTag::TransformTag(VideoId q, std::set<std::string> t, std::optional<std::size_t> n)
    : query(std::move(q)), tags(std::move(t)), n_transforms(n.value_or(tags.size())) {
  if (query.kind() != VideoKind::Query) throw ValidationError("transform tag for non-query '" + query.str() + "'");
  if (n_transforms != tags.size()) {
    throw ValidationError("transform tag for " + query.str() + ": n_transforms " + std::to_string(n_transforms) +
                          " != " + std::to_string(tags.size()) + " distinct tags");
  }
  for (const auto& tag : tags) {
    if (tag.empty() || tag.find_first_of(",;\n") != std::string::npos) {
      throw ValidationError("transform name '" + tag + "' is empty or contains a separator");
    }
  }
}

}  // namespace vcd
