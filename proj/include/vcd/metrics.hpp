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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vcd/types.hpp"

namespace vcd {

struct PRPoint {
  std::size_t rank;  // 1-based
  double precision;
  double recall;
  double threshold;  // score of the prediction at this rank
};

/// Precision/recall after each rank of a jointly ranked prediction list, and
/// the micro average precision `sum_i P(i) * (R(i) - R(i-1))`.
struct PRCurve {
  std::vector<PRPoint> points;
  double uap = 0.0;
};

/// Rectangle-rule area under a precision/recall sequence.
double micro_average_precision(std::span<const PRPoint> points);

/// Keeps the best score of every (query, reference) pair and ranks the result.
std::vector<DetectionPrediction> rank_detections(std::span<const DetectionPrediction> preds);

/// Copy detection: a prediction is correct when its pair is a ground-truth
/// match. Recall is relative to every matching pair. Throws ValidationError
/// when the ground truth has no pairs.
PRCurve detection_uap(std::span<const DetectionPrediction> preds, const GroundTruth& gt);

/// Copy localization. At rank i, with boxes projected on the reference (x)
/// and query (y) axes and lengths summed over video pairs:
///
///   P(i) = sqrt(Lox * Loy / (Lpx * Lpy)),   R(i) = sqrt(Lox * Loy / (Lgx * Lgy))
///
/// where p are unions of predicted boxes, g unions of ground-truth boxes and o
/// unions of the pairwise intersections of predicted and ground-truth boxes.
/// Union lengths are maintained incrementally.
PRCurve localization_uap(std::span<const LocalizationPrediction> preds, const GroundTruth& gt);

/// Per-query average precision, averaged over queries that have matches.
double mean_ap(std::span<const DetectionPrediction> preds, const GroundTruth& gt);

/// Decides whether a query with copies stays in a subset. Queries without a
/// tag row are passed an empty tag.
using QueryFilter = std::function<bool(const VideoId&, const TransformTag&)>;

struct SubsetEvaluation {
  PRCurve curve;                  // detection or localization, by overload
  std::optional<double> mean_ap;  // detection only
  std::size_t matched_queries = 0;
  std::size_t distractor_queries = 0;
};

/// Restricts the ground truth to matched queries accepted by `keep` and the
/// predictions to those queries plus every distractor query, then re-scores.
/// Throws ValidationError when no matched query survives.
SubsetEvaluation evaluate_subset(std::span<const DetectionPrediction> preds, const GroundTruth& gt,
                                 std::span<const TransformTag> tags, const QueryFilter& keep);
SubsetEvaluation evaluate_subset(std::span<const LocalizationPrediction> preds, const GroundTruth& gt,
                                 std::span<const TransformTag> tags, const QueryFilter& keep);

/// Drops every prediction whose query has no ground-truth match.
std::vector<DetectionPrediction> exclude_distractors(std::span<const DetectionPrediction> preds,
                                                     const GroundTruth& gt);
std::vector<LocalizationPrediction> exclude_distractors(std::span<const LocalizationPrediction> preds,
                                                        const GroundTruth& gt);

struct HardNegativePoint {
  VideoPair pair;
  double precision_a;  // precision at the pair's rank in run A, 0 if absent
  double precision_b;
};

/// Non-matching pairs ranked within the first `top_n` of either run, with the
/// precision each run reaches at the rank where it places them. Sorted by pair.
std::vector<HardNegativePoint> hard_negative_comparison(std::span<const DetectionPrediction> run_a,
                                                        std::span<const DetectionPrediction> run_b,
                                                        const GroundTruth& gt, std::size_t top_n);

/// CSV with header `rank,threshold,precision,recall`.
void write_pr_curve(const std::filesystem::path& path, const PRCurve& curve);

}  // namespace vcd
