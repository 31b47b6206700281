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

// Two-step matching pipeline: descriptor search for candidate pairs, then
// temporal localization of the copied segments inside each candidate.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vcd/localization.hpp"
#include "vcd/metrics.hpp"
#include "vcd/search.hpp"
#include "vcd/simulator.hpp"

namespace vcd {

struct ScoreNormalizationParams {
  std::size_t k = 1;
  double beta = 1.2;
};

struct SearchConfig {
  /// Frame pairs retrieved jointly for all queries.
  std::size_t k = 20000;
  RowNormalization normalization = RowNormalization::None;
  std::optional<ScoreNormalizationParams> score_normalization;
  /// Best-scoring detection pairs handed to localization; 0 keeps all.
  std::size_t max_candidates = 0;
  unsigned threads = 1;
};

struct PreparedDescriptors {
  std::vector<DescriptorSet> queries;
  std::vector<DescriptorSet> references;
  std::size_t zero_rows = 0;
  std::optional<ScoreNormalizer> normalizer;
};

/// Optional row normalization, then optional score normalization fitted on
/// `training` (which also supplies the per-dimension variance).
PreparedDescriptors prepare_descriptors(std::span<const DescriptorSet> queries,
                                        std::span<const DescriptorSet> references,
                                        std::span<const DescriptorSet> training, const SearchConfig& cfg);

struct SearchResult {
  std::vector<FrameMatch> matches;
  std::vector<DetectionPrediction> detections;
};

SearchResult run_search(const PreparedDescriptors& prepared, const SearchConfig& cfg);

/// The first `max_candidates` detection pairs (all when 0).
std::vector<VideoPair> candidate_pairs(std::span<const DetectionPrediction> detections, std::size_t max_candidates);

struct BaselineResult {
  std::vector<DetectionPrediction> detections;
  std::vector<LocalizationPrediction> localizations;
  PRCurve detection;
  PRCurve localization;
  double mean_ap = 0.0;
};

/// Search, detection scoring, candidate localization and both micro-AP
/// metrics against the instance ground truth.
BaselineResult run_baseline(const BenchmarkInstance& instance, const SearchConfig& search, const TNConfig& tn);

}  // namespace vcd
