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
#include <span>
#include <vector>

#include "vcd/types.hpp"

namespace vcd {

/// Exact search for the `k` most similar (query frame, reference frame) pairs
/// over the whole cross product, ranked jointly for all queries.
///
/// Similarity is `vcd::inner` on the stored float rows. Results follow
/// `ranks_before`, so the output is the same for any input order and any
/// `threads`. Throws DimError on mixed dimensions and ValidationError on
/// repeated video ids.
std::vector<FrameMatch> global_topk_pairs(std::span<const DescriptorSet> queries,
                                          std::span<const DescriptorSet> references, std::size_t k,
                                          unsigned threads = 1);

/// Video-level confidence: the best frame similarity of each (query, reference)
/// pair, sorted by descending score then by pair.
std::vector<DetectionPrediction> detection_scores(std::span<const FrameMatch> matches);

/// Background statistics used to calibrate query-frame similarities.
struct ScoreNormalizer {
  DescriptorMatrix training_vectors;
  std::size_t k = 1;
  double beta = 1.2;
  Eigen::Index embed_dim_index = 0;
};

/// Picks the lowest-variance dimension of `dim_stats_source` as the slot that
/// will carry the correction, and retains the training rows.
ScoreNormalizer fit_normalizer(std::span<const DescriptorSet> training, std::size_t k, double beta,
                               std::span<const DescriptorSet> dim_stats_source);

/// Similarity of each row of `queries` to its k-th most similar training
/// row, with the embedding slot zeroed on the query side.
Eigen::VectorXd background_similarity(const ScoreNormalizer& n, const DescriptorMatrix& queries);

struct NormalizedSets {
  std::vector<DescriptorSet> queries;
  std::vector<DescriptorSet> references;
};

/// Folds score normalization into the descriptors. The embedding slot is
/// zeroed on both sides, then set to `-beta * s_k(q)` for queries and to 1 for
/// references, so `inner(q', r') == inner(q~, r~) - beta * s_k(q)`.
NormalizedSets apply_normalizer(const ScoreNormalizer& n, std::span<const DescriptorSet> queries,
                                std::span<const DescriptorSet> references);

enum class RowNormalization { None, L2 };

struct RowNormalizationResult {
  std::vector<DescriptorSet> sets;
  std::size_t zero_rows = 0;
};

/// Unit-L2 rows (`L2`) or a passthrough copy (`None`). Zero rows are kept and counted.
RowNormalizationResult normalize_descriptors(std::span<const DescriptorSet> sets,
                                             RowNormalization mode = RowNormalization::L2);

inline RowNormalizationResult l2_normalize(std::span<const DescriptorSet> sets) {
  return normalize_descriptors(sets, RowNormalization::L2);
}

}  // namespace vcd
