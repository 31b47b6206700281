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

/// Frame-to-frame similarities of one (query, reference) pair.
struct SimilarityMatrix {
  VideoId query;
  VideoId reference;
  std::vector<double> query_times;
  std::vector<double> ref_times;
  Eigen::MatrixXd values;  // query frames x reference frames
};

/// `values = Q * R^T`. Throws DimError when the descriptor sizes differ.
SimilarityMatrix similarity_matrix(const DescriptorSet& query, const DescriptorSet& reference);

/// Temporal network parameters.
struct TNConfig {
  /// Matches with `similarity + offset` strictly above this become nodes.
  double similarity_threshold = 0.0;
  /// Added to every similarity before thresholding and path weighting.
  /// Use 0.5 for score-normalized descriptors, whose similarities go negative.
  double offset = 0.0;
  /// Largest step, in seconds on either axis, between consecutive path nodes.
  double max_time_gap = 10.0;
  std::size_t min_path_length = 3;
  std::size_t max_paths_per_pair = 5;

  static TNConfig score_normalized() {
    TNConfig cfg;
    cfg.offset = 0.5;
    return cfg;
  }

  /// Throws ValidationError on a non-positive gap or a zero minimum length.
  void validate() const;
};

/// Extracts up to `max_paths_per_pair` heaviest monotone match paths and turns
/// each long enough path into a box scored by its best raw similarity.
///
/// Nodes are matches above threshold, weighted by `similarity + offset`. An
/// edge joins two nodes when both timestamps strictly increase by at most
/// `max_time_gap`. Each round runs a DAG dynamic program for the maximum
/// node-weight path (ties go to the smallest start, then the smallest end),
/// then removes that path's nodes. Boxes span the matched frames padded by
/// one frame period on each axis.
std::vector<LocalizationPrediction> temporal_network_localize(const SimilarityMatrix& s, const TNConfig& cfg);

/// Runs the temporal network over every candidate pair. Candidates are
/// de-duplicated; the output is sorted by `ranks_before` and does not
/// depend on candidate order or on `threads`.
std::vector<LocalizationPrediction> localize_candidates(std::span<const VideoPair> candidates,
                                                        std::span<const DescriptorSet> queries,
                                                        std::span<const DescriptorSet> references,
                                                        const TNConfig& cfg, unsigned threads = 1);

}  // namespace vcd
