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

#include "vcd/baseline.hpp"

#include "vcd/errors.hpp"

namespace vcd {

PreparedDescriptors prepare_descriptors(std::span<const DescriptorSet> queries,
                                        std::span<const DescriptorSet> references,
                                        std::span<const DescriptorSet> training, const SearchConfig& cfg) {
  PreparedDescriptors out;
  auto q = normalize_descriptors(queries, cfg.normalization);
  auto r = normalize_descriptors(references, cfg.normalization);
  out.zero_rows = q.zero_rows + r.zero_rows;
  if (!cfg.score_normalization) {
    out.queries = std::move(q.sets);
    out.references = std::move(r.sets);
    return out;
  }
  const auto t = normalize_descriptors(training, cfg.normalization);
  out.normalizer = fit_normalizer(t.sets, cfg.score_normalization->k, cfg.score_normalization->beta, t.sets);
  auto normalized = apply_normalizer(*out.normalizer, q.sets, r.sets);
  out.queries = std::move(normalized.queries);
  out.references = std::move(normalized.references);
  return out;
}

SearchResult run_search(const PreparedDescriptors& prepared, const SearchConfig& cfg) {
  SearchResult out;
  out.matches = global_topk_pairs(prepared.queries, prepared.references, cfg.k, cfg.threads);
  out.detections = detection_scores(out.matches);
  return out;
}

std::vector<VideoPair> candidate_pairs(std::span<const DetectionPrediction> detections, std::size_t max_candidates) {
  const std::size_t n = max_candidates == 0 ? detections.size() : std::min(max_candidates, detections.size());
  std::vector<VideoPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(detections[i].pair());
  return out;
}

BaselineResult run_baseline(const BenchmarkInstance& instance, const SearchConfig& search, const TNConfig& tn) {
  const auto prepared = prepare_descriptors(instance.queries, instance.references, instance.training, search);
  auto found = run_search(prepared, search);
  BaselineResult out;
  out.detections = std::move(found.detections);
  const auto candidates = candidate_pairs(out.detections, search.max_candidates);
  out.localizations = localize_candidates(candidates, prepared.queries, prepared.references, tn, search.threads);
  out.detection = detection_uap(out.detections, instance.gt);
  out.localization = localization_uap(out.localizations, instance.gt);
  out.mean_ap = mean_ap(out.detections, instance.gt);
  return out;
}

}  // namespace vcd
