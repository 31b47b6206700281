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

#include "vcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "vcd/errors.hpp"
#include "vcd/interval_union.hpp"
#include "vcd/io.hpp"

namespace vcd {

double micro_average_precision(std::span<const PRPoint> points) {
  double area = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : points) {
    area += p.precision * (p.recall - prev_recall);
    prev_recall = p.recall;
  }
  return area;
}

std::vector<DetectionPrediction> rank_detections(std::span<const DetectionPrediction> preds) {
  std::map<VideoPair, std::size_t> best;
  std::vector<DetectionPrediction> out;
  for (const auto& p : preds) {
    auto [it, inserted] = best.try_emplace(p.pair(), out.size());
    if (inserted) {
      out.push_back(p);
    } else if (p.score > out[it->second].score) {
      out[it->second].score = p.score;
    }
  }
  std::sort(out.begin(), out.end(),
            [](const DetectionPrediction& a, const DetectionPrediction& b) { return ranks_before(a, b); });
  return out;
}

PRCurve detection_uap(std::span<const DetectionPrediction> preds, const GroundTruth& gt) {
  if (gt.pair_set().empty()) throw ValidationError("detection uAP is undefined without ground-truth pairs");
  const auto ranked = rank_detections(preds);
  const auto positives = static_cast<double>(gt.pair_set().size());
  PRCurve curve;
  curve.points.reserve(ranked.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (gt.is_match(ranked[i].pair())) ++correct;
    curve.points.push_back({i + 1, static_cast<double>(correct) / static_cast<double>(i + 1),
                            static_cast<double>(correct) / positives, ranked[i].score});
  }
  curve.uap = micro_average_precision(curve.points);
  return curve;
}

namespace {

struct PairUnions {
  IntervalUnion pred_x, pred_y, overlap_x, overlap_y;
  std::vector<SegmentBox> gt_boxes;
};

}  // namespace

PRCurve localization_uap(std::span<const LocalizationPrediction> preds, const GroundTruth& gt) {
  if (gt.boxes().empty()) throw ValidationError("localization uAP is undefined without ground-truth boxes");

  std::map<VideoPair, PairUnions> state;
  double gt_x = 0.0, gt_y = 0.0;
  {
    std::map<VideoPair, std::pair<IntervalUnion, IntervalUnion>> gt_unions;
    for (const auto& b : gt.boxes()) {
      auto& u = gt_unions[{b.query, b.reference}];
      u.first.insert(b.box.ref_start(), b.box.ref_end());
      u.second.insert(b.box.query_start(), b.box.query_end());
      state[{b.query, b.reference}].gt_boxes.push_back(b.box);
    }
    for (const auto& [pair, u] : gt_unions) {
      gt_x += u.first.length();
      gt_y += u.second.length();
    }
  }
  const double gt_area = gt_x * gt_y;

  std::vector<LocalizationPrediction> ranked(preds.begin(), preds.end());
  std::sort(ranked.begin(), ranked.end(),
            [](const LocalizationPrediction& a, const LocalizationPrediction& b) { return ranks_before(a, b); });

  double px = 0.0, py = 0.0, ox = 0.0, oy = 0.0;
  PRCurve curve;
  curve.points.reserve(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& p = ranked[i];
    auto& u = state[p.pair()];
    px += u.pred_x.insert(p.box.ref_start(), p.box.ref_end());
    py += u.pred_y.insert(p.box.query_start(), p.box.query_end());
    for (const auto& g : u.gt_boxes) {
      if (const auto o = p.box.intersect(g)) {
        ox += u.overlap_x.insert(o->ref_start(), o->ref_end());
        oy += u.overlap_y.insert(o->query_start(), o->query_end());
      }
    }
    const double overlap_area = ox * oy;
    const double pred_area = px * py;
    const double precision = pred_area > 0.0 ? std::sqrt(overlap_area / pred_area) : 0.0;
    const double recall = std::sqrt(overlap_area / gt_area);
    curve.points.push_back({i + 1, precision, recall, p.score});
  }
  curve.uap = micro_average_precision(curve.points);
  return curve;
}

double mean_ap(std::span<const DetectionPrediction> preds, const GroundTruth& gt) {
  if (gt.pair_set().empty()) throw ValidationError("mAP is undefined without ground-truth pairs");
  std::map<VideoId, std::size_t> positives;
  for (const auto& p : gt.pair_set()) ++positives[p.query];

  std::map<VideoId, std::vector<DetectionPrediction>> by_query;
  for (const auto& p : rank_detections(preds)) {
    if (positives.contains(p.query)) by_query[p.query].push_back(p);
  }
  double sum = 0.0;
  for (const auto& [query, n_pos] : positives) {
    const auto it = by_query.find(query);
    if (it == by_query.end()) continue;
    std::size_t correct = 0;
    double ap = 0.0;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      if (!gt.is_match(it->second[i].pair())) continue;
      ++correct;
      ap += static_cast<double>(correct) / static_cast<double>(i + 1);
    }
    sum += ap / static_cast<double>(n_pos);
  }
  return sum / static_cast<double>(positives.size());
}

namespace {

struct Selection {
  GroundTruth gt;
  std::set<VideoId> matched;
};

Selection select_queries(const GroundTruth& gt, std::span<const TransformTag> tags, const QueryFilter& keep) {
  std::map<VideoId, const TransformTag*> tag_of;
  for (const auto& t : tags) tag_of.emplace(t.query, &t);
  Selection sel;
  for (const auto& q : gt.queries()) {
    const auto it = tag_of.find(q);
    const TransformTag untagged(q, {});
    if (keep(q, it == tag_of.end() ? untagged : *it->second)) sel.matched.insert(q);
  }
  if (sel.matched.empty()) throw ValidationError("query subset keeps no query with ground-truth matches");
  std::vector<GroundTruthBox> boxes;
  for (const auto& b : gt.boxes()) {
    if (sel.matched.contains(b.query)) boxes.push_back(b);
  }
  sel.gt = GroundTruth(std::move(boxes));
  return sel;
}

template <typename Prediction>
std::vector<Prediction> restrict_to(std::span<const Prediction> preds, const GroundTruth& full, const Selection& sel) {
  std::vector<Prediction> out;
  for (const auto& p : preds) {
    if (!full.has_copies(p.query) || sel.matched.contains(p.query)) out.push_back(p);
  }
  return out;
}

template <typename Prediction>
std::size_t count_distractors(std::span<const Prediction> preds, const GroundTruth& gt) {
  std::set<VideoId> seen;
  for (const auto& p : preds) {
    if (!gt.has_copies(p.query)) seen.insert(p.query);
  }
  return seen.size();
}

}  // namespace

SubsetEvaluation evaluate_subset(std::span<const DetectionPrediction> preds, const GroundTruth& gt,
                                 std::span<const TransformTag> tags, const QueryFilter& keep) {
  const auto sel = select_queries(gt, tags, keep);
  const auto kept = restrict_to(preds, gt, sel);
  SubsetEvaluation out;
  out.curve = detection_uap(kept, sel.gt);
  out.mean_ap = mean_ap(kept, sel.gt);
  out.matched_queries = sel.matched.size();
  out.distractor_queries = count_distractors<DetectionPrediction>(kept, gt);
  return out;
}

SubsetEvaluation evaluate_subset(std::span<const LocalizationPrediction> preds, const GroundTruth& gt,
                                 std::span<const TransformTag> tags, const QueryFilter& keep) {
  const auto sel = select_queries(gt, tags, keep);
  const auto kept = restrict_to(preds, gt, sel);
  SubsetEvaluation out;
  out.curve = localization_uap(kept, sel.gt);
  out.matched_queries = sel.matched.size();
  out.distractor_queries = count_distractors<LocalizationPrediction>(kept, gt);
  return out;
}

std::vector<DetectionPrediction> exclude_distractors(std::span<const DetectionPrediction> preds,
                                                     const GroundTruth& gt) {
  std::vector<DetectionPrediction> out;
  for (const auto& p : preds) {
    if (gt.has_copies(p.query)) out.push_back(p);
  }
  return out;
}

std::vector<LocalizationPrediction> exclude_distractors(std::span<const LocalizationPrediction> preds,
                                                        const GroundTruth& gt) {
  std::vector<LocalizationPrediction> out;
  for (const auto& p : preds) {
    if (gt.has_copies(p.query)) out.push_back(p);
  }
  return out;
}

std::vector<HardNegativePoint> hard_negative_comparison(std::span<const DetectionPrediction> run_a,
                                                        std::span<const DetectionPrediction> run_b,
                                                        const GroundTruth& gt, std::size_t top_n) {
  struct RunIndex {
    std::map<VideoPair, double> precision_at_pair;
    std::vector<VideoPair> top_negatives;
  };
  auto index = [&](std::span<const DetectionPrediction> run) {
    RunIndex idx;
    const auto ranked = rank_detections(run);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto pair = ranked[i].pair();
      const bool match = gt.is_match(pair);
      if (match) ++correct;
      idx.precision_at_pair[pair] = static_cast<double>(correct) / static_cast<double>(i + 1);
      if (!match && i < top_n) idx.top_negatives.push_back(pair);
    }
    return idx;
  };
  const auto a = index(run_a);
  const auto b = index(run_b);

  std::set<VideoPair> negatives(a.top_negatives.begin(), a.top_negatives.end());
  negatives.insert(b.top_negatives.begin(), b.top_negatives.end());

  std::vector<HardNegativePoint> out;
  out.reserve(negatives.size());
  for (const auto& pair : negatives) {
    const auto pa = a.precision_at_pair.find(pair);
    const auto pb = b.precision_at_pair.find(pair);
    out.push_back({pair, pa == a.precision_at_pair.end() ? 0.0 : pa->second,
                   pb == b.precision_at_pair.end() ? 0.0 : pb->second});
  }
  return out;
}

void write_pr_curve(const std::filesystem::path& path, const PRCurve& curve) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "rank,threshold,precision,recall\n";
  for (const auto& p : curve.points) {
    out << p.rank << ',' << format_number(p.threshold) << ',' << format_number(p.precision) << ','
        << format_number(p.recall) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace vcd
