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

#include "vcd/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <thread>

#include "vcd/errors.hpp"
#include "vcd/linalg.hpp"

namespace vcd {

namespace {

// Compact candidate; video fields hold the rank of the id in sorted order so
// comparisons never touch strings.
struct Candidate {
  double similarity;
  std::uint32_t query_rank;
  std::uint32_t query_frame;
  std::uint32_t ref_rank;
  std::uint32_t ref_frame;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  if (a.query_rank != b.query_rank) return a.query_rank < b.query_rank;
  if (a.query_frame != b.query_frame) return a.query_frame < b.query_frame;
  if (a.ref_rank != b.ref_rank) return a.ref_rank < b.ref_rank;
  return a.ref_frame < b.ref_frame;
}

struct Better {
  bool operator()(const Candidate& a, const Candidate& b) const { return better(a, b); }
};

// Top of the queue is the worst retained candidate.
using BoundedHeap = std::priority_queue<Candidate, std::vector<Candidate>, Better>;

std::vector<std::uint32_t> id_ranks(std::span<const DescriptorSet> sets, std::string_view role) {
  std::vector<std::uint32_t> order(sets.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return sets[a].video() < sets[b].video(); });
  std::vector<std::uint32_t> rank(sets.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) {
    if (r > 0 && sets[order[r]].video() == sets[order[r - 1]].video()) {
      throw ValidationError("duplicate " + std::string(role) + " id " + sets[order[r]].video().str());
    }
    rank[order[r]] = r;
  }
  return rank;
}

Eigen::Index common_dim(std::span<const DescriptorSet> a, std::span<const DescriptorSet> b) {
  Eigen::Index dim = -1;
  auto check = [&](const DescriptorSet& s) {
    if (dim < 0) dim = s.dim();
    if (s.dim() != dim) {
      throw DimError("descriptor dimension " + std::to_string(s.dim()) + " of " + s.video().str() +
                     " differs from " + std::to_string(dim));
    }
  };
  for (const auto& s : a) check(s);
  for (const auto& s : b) check(s);
  return dim;
}

}  // namespace

std::vector<FrameMatch> global_topk_pairs(std::span<const DescriptorSet> queries,
                                          std::span<const DescriptorSet> references, std::size_t k,
                                          unsigned threads) {
  if (k == 0) throw ValidationError("k must be at least 1");
  common_dim(queries, references);
  const auto query_rank = id_ranks(queries, "query");
  const auto ref_rank = id_ranks(references, "reference");

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(queries.size())));
  std::vector<BoundedHeap> heaps(workers);
  std::atomic<std::size_t> next{0};

  auto work = [&](unsigned w) {
    auto& heap = heaps[w];
    for (std::size_t qi = next++; qi < queries.size(); qi = next++) {
      const auto& qv = queries[qi].vectors();
      for (Eigen::Index f = 0; f < qv.rows(); ++f) {
        const auto qrow = qv.row(f);
        for (std::size_t ri = 0; ri < references.size(); ++ri) {
          const auto& rv = references[ri].vectors();
          for (Eigen::Index g = 0; g < rv.rows(); ++g) {
            const Candidate c{inner(qrow, rv.row(g)), query_rank[qi], static_cast<std::uint32_t>(f),
                              ref_rank[ri], static_cast<std::uint32_t>(g)};
            if (heap.size() < k) {
              heap.push(c);
            } else if (c.similarity >= heap.top().similarity && better(c, heap.top())) {
              heap.pop();
              heap.push(c);
            }
          }
        }
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  std::vector<Candidate> merged;
  for (auto& heap : heaps) {
    while (!heap.empty()) {
      merged.push_back(heap.top());
      heap.pop();
    }
  }
  std::sort(merged.begin(), merged.end(), better);
  if (merged.size() > k) merged.resize(k);

  std::vector<std::size_t> query_by_rank(queries.size()), ref_by_rank(references.size());
  for (std::size_t i = 0; i < queries.size(); ++i) query_by_rank[query_rank[i]] = i;
  for (std::size_t i = 0; i < references.size(); ++i) ref_by_rank[ref_rank[i]] = i;

  std::vector<FrameMatch> out;
  out.reserve(merged.size());
  for (const auto& c : merged) {
    out.push_back({queries[query_by_rank[c.query_rank]].video(), c.query_frame,
                   references[ref_by_rank[c.ref_rank]].video(), c.ref_frame, c.similarity});
  }
  return out;
}

std::vector<DetectionPrediction> detection_scores(std::span<const FrameMatch> matches) {
  std::map<VideoPair, double> best;
  for (const auto& m : matches) {
    auto [it, inserted] = best.try_emplace(m.pair(), m.similarity);
    if (!inserted) it->second = std::max(it->second, m.similarity);
  }
  std::vector<DetectionPrediction> out;
  out.reserve(best.size());
  for (const auto& [pair, score] : best) out.emplace_back(pair.query, pair.reference, score);
  std::sort(out.begin(), out.end(),
            [](const DetectionPrediction& a, const DetectionPrediction& b) { return ranks_before(a, b); });
  return out;
}

ScoreNormalizer fit_normalizer(std::span<const DescriptorSet> training, std::size_t k, double beta,
                               std::span<const DescriptorSet> dim_stats_source) {
  if (training.empty()) throw ValidationError("score normalization needs a non-empty training set");
  if (k == 0) throw ValidationError("score normalization k must be at least 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("score normalization beta must be >= 0");
  for (const auto& s : training) {
    if (s.video().kind() != VideoKind::Training) {
      throw ValidationError("score normalization may only use training videos, got " + s.video().str());
    }
  }
  const Eigen::Index dim = common_dim(training, dim_stats_source);

  Eigen::Index rows = 0;
  for (const auto& s : training) rows += s.size();
  if (static_cast<Eigen::Index>(k) > rows) {
    throw ValidationError("score normalization k=" + std::to_string(k) + " exceeds " + std::to_string(rows) +
                          " training vectors");
  }

  ScoreNormalizer n;
  n.k = k;
  n.beta = beta;
  n.training_vectors.resize(rows, dim);
  Eigen::Index at = 0;
  for (const auto& s : training) {
    n.training_vectors.middleRows(at, s.size()) = s.vectors();
    at += s.size();
  }

  Eigen::Index stat_rows = 0;
  for (const auto& s : dim_stats_source) stat_rows += s.size();
  if (stat_rows == 0) throw ValidationError("dimension statistics source has no descriptors");
  DescriptorMatrix stats(stat_rows, dim);
  at = 0;
  for (const auto& s : dim_stats_source) {
    stats.middleRows(at, s.size()) = s.vectors();
    at += s.size();
  }
  // minCoeff returns the first minimum, so ties go to the lowest index.
  column_variance(stats).minCoeff(&n.embed_dim_index);
  return n;
}

Eigen::VectorXd background_similarity(const ScoreNormalizer& n, const DescriptorMatrix& queries) {
  if (queries.cols() != n.training_vectors.cols()) {
    throw DimError("query dimension " + std::to_string(queries.cols()) + " differs from training dimension " +
                   std::to_string(n.training_vectors.cols()));
  }
  DescriptorMatrix zeroed = queries;
  zeroed.col(n.embed_dim_index).setZero();
  const Eigen::MatrixXd sims = similarity_block(zeroed, n.training_vectors);
  Eigen::VectorXd out(sims.rows());
  std::vector<double> row(static_cast<std::size_t>(sims.cols()));
  const auto kth = static_cast<std::ptrdiff_t>(n.k - 1);
  for (Eigen::Index i = 0; i < sims.rows(); ++i) {
    Eigen::Map<Eigen::RowVectorXd>(row.data(), sims.cols()) = sims.row(i);
    std::nth_element(row.begin(), row.begin() + kth, row.end(), std::greater<>());
    out(i) = row[static_cast<std::size_t>(kth)];
  }
  return out;
}

NormalizedSets apply_normalizer(const ScoreNormalizer& n, std::span<const DescriptorSet> queries,
                                std::span<const DescriptorSet> references) {
  const Eigen::Index dim = n.training_vectors.cols();
  for (const auto* group : {&queries, &references}) {
    for (const auto& s : *group) {
      if (s.dim() != dim) {
        throw DimError("descriptor dimension " + std::to_string(s.dim()) + " of " + s.video().str() +
                       " differs from normalizer dimension " + std::to_string(dim));
      }
    }
  }
  NormalizedSets out;
  out.queries.reserve(queries.size());
  for (const auto& q : queries) {
    const Eigen::VectorXd bg = background_similarity(n, q.vectors());
    DescriptorMatrix v = q.vectors();
    v.col(n.embed_dim_index) = (-n.beta * bg).cast<float>();
    out.queries.emplace_back(q.video(), std::vector<double>(q.timestamps().begin(), q.timestamps().end()),
                             std::move(v));
  }
  out.references.reserve(references.size());
  for (const auto& r : references) {
    DescriptorMatrix v = r.vectors();
    v.col(n.embed_dim_index).setOnes();
    out.references.emplace_back(r.video(), std::vector<double>(r.timestamps().begin(), r.timestamps().end()),
                                std::move(v));
  }
  return out;
}

RowNormalizationResult normalize_descriptors(std::span<const DescriptorSet> sets, RowNormalization mode) {
  RowNormalizationResult out;
  out.sets.reserve(sets.size());
  for (const auto& s : sets) {
    DescriptorMatrix v = s.vectors();
    if (mode == RowNormalization::L2) out.zero_rows += normalize_rows(v);
    out.sets.emplace_back(s.video(), std::vector<double>(s.timestamps().begin(), s.timestamps().end()),
                          std::move(v));
  }
  return out;
}

}  // namespace vcd
