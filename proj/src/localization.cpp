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

#include "vcd/localization.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "vcd/errors.hpp"
#include "vcd/linalg.hpp"

namespace vcd {

void TNConfig::validate() const {
  if (!(max_time_gap > 0.0)) throw ValidationError("max_time_gap must be positive");
  if (min_path_length < 1) throw ValidationError("min_path_length must be at least 1");
  if (!std::isfinite(similarity_threshold) || !std::isfinite(offset)) {
    throw ValidationError("similarity_threshold and offset must be finite");
  }
}

SimilarityMatrix similarity_matrix(const DescriptorSet& query, const DescriptorSet& reference) {
  if (query.dim() != reference.dim()) {
    throw DimError("cannot compare " + query.video().str() + " (dim " + std::to_string(query.dim()) + ") with " +
                   reference.video().str() + " (dim " + std::to_string(reference.dim()) + ")");
  }
  return {query.video(),
          reference.video(),
          {query.timestamps().begin(), query.timestamps().end()},
          {reference.timestamps().begin(), reference.timestamps().end()},
          similarity_block(query.vectors(), reference.vectors())};
}

namespace {

struct Node {
  Eigen::Index i;
  Eigen::Index j;
  double weight;
};

// Index of the first element whose time is within `gap` of times[k], for every k.
std::vector<Eigen::Index> window_starts(const std::vector<double>& times, double gap) {
  std::vector<Eigen::Index> starts(times.size());
  Eigen::Index lo = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    while (times[k] - times[static_cast<std::size_t>(lo)] > gap) ++lo;
    starts[k] = lo;
  }
  return starts;
}

bool before(const Node& a, const Node& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; }

}  // namespace

std::vector<LocalizationPrediction> temporal_network_localize(const SimilarityMatrix& s, const TNConfig& cfg) {
  cfg.validate();
  const auto rows = s.values.rows();
  const auto cols = s.values.cols();
  if (static_cast<std::size_t>(rows) != s.query_times.size() ||
      static_cast<std::size_t>(cols) != s.ref_times.size()) {
    throw ValidationError("similarity matrix shape does not match its timestamps");
  }

  // Row-major (i, j) order is a topological order: edges need a later query time.
  std::vector<Node> nodes;
  Eigen::MatrixXi id = Eigen::MatrixXi::Constant(rows, cols, -1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double w = s.values(i, j) + cfg.offset;
      if (w > cfg.similarity_threshold) {
        id(i, j) = static_cast<int>(nodes.size());
        nodes.push_back({i, j, w});
      }
    }
  }

  const auto q_lo = window_starts(s.query_times, cfg.max_time_gap);
  const auto r_lo = window_starts(s.ref_times, cfg.max_time_gap);
  const double q_period = median_period(s.query_times);
  const double r_period = median_period(s.ref_times);

  std::vector<char> active(nodes.size(), 1);
  std::vector<double> best(nodes.size());
  std::vector<int> prev(nodes.size());
  std::vector<int> start(nodes.size());

  std::vector<LocalizationPrediction> out;
  for (std::size_t round = 0; round < cfg.max_paths_per_pair; ++round) {
    int end = -1;
    for (std::size_t v = 0; v < nodes.size(); ++v) {
      if (!active[v]) continue;
      const auto& n = nodes[v];
      int pred = -1;
      for (Eigen::Index i0 = q_lo[static_cast<std::size_t>(n.i)]; i0 < n.i; ++i0) {
        if (!(s.query_times[static_cast<std::size_t>(i0)] < s.query_times[static_cast<std::size_t>(n.i)])) break;
        for (Eigen::Index j0 = r_lo[static_cast<std::size_t>(n.j)]; j0 < cols; ++j0) {
          if (!(s.ref_times[static_cast<std::size_t>(j0)] < s.ref_times[static_cast<std::size_t>(n.j)])) break;
          const int u = id(i0, j0);
          if (u < 0 || !active[static_cast<std::size_t>(u)]) continue;
          const auto uu = static_cast<std::size_t>(u);
          if (best[uu] <= 0.0) continue;
          if (pred < 0) {
            pred = u;
            continue;
          }
          const auto pp = static_cast<std::size_t>(pred);
          if (best[uu] > best[pp] ||
              (best[uu] == best[pp] && before(nodes[static_cast<std::size_t>(start[uu])],
                                              nodes[static_cast<std::size_t>(start[pp])]))) {
            pred = u;
          }
        }
      }
      prev[v] = pred;
      if (pred < 0) {
        best[v] = n.weight;
        start[v] = static_cast<int>(v);
      } else {
        best[v] = n.weight + best[static_cast<std::size_t>(pred)];
        start[v] = start[static_cast<std::size_t>(pred)];
      }
      if (end < 0) {
        end = static_cast<int>(v);
        continue;
      }
      const auto e = static_cast<std::size_t>(end);
      const auto& sv = nodes[static_cast<std::size_t>(start[v])];
      const auto& se = nodes[static_cast<std::size_t>(start[e])];
      // Nodes are visited in (i, j) order, so on a full tie the earlier end wins.
      if (best[v] > best[e] || (best[v] == best[e] && before(sv, se))) end = static_cast<int>(v);
    }
    if (end < 0) break;

    std::vector<std::size_t> path;
    for (int v = end; v >= 0; v = prev[static_cast<std::size_t>(v)]) path.push_back(static_cast<std::size_t>(v));
    for (auto v : path) active[v] = 0;
    if (path.size() < cfg.min_path_length) continue;

    const auto& first = nodes[path.back()];
    const auto& last = nodes[path.front()];
    double score = -std::numeric_limits<double>::infinity();
    for (auto v : path) score = std::max(score, s.values(nodes[v].i, nodes[v].j));
    const SegmentBox box(s.query_times[static_cast<std::size_t>(first.i)],
                         s.query_times[static_cast<std::size_t>(last.i)] + q_period,
                         s.ref_times[static_cast<std::size_t>(first.j)],
                         s.ref_times[static_cast<std::size_t>(last.j)] + r_period);
    out.emplace_back(s.query, s.reference, box, score);
  }
  return out;
}

std::vector<LocalizationPrediction> localize_candidates(std::span<const VideoPair> candidates,
                                                        std::span<const DescriptorSet> queries,
                                                        std::span<const DescriptorSet> references,
                                                        const TNConfig& cfg, unsigned threads) {
  cfg.validate();
  std::unordered_map<VideoId, const DescriptorSet*> by_id;
  for (const auto& q : queries) by_id.emplace(q.video(), &q);
  for (const auto& r : references) by_id.emplace(r.video(), &r);

  const std::set<VideoPair> unique(candidates.begin(), candidates.end());
  std::vector<std::pair<const DescriptorSet*, const DescriptorSet*>> jobs;
  jobs.reserve(unique.size());
  for (const auto& p : unique) {
    const auto q = by_id.find(p.query);
    const auto r = by_id.find(p.reference);
    if (q == by_id.end()) throw ValidationError("no descriptors for query " + p.query.str());
    if (r == by_id.end()) throw ValidationError("no descriptors for reference " + p.reference.str());
    jobs.emplace_back(q->second, r->second);
  }

  std::vector<std::vector<LocalizationPrediction>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        results[k] = temporal_network_localize(similarity_matrix(*jobs[k].first, *jobs[k].second), cfg);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<LocalizationPrediction> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  std::sort(out.begin(), out.end(),
            [](const LocalizationPrediction& a, const LocalizationPrediction& b) { return ranks_before(a, b); });
  return out;
}

}  // namespace vcd
