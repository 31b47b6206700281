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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vcd/errors.hpp"
#include "vcd/linalg.hpp"
#include "vcd/search.hpp"

using namespace vcd;
using vcd::testing::qid;
using vcd::testing::random_set;
using vcd::testing::rid;
using vcd::testing::Rng;
using vcd::testing::tid;

namespace {

DescriptorSet rows(VideoId id, std::initializer_list<std::initializer_list<float>> values) {
  const long n = static_cast<long>(values.size());
  const long dim = static_cast<long>(values.begin()->size());
  DescriptorMatrix m(n, dim);
  long r = 0;
  for (const auto& row : values) {
    long c = 0;
    for (float v : row) m(r, c++) = v;
    ++r;
  }
  std::vector<double> ts(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) ts[static_cast<std::size_t>(i)] = static_cast<double>(i);
  return DescriptorSet(std::move(id), std::move(ts), std::move(m));
}

void expect_same(const std::vector<FrameMatch>& got, const std::vector<FrameMatch>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].query, want[i].query) << i;
    EXPECT_EQ(got[i].query_frame, want[i].query_frame) << i;
    EXPECT_EQ(got[i].reference, want[i].reference) << i;
    EXPECT_EQ(got[i].ref_frame, want[i].ref_frame) << i;
    EXPECT_EQ(got[i].similarity, want[i].similarity) << i;
  }
}

}  // namespace

TEST(GlobalTopk, SingleQueryFrame) {
  const std::vector<DescriptorSet> q{rows(qid(1), {{1, 0}})};
  const std::vector<DescriptorSet> r{rows(rid(1), {{1, 0}, {0, 1}})};
  const auto m = global_topk_pairs(q, r, 1);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].ref_frame, 0);
  EXPECT_EQ(m[0].similarity, 1.0);
}

TEST(GlobalTopk, KAboveTotalReturnsEverythingSorted) {
  Rng rng(1);
  const std::vector<DescriptorSet> q{random_set(rng, qid(1), 3, 4), random_set(rng, qid(2), 2, 4)};
  const std::vector<DescriptorSet> r{random_set(rng, rid(1), 4, 4)};
  const auto m = global_topk_pairs(q, r, 1000);
  EXPECT_EQ(m.size(), 20u);
  EXPECT_TRUE(std::is_sorted(m.begin(), m.end(), [](const FrameMatch& a, const FrameMatch& b) {
    return ranks_before(a, b);
  }));
}

TEST(GlobalTopk, MatchesBruteForce) {
  Rng rng(7);
  const std::vector<DescriptorSet> q{random_set(rng, qid(1), 20, 8)};
  const std::vector<DescriptorSet> r{random_set(rng, rid(1), 50, 8)};
  expect_same(global_topk_pairs(q, r, 37), vcd::testing::brute_topk(q, r, 37));
}

TEST(GlobalTopk, TiesBrokenLexicographicallyAndThreadInvariant) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DescriptorSet> q, r;
    for (long i = 0; i < rng.integer(1, 6); ++i) q.push_back(random_set(rng, qid(i * 7 + 3), rng.integer(1, 6), 3, true));
    for (long i = 0; i < rng.integer(1, 6); ++i) r.push_back(random_set(rng, rid(i * 5 + 1), rng.integer(1, 6), 3, true));
    std::shuffle(q.begin(), q.end(), rng.engine());
    std::shuffle(r.begin(), r.end(), rng.engine());
    const auto k = static_cast<std::size_t>(rng.integer(1, 60));
    const auto want = vcd::testing::brute_topk(q, r, k);
    for (unsigned t : {1u, 2u, 3u, 8u}) expect_same(global_topk_pairs(q, r, k, t), want);
  }
}

TEST(GlobalTopk, Errors) {
  Rng rng(1);
  const std::vector<DescriptorSet> q{random_set(rng, qid(1), 2, 4)};
  const std::vector<DescriptorSet> r3{random_set(rng, rid(1), 2, 3)};
  const std::vector<DescriptorSet> r4{random_set(rng, rid(1), 2, 4), random_set(rng, rid(1), 2, 4)};
  EXPECT_THROW(global_topk_pairs(q, r3, 5), DimError);
  EXPECT_THROW(global_topk_pairs(q, r4, 0), ValidationError);
  EXPECT_THROW(global_topk_pairs(q, r4, 5), ValidationError);
}

TEST(GlobalTopk, EmptyInputs) {
  Rng rng(1);
  const std::vector<DescriptorSet> q{random_set(rng, qid(1), 2, 4)};
  EXPECT_TRUE(global_topk_pairs(q, {}, 5).empty());
  EXPECT_TRUE(global_topk_pairs({}, q, 5).empty());
}

TEST(DetectionScores, MaxPerPair) {
  const std::vector<FrameMatch> m{{qid(1), 0, rid(1), 0, 0.9}, {qid(1), 1, rid(1), 1, 0.4}, {qid(1), 0, rid(2), 3, 0.7}};
  const auto d = detection_scores(m);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].reference, rid(1));
  EXPECT_EQ(d[0].score, 0.9);
  EXPECT_EQ(d[1].reference, rid(2));
  EXPECT_EQ(d[1].score, 0.7);
  EXPECT_TRUE(detection_scores({}).empty());
}

TEST(DetectionScores, GroupByMaxOracleAndPermutationInvariance) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<FrameMatch> m;
    for (int i = 0; i < 80; ++i) {
      m.push_back({qid(rng.integer(0, 4)), 0, rid(rng.integer(0, 4)), 0, static_cast<double>(rng.integer(0, 20)) / 4});
    }
    const auto d = detection_scores(m);
    const auto oracle = vcd::testing::group_max(m);
    ASSERT_EQ(d.size(), oracle.size());
    for (const auto& p : d) EXPECT_EQ(p.score, oracle.at({p.query.str(), p.reference.str()}));

    std::shuffle(m.begin(), m.end(), rng.engine());
    const auto d2 = detection_scores(m);
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_EQ(d2[i].pair(), d[i].pair());
      EXPECT_EQ(d2[i].score, d[i].score);
    }
  }
}

TEST(FitNormalizer, ConstantDimensionWins) {
  Rng rng(5);
  auto t = random_set(rng, tid(1), 30, 6);
  DescriptorMatrix v = t.vectors();
  v.col(3).setConstant(0.25f);
  const std::vector<DescriptorSet> training{DescriptorSet(tid(1), {t.timestamps().begin(), t.timestamps().end()}, v)};
  const auto n = fit_normalizer(training, 1, 1.2, training);
  EXPECT_EQ(n.embed_dim_index, 3);
  EXPECT_EQ(n.k, 1u);
  EXPECT_EQ(n.beta, 1.2);
  EXPECT_EQ(n.training_vectors.rows(), 30);
}

TEST(FitNormalizer, VarianceArgminMatchesTwoPassOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<DescriptorSet> stats{random_set(rng, tid(1), 25, 7), random_set(rng, tid(2), 12, 7)};
    Eigen::Index best = 0;
    double best_var = INFINITY;
    for (Eigen::Index c = 0; c < 7; ++c) {
      double sum = 0.0;
      long n = 0;
      for (const auto& s : stats) {
        for (long r = 0; r < s.size(); ++r, ++n) sum += s.vectors()(r, c);
      }
      const double mean = sum / static_cast<double>(n);
      double ss = 0.0;
      for (const auto& s : stats) {
        for (long r = 0; r < s.size(); ++r) ss += (s.vectors()(r, c) - mean) * (s.vectors()(r, c) - mean);
      }
      if (ss / static_cast<double>(n) < best_var) {
        best_var = ss / static_cast<double>(n);
        best = c;
      }
    }
    EXPECT_EQ(fit_normalizer(stats, 1, 1.2, stats).embed_dim_index, best);
  }
}

TEST(FitNormalizer, Errors) {
  Rng rng(1);
  const std::vector<DescriptorSet> t{random_set(rng, tid(1), 3, 4)};
  const std::vector<DescriptorSet> not_training{random_set(rng, rid(1), 3, 4)};
  EXPECT_THROW(fit_normalizer({}, 1, 1.2, t), ValidationError);
  EXPECT_THROW(fit_normalizer(t, 0, 1.2, t), ValidationError);
  EXPECT_THROW(fit_normalizer(t, 4, 1.2, t), ValidationError);
  EXPECT_THROW(fit_normalizer(t, 1, -0.1, t), ValidationError);
  EXPECT_THROW(fit_normalizer(not_training, 1, 1.2, not_training), ValidationError);
  EXPECT_THROW(fit_normalizer(t, 1, 1.2, {}), ValidationError);
}

TEST(ApplyNormalizer, ThreeTrainingVectorsKOne) {
  const std::vector<DescriptorSet> training{rows(tid(1), {{1, 0, 0.5f}, {0, 1, 0.5f}, {0.6f, 0.8f, 0.5f}})};
  const auto n = fit_normalizer(training, 1, 1.2, training);
  ASSERT_EQ(n.embed_dim_index, 2);
  const std::vector<DescriptorSet> q{rows(qid(1), {{1, 0, 9}, {0, 2, 9}})};
  const std::vector<DescriptorSet> r{rows(rid(1), {{1, 1, 9}})};
  const auto out = apply_normalizer(n, q, r);

  // s_1 is the largest inner product with the zeroed query: 1.0 and 2.0.
  EXPECT_NEAR(out.queries[0].vectors()(0, 2), -1.2 * 1.0, 1e-6);
  EXPECT_NEAR(out.queries[0].vectors()(1, 2), -1.2 * 2.0, 1e-6);
  EXPECT_EQ(out.references[0].vectors()(0, 2), 1.0f);
  EXPECT_EQ(out.queries[0].vectors()(0, 0), 1.0f);
  EXPECT_EQ(out.references[0].vectors()(0, 1), 1.0f);
}

TEST(ApplyNormalizer, EmbeddingReproducesSubtraction) {
  Rng rng(99);
  for (std::size_t k : {1u, 3u}) {
    for (double beta : {0.0, 1.2}) {
      const std::vector<DescriptorSet> training{random_set(rng, tid(1), 40, 10)};
      const std::vector<DescriptorSet> q{random_set(rng, qid(1), 6, 10)};
      const std::vector<DescriptorSet> r{random_set(rng, rid(1), 6, 10)};
      const auto n = fit_normalizer(training, k, beta, training);
      const auto out = apply_normalizer(n, q, r);
      for (long i = 0; i < 6; ++i) {
        // Exhaustive k-th largest similarity of the zeroed query row.
        Eigen::RowVectorXf zq = q[0].vectors().row(i);
        zq(n.embed_dim_index) = 0;
        std::vector<double> sims;
        for (long t = 0; t < 40; ++t) {
          double s = 0;
          for (long c = 0; c < 10; ++c) s += double(zq(c)) * double(training[0].vectors()(t, c));
          sims.push_back(s);
        }
        std::sort(sims.rbegin(), sims.rend());
        const double sk = sims[k - 1];
        for (long j = 0; j < 6; ++j) {
          Eigen::RowVectorXf zr = r[0].vectors().row(j);
          zr(n.embed_dim_index) = 0;
          const double base = inner(zq, zr);
          const double got = inner(out.queries[0].vectors().row(i), out.references[0].vectors().row(j));
          if (beta == 0.0) {
            EXPECT_EQ(got, base);
          } else {
            EXPECT_NEAR(got, base - beta * sk, 1e-5);
          }
        }
      }
    }
  }
}

TEST(ApplyNormalizer, DimMismatch) {
  Rng rng(1);
  const std::vector<DescriptorSet> training{random_set(rng, tid(1), 5, 4)};
  const auto n = fit_normalizer(training, 1, 1.2, training);
  const std::vector<DescriptorSet> q{random_set(rng, qid(1), 2, 5)};
  EXPECT_THROW(apply_normalizer(n, q, {}), DimError);
  EXPECT_THROW(apply_normalizer(n, {}, q), DimError);
}

TEST(L2Normalize, UnitRowsAndZeroCount) {
  const std::vector<DescriptorSet> s{rows(qid(1), {{3, 4}, {0, 0}})};
  const auto out = l2_normalize(s);
  EXPECT_EQ(out.zero_rows, 1u);
  EXPECT_FLOAT_EQ(out.sets[0].vectors()(0, 0), 0.6f);
  EXPECT_FLOAT_EQ(out.sets[0].vectors()(0, 1), 0.8f);
  EXPECT_EQ(out.sets[0].vectors()(1, 0), 0.0f);

  const auto passthrough = normalize_descriptors(s, RowNormalization::None);
  EXPECT_EQ(passthrough.sets[0].vectors(), s[0].vectors());
  EXPECT_EQ(passthrough.zero_rows, 0u);
}

TEST(L2Normalize, NormsAreZeroOrOne) {
  Rng rng(4);
  std::vector<DescriptorSet> s;
  for (long i = 0; i < 10; ++i) s.push_back(random_set(rng, rid(i), 8, 16, i % 3 == 0));
  for (const auto& set : l2_normalize(s).sets) {
    for (long r = 0; r < set.size(); ++r) {
      const double norm = set.vectors().row(r).cast<double>().norm();
      EXPECT_TRUE(std::abs(norm) < 1e-6 || std::abs(norm - 1) < 1e-6) << norm;
    }
  }
}
