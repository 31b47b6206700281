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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vcd/errors.hpp"
#include "vcd/io.hpp"

using namespace vcd;
using vcd::testing::qid;
using vcd::testing::rid;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vcd_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path file(const std::string& name) const { return dir_ / name; }

  fs::path write_text(const std::string& name, const std::string& text) const {
    std::ofstream(file(name), std::ios::binary) << text;
    return file(name);
  }

  std::string read_text(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(IoTest, SingleFrameFileSize) {
  DescriptorMatrix m(1, 2);
  m << 1.0f, 0.0f;
  const std::vector<DescriptorSet> sets{DescriptorSet(qid(1), {0.0}, m)};
  write_descriptors(file("a.vcbd"), sets);
  const std::size_t id_len = std::string("Q1").size();
  EXPECT_EQ(fs::file_size(file("a.vcbd")), 4u + 4 + 4 + 4 + (2 + id_len) + 4 + 4 + 8);
}

TEST_F(IoTest, DescriptorRoundTrip) {
  vcd::testing::Rng rng(42);
  std::vector<DescriptorSet> sets;
  for (long i = 0; i < 100; ++i) {
    auto s = vcd::testing::random_set(rng, i % 2 ? qid(i) : rid(i), rng.integer(1, 8), 12);
    std::vector<double> ts(s.timestamps().begin(), s.timestamps().end());
    for (auto& t : ts) t = t * 0.5 + 0.25;  // f32-exact values
    sets.emplace_back(s.video(), std::move(ts), s.vectors());
  }
  write_descriptors(file("r.vcbd"), sets);
  const auto back = read_descriptors(file("r.vcbd"));
  ASSERT_EQ(back.size(), sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EXPECT_EQ(back[i].video(), sets[i].video());
    EXPECT_TRUE(std::equal(back[i].timestamps().begin(), back[i].timestamps().end(), sets[i].timestamps().begin(),
                           sets[i].timestamps().end()));
    EXPECT_EQ(back[i].vectors(), sets[i].vectors());
  }
  // Writing the re-read sets reproduces the file byte for byte.
  write_descriptors(file("r2.vcbd"), back);
  EXPECT_EQ(read_text(file("r.vcbd")), read_text(file("r2.vcbd")));
}

TEST_F(IoTest, NonDyadicTimestampsSurviveWithinFloatPrecision) {
  DescriptorMatrix m = DescriptorMatrix::Ones(3, 2);
  const std::vector<DescriptorSet> sets{DescriptorSet(rid(1), {0.1, 1.7, 123.456}, m)};
  write_descriptors(file("t.vcbd"), sets);
  const auto back = read_descriptors(file("t.vcbd"));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(back[0].timestamps()[i], sets[0].timestamps()[i], 1e-6 * sets[0].timestamps()[i]);
  }
}

TEST_F(IoTest, EmptyDescriptorFile) {
  write_descriptors(file("e.vcbd"), std::vector<DescriptorSet>{});
  EXPECT_EQ(fs::file_size(file("e.vcbd")), 16u);
  EXPECT_TRUE(read_descriptors(file("e.vcbd")).empty());
}

TEST_F(IoTest, MixedDimensionsRejected) {
  const std::vector<DescriptorSet> sets{DescriptorSet(qid(1), {0.0}, DescriptorMatrix::Ones(1, 2)),
                                        DescriptorSet(qid(2), {0.0}, DescriptorMatrix::Ones(1, 3))};
  EXPECT_THROW(write_descriptors(file("m.vcbd"), sets), FormatError);
}

TEST_F(IoTest, CorruptDescriptorFiles) {
  const std::vector<DescriptorSet> sets{DescriptorSet(qid(1), {0.0, 1.0}, DescriptorMatrix::Ones(2, 4))};
  write_descriptors(file("ok.vcbd"), sets);
  const std::string good = read_text(file("ok.vcbd"));

  std::string bad_magic = good;
  bad_magic.replace(0, 4, "XXXX");
  EXPECT_THROW(read_descriptors(write_text("magic.vcbd", bad_magic)), FormatError);

  std::string bad_version = good;
  bad_version[4] = 9;
  EXPECT_THROW(read_descriptors(write_text("version.vcbd", bad_version)), FormatError);

  // Every proper prefix of a valid file is rejected, as is trailing junk.
  for (std::size_t n = 0; n < good.size(); ++n) {
    EXPECT_THROW(read_descriptors(write_text("trunc.vcbd", good.substr(0, n))), FormatError) << n;
  }
  EXPECT_THROW(read_descriptors(write_text("tail.vcbd", good + "x")), FormatError);

  // A header claiming an absurd video count fails before allocating for it.
  std::string huge = good;
  huge[12] = huge[13] = huge[14] = huge[15] = '\xff';
  EXPECT_THROW(read_descriptors(write_text("huge.vcbd", huge)), FormatError);
}

TEST_F(IoTest, MissingFileIsIoError) {
  EXPECT_THROW(read_descriptors(file("absent.vcbd")), IoError);
  EXPECT_THROW(read_ground_truth(file("absent.csv")), IoError);
}

TEST_F(IoTest, GroundTruthRows) {
  const auto p = write_text("gt.csv",
                            "query_id,ref_id,query_start,query_end,ref_start,ref_end\n"
                            "Q1,R1,0,10,5,15\n"
                            "Q1,R1,20,30,25,35\n"
                            "Q2,R4,1.5,2.5,0,1\n");
  const auto gt = read_ground_truth(p);
  ASSERT_EQ(gt.boxes().size(), 3u);
  EXPECT_EQ(gt.boxes()[0].box, SegmentBox(0, 10, 5, 15));
  EXPECT_EQ(gt.pair_set().size(), 2u);

  write_ground_truth(file("gt2.csv"), gt);
  EXPECT_EQ(read_text(file("gt2.csv")), read_text(p));
}

TEST_F(IoTest, GroundTruthDegenerateBoxNamesLine) {
  const auto p = write_text("gt.csv",
                            "query_id,ref_id,query_start,query_end,ref_start,ref_end\n"
                            "Q1,R1,0,10,5,15\n"
                            "Q1,R1,3,3,5,15\n");
  try {
    read_ground_truth(p);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST_F(IoTest, CsvStructureErrors) {
  EXPECT_THROW(read_ground_truth(write_text("h.csv", "q,r,a,b,c,d\nQ1,R1,0,1,0,1\n")), FormatError);
  EXPECT_THROW(read_ground_truth(write_text("c.csv",
                                            "query_id,ref_id,query_start,query_end,ref_start,ref_end\nQ1,R1,0,1\n")),
               FormatError);
  EXPECT_THROW(read_detection_predictions(write_text("n.csv", "query_id,ref_id,score\nQ1,R1,abc\n")), FormatError);
  EXPECT_THROW(read_detection_predictions(write_text("k.csv", "query_id,ref_id,score\nR1,Q1,0.5\n")),
               ValidationError);
  EXPECT_THROW(read_detection_predictions(write_text("e.csv", "")), FormatError);
}

TEST_F(IoTest, DetectionRows) {
  const auto p = write_text("d.csv", "query_id,ref_id,score\nQ1,R1,0.9\nQ1,R1,0.4\n");
  const auto preds = read_detection_predictions(p);
  ASSERT_EQ(preds.size(), 2u);
  EXPECT_EQ(preds[0].query, qid(1));
  EXPECT_EQ(preds[0].reference, rid(1));
  EXPECT_DOUBLE_EQ(preds[0].score, 0.9);
  EXPECT_DOUBLE_EQ(preds[1].score, 0.4);
}

TEST_F(IoTest, NonFiniteScoreRejected) {
  EXPECT_THROW(read_detection_predictions(write_text("d.csv", "query_id,ref_id,score\nQ1,R1,NaN\n")),
               ValidationError);
  EXPECT_THROW(read_detection_predictions(write_text("i.csv", "query_id,ref_id,score\nQ1,R1,inf\n")),
               ValidationError);
}

TEST_F(IoTest, LocalizationRoundTripIsExact) {
  vcd::testing::Rng rng(8);
  std::vector<LocalizationPrediction> preds;
  for (int i = 0; i < 50; ++i) {
    const double qs = rng.uniform(0, 100), rs = rng.uniform(0, 100);
    preds.emplace_back(qid(i % 7), rid(i % 5), SegmentBox(qs, qs + rng.uniform(0.1, 9), rs, rs + rng.uniform(0.1, 9)),
                       rng.normal());
  }
  write_localization_predictions(file("l.csv"), preds);
  const auto back = read_localization_predictions(file("l.csv"));
  ASSERT_EQ(back.size(), preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    EXPECT_EQ(back[i].query, preds[i].query);
    EXPECT_EQ(back[i].box, preds[i].box);
    EXPECT_EQ(back[i].score, preds[i].score);
  }
  EXPECT_THROW(read_localization_predictions(write_text(
                   "bad.csv", "query_id,ref_id,query_start,query_end,ref_start,ref_end,score\nQ1,R1,5,4,0,1,0.3\n")),
               ValidationError);
}

TEST_F(IoTest, TagsPairsDurationsRoundTrip) {
  const std::vector<TransformTag> tags{TransformTag(qid(1), {"crop", "speed_2"}), TransformTag(qid(2), {})};
  write_tags(file("t.csv"), tags);
  const auto t = read_tags(file("t.csv"));
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].tags, tags[0].tags);
  EXPECT_EQ(t[1].n_transforms, 0u);

  const std::vector<VideoPair> pairs{{qid(1), rid(2)}, {qid(3), rid(4)}};
  write_pairs(file("p.csv"), pairs);
  EXPECT_EQ(read_pairs(file("p.csv")), pairs);

  const std::map<VideoId, double> durations{{qid(1), 12.5}, {rid(3), 60}};
  write_durations(file("du.csv"), durations);
  EXPECT_EQ(read_durations(file("du.csv")), durations);
}

TEST_F(IoTest, PairsFileMayCarryExtraColumns) {
  const auto p = write_text("p.csv", "query_id,ref_id,score\nQ1,R1,0.9\n");
  const auto pairs = read_pairs(p);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].reference, rid(1));
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(10), "10");
  vcd::testing::Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * 1e3;
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

namespace {

DescriptorSet frames(VideoId id, long n, long dim) {
  std::vector<double> ts(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) ts[static_cast<std::size_t>(i)] = static_cast<double>(i);
  return DescriptorSet(std::move(id), std::move(ts), DescriptorMatrix::Zero(n, dim));
}

}  // namespace

TEST(DescriptorBudget, MaximumDimensionAtOneFramePerSecond) {
  const std::vector<DescriptorSet> sets{frames(qid(1), 30, 512)};
  const auto report = validate_descriptor_budget(sets, {{qid(1), 30.0}});
  EXPECT_TRUE(report.passed);
  EXPECT_TRUE(report.violations.empty());
}

TEST(DescriptorBudget, DimensionAboveLimitFails) {
  const std::vector<DescriptorSet> sets{frames(qid(1), 30, 513)};
  const auto report = validate_descriptor_budget(sets, {{qid(1), 30.0}});
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.violations.size(), 1u);
}

TEST(DescriptorBudget, AggregateRateWithPerVideoAdvisory) {
  const std::vector<DescriptorSet> sets{frames(qid(1), 15, 8), frames(qid(2), 25, 8)};
  const auto report = validate_descriptor_budget(sets, {{qid(1), 10.0}, {qid(2), 30.0}});
  EXPECT_TRUE(report.passed);
  EXPECT_EQ(report.total_descriptors, 40u);
  EXPECT_DOUBLE_EQ(report.total_seconds, 40.0);
  ASSERT_EQ(report.over_rate_videos.size(), 1u);
  EXPECT_EQ(report.over_rate_videos[0], qid(1));
}

TEST(DescriptorBudget, AggregateRateExceeded) {
  const std::vector<DescriptorSet> sets{frames(qid(1), 41, 8)};
  EXPECT_FALSE(validate_descriptor_budget(sets, {{qid(1), 40.0}}).passed);
}

TEST(DescriptorBudget, MissingDuration) {
  const std::vector<DescriptorSet> sets{frames(qid(1), 3, 8)};
  EXPECT_THROW(validate_descriptor_budget(sets, {{qid(2), 40.0}}), ValidationError);
}
