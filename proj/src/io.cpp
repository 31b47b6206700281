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

#include "vcd/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "vcd/errors.hpp"

namespace vcd {

namespace {

// ---------------------------------------------------------------------------
// binary helpers

class ByteWriter {
 public:
  void u16(std::uint16_t v) {
    put(static_cast<std::uint8_t>(v & 0xff));
    put(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) put(static_cast<std::uint8_t>((v >> shift) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  const std::vector<char>& data() const { return buf_; }

 private:
  void put(std::uint8_t b) { buf_.push_back(static_cast<char>(b)); }
  std::vector<char> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<char>& buf, std::string source) : buf_(buf), source_(std::move(source)) {}

  std::size_t remaining() const { return buf_.size() - pos_; }

  void need(std::size_t n, std::string_view what) const {
    if (remaining() < n) {
      throw FormatError(source_ + ": truncated while reading " + std::string(what) + " (need " +
                        std::to_string(n) + " bytes, " + std::to_string(remaining()) + " left)");
    }
  }
  std::uint16_t u16(std::string_view what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>(byte(0) | (byte(1) << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(std::string_view what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(i)) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(std::string_view what) { return std::bit_cast<float>(u32(what)); }
  std::string bytes(std::size_t n, std::string_view what) {
    need(n, what);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::uint32_t byte(std::size_t offset) const {
    return static_cast<std::uint8_t>(buf_[pos_ + offset]);
  }
  const std::vector<char>& buf_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return buf;
}

void spit(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

// ---------------------------------------------------------------------------
// CSV helpers

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

struct CsvRow {
  std::size_t line;  // 1-based, header is line 1
  std::vector<std::string_view> fields;
};

/// Reads a CSV whose header must begin with `expected`. Holds the text so the
/// returned views stay valid.
class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, std::span<const std::string_view> expected, bool allow_extra = false)
      : source_(path.string()) {
    const auto raw = slurp(path);
    text_.assign(raw.begin(), raw.end());
    std::string_view rest = text_;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      auto fields = split(line);
      if (!header_seen) {
        header_seen = true;
        const bool width_ok = allow_extra ? fields.size() >= expected.size() : fields.size() == expected.size();
        bool names_ok = width_ok;
        for (std::size_t i = 0; names_ok && i < expected.size(); ++i) names_ok = fields[i] == expected[i];
        if (!names_ok) throw FormatError(source_ + ": unexpected header '" + std::string(line) + "'");
        width_ = fields.size();
        continue;
      }
      if (fields.size() != width_) {
        throw FormatError(source_ + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                          " fields, expected " + std::to_string(width_));
      }
      rows_.push_back({line_no, std::move(fields)});
    }
    if (!header_seen) throw FormatError(source_ + ": missing header");
  }

  const std::vector<CsvRow>& rows() const { return rows_; }

  std::string where(const CsvRow& row) const { return source_ + ": line " + std::to_string(row.line); }

  double number(const CsvRow& row, std::size_t col) const {
    const auto field = row.fields[col];
    double v = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || field.empty()) {
      throw FormatError(where(row) + ": '" + std::string(field) + "' is not a number");
    }
    return v;
  }

  std::size_t count(const CsvRow& row, std::size_t col) const {
    const auto field = row.fields[col];
    std::size_t v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || field.empty()) {
      throw FormatError(where(row) + ": '" + std::string(field) + "' is not a count");
    }
    return v;
  }

  VideoId id(const CsvRow& row, std::size_t col, VideoKind kind) const {
    try {
      return VideoId(kind, std::string(row.fields[col]));
    } catch (const ValidationError& e) {
      throw ValidationError(where(row) + ": " + e.what());
    }
  }

  VideoId any_id(const CsvRow& row, std::size_t col) const {
    try {
      return VideoId::parse(row.fields[col]);
    } catch (const ValidationError& e) {
      throw ValidationError(where(row) + ": " + e.what());
    }
  }

  SegmentBox box(const CsvRow& row, std::size_t col) const {
    const double qs = number(row, col), qe = number(row, col + 1);
    const double rs = number(row, col + 2), re = number(row, col + 3);
    try {
      return SegmentBox(qs, qe, rs, re);
    } catch (const ValidationError& e) {
      throw ValidationError(where(row) + ": " + e.what());
    }
  }

 private:
  std::string source_;
  std::string text_;
  std::size_t width_ = 0;
  std::vector<CsvRow> rows_;
};

constexpr std::string_view kGtHeader[] = {"query_id", "ref_id", "query_start", "query_end", "ref_start", "ref_end"};
constexpr std::string_view kDetHeader[] = {"query_id", "ref_id", "score"};
constexpr std::string_view kLocHeader[] = {"query_id",  "ref_id",  "query_start", "query_end",
                                           "ref_start", "ref_end", "score"};
constexpr std::string_view kTagHeader[] = {"query_id", "transforms", "n_transforms"};
constexpr std::string_view kPairHeader[] = {"query_id", "ref_id"};
constexpr std::string_view kDurationHeader[] = {"video_id", "duration"};

std::string join_header(std::span<const std::string_view> cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  return out;
}

void append_box(std::string& out, const SegmentBox& b) {
  out += format_number(b.query_start());
  out += ',';
  out += format_number(b.query_end());
  out += ',';
  out += format_number(b.ref_start());
  out += ',';
  out += format_number(b.ref_end());
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

// ---------------------------------------------------------------------------
// descriptors

void write_descriptors(const std::filesystem::path& path, std::span<const DescriptorSet> sets) {
  const Eigen::Index dim = sets.empty() ? 0 : sets.front().dim();
  for (const auto& s : sets) {
    if (s.dim() != dim) {
      throw FormatError("cannot store mixed dimensions (" + std::to_string(dim) + " and " +
                        std::to_string(s.dim()) + ") in one descriptor file");
    }
  }
  ByteWriter w;
  w.bytes(std::string_view(kDescriptorMagic, 4));
  w.u32(kDescriptorFormatVersion);
  w.u32(static_cast<std::uint32_t>(dim));
  w.u32(static_cast<std::uint32_t>(sets.size()));
  for (const auto& s : sets) {
    const auto& id = s.video().str();
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) throw FormatError("video id too long: " + id);
    w.u16(static_cast<std::uint16_t>(id.size()));
    w.bytes(id);
    w.u32(static_cast<std::uint32_t>(s.size()));
    for (double t : s.timestamps()) w.f32(static_cast<float>(t));
    const auto& v = s.vectors();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      for (Eigen::Index c = 0; c < v.cols(); ++c) w.f32(v(r, c));
    }
  }
  spit(path, std::string_view(w.data().data(), w.data().size()));
}

std::vector<DescriptorSet> read_descriptors(const std::filesystem::path& path) {
  const auto buf = slurp(path);
  ByteReader r(buf, path.string());
  const auto magic = r.bytes(4, "magic");
  if (std::memcmp(magic.data(), kDescriptorMagic, 4) != 0) throw FormatError(path.string() + ": bad magic");
  const auto version = r.u32("version");
  if (version != kDescriptorFormatVersion) {
    throw FormatError(path.string() + ": unsupported format version " + std::to_string(version));
  }
  const auto dim = r.u32("dim");
  const auto count = r.u32("video count");
  if (count > 0 && dim == 0) throw FormatError(path.string() + ": zero dimension");
  // Every video needs at least its id length and row count.
  if (static_cast<std::uint64_t>(count) * 6 > r.remaining()) {
    throw FormatError(path.string() + ": video count " + std::to_string(count) + " exceeds file size");
  }

  std::vector<DescriptorSet> sets;
  sets.reserve(count);
  for (std::uint32_t v = 0; v < count; ++v) {
    const auto id_len = r.u16("id length");
    auto id = r.bytes(id_len, "video id");
    const auto rows = r.u32("row count");
    const std::uint64_t row_bytes = 4ull * (1ull + dim);
    if (rows * row_bytes > r.remaining()) {
      throw FormatError(path.string() + ": truncated data for " + id + " (" + std::to_string(rows) + " rows)");
    }
    std::vector<double> timestamps(rows);
    for (auto& t : timestamps) t = r.f32("timestamp");
    DescriptorMatrix vectors(rows, dim);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t c = 0; c < dim; ++c) vectors(i, c) = r.f32("vector");
    }
    VideoId vid = [&] {
      try {
        return VideoId::parse(id);
      } catch (const ValidationError& e) {
        throw FormatError(path.string() + ": " + e.what());
      }
    }();
    sets.emplace_back(std::move(vid), std::move(timestamps), std::move(vectors));
  }
  if (r.remaining() != 0) {
    throw FormatError(path.string() + ": " + std::to_string(r.remaining()) + " trailing bytes");
  }
  return sets;
}

// ---------------------------------------------------------------------------
// CSV formats

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  CsvFile csv(path, kGtHeader);
  std::vector<GroundTruthBox> boxes;
  for (const auto& row : csv.rows()) {
    boxes.push_back({csv.id(row, 0, VideoKind::Query), csv.id(row, 1, VideoKind::Reference), csv.box(row, 2)});
  }
  return GroundTruth(std::move(boxes));
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
  std::string out = join_header(kGtHeader);
  for (const auto& b : gt.boxes()) {
    out += b.query.str() + ',' + b.reference.str() + ',';
    append_box(out, b.box);
    out += '\n';
  }
  spit(path, out);
}

std::vector<DetectionPrediction> read_detection_predictions(const std::filesystem::path& path) {
  CsvFile csv(path, kDetHeader);
  std::vector<DetectionPrediction> preds;
  preds.reserve(csv.rows().size());
  for (const auto& row : csv.rows()) {
    const double score = csv.number(row, 2);
    if (!std::isfinite(score)) throw ValidationError(csv.where(row) + ": score is not finite");
    preds.emplace_back(csv.id(row, 0, VideoKind::Query), csv.id(row, 1, VideoKind::Reference), score);
  }
  return preds;
}

void write_detection_predictions(const std::filesystem::path& path, std::span<const DetectionPrediction> preds) {
  std::string out = join_header(kDetHeader);
  for (const auto& p : preds) out += p.query.str() + ',' + p.reference.str() + ',' + format_number(p.score) + '\n';
  spit(path, out);
}

std::vector<LocalizationPrediction> read_localization_predictions(const std::filesystem::path& path) {
  CsvFile csv(path, kLocHeader);
  std::vector<LocalizationPrediction> preds;
  preds.reserve(csv.rows().size());
  for (const auto& row : csv.rows()) {
    const auto box = csv.box(row, 2);
    const double score = csv.number(row, 6);
    if (!std::isfinite(score)) throw ValidationError(csv.where(row) + ": score is not finite");
    preds.emplace_back(csv.id(row, 0, VideoKind::Query), csv.id(row, 1, VideoKind::Reference), box, score);
  }
  return preds;
}

void write_localization_predictions(const std::filesystem::path& path,
                                    std::span<const LocalizationPrediction> preds) {
  std::string out = join_header(kLocHeader);
  for (const auto& p : preds) {
    out += p.query.str() + ',' + p.reference.str() + ',';
    append_box(out, p.box);
    out += ',' + format_number(p.score) + '\n';
  }
  spit(path, out);
}

std::vector<TransformTag> read_tags(const std::filesystem::path& path) {
  CsvFile csv(path, kTagHeader);
  std::vector<TransformTag> tags;
  for (const auto& row : csv.rows()) {
    std::set<std::string> names;
    if (!row.fields[1].empty()) {
      for (auto name : split(row.fields[1], ';')) names.emplace(name);
    }
    try {
      tags.emplace_back(csv.id(row, 0, VideoKind::Query), std::move(names), csv.count(row, 2));
    } catch (const ValidationError& e) {
      throw ValidationError(csv.where(row) + ": " + e.what());
    }
  }
  return tags;
}

void write_tags(const std::filesystem::path& path, std::span<const TransformTag> tags) {
  std::string out = join_header(kTagHeader);
  for (const auto& t : tags) {
    out += t.query.str() + ',';
    bool first = true;
    for (const auto& name : t.tags) {
      if (!first) out += ';';
      out += name;
      first = false;
    }
    out += ',' + std::to_string(t.n_transforms) + '\n';
  }
  spit(path, out);
}

std::vector<VideoPair> read_pairs(const std::filesystem::path& path) {
  CsvFile csv(path, kPairHeader, /*allow_extra=*/true);
  std::vector<VideoPair> pairs;
  for (const auto& row : csv.rows()) {
    pairs.push_back({csv.id(row, 0, VideoKind::Query), csv.id(row, 1, VideoKind::Reference)});
  }
  return pairs;
}

void write_pairs(const std::filesystem::path& path, std::span<const VideoPair> pairs) {
  std::string out = join_header(kPairHeader);
  for (const auto& p : pairs) out += p.query.str() + ',' + p.reference.str() + '\n';
  spit(path, out);
}

std::map<VideoId, double> read_durations(const std::filesystem::path& path) {
  CsvFile csv(path, kDurationHeader);
  std::map<VideoId, double> out;
  for (const auto& row : csv.rows()) {
    const double d = csv.number(row, 1);
    if (!std::isfinite(d) || d < 0) throw ValidationError(csv.where(row) + ": duration must be finite and >= 0");
    out.insert_or_assign(csv.any_id(row, 0), d);
  }
  return out;
}

void write_durations(const std::filesystem::path& path, const std::map<VideoId, double>& durations) {
  std::string out = join_header(kDurationHeader);
  for (const auto& [id, d] : durations) out += id.str() + ',' + format_number(d) + '\n';
  spit(path, out);
}

void write_matches(const std::filesystem::path& path, std::span<const FrameMatch> matches) {
  std::string out = "query_id,query_frame,ref_id,ref_frame,similarity\n";
  for (const auto& m : matches) {
    out += m.query.str() + ',' + std::to_string(m.query_frame) + ',' + m.reference.str() + ',' +
           std::to_string(m.ref_frame) + ',' + format_number(m.similarity) + '\n';
  }
  spit(path, out);
}

// ---------------------------------------------------------------------------
// submission limits

ValidationReport validate_descriptor_budget(std::span<const DescriptorSet> sets,
                                            const std::map<VideoId, double>& durations) {
  ValidationReport report;
  for (const auto& s : sets) {
    const auto it = durations.find(s.video());
    if (it == durations.end()) throw ValidationError("no duration for video " + s.video().str());
    report.max_dim = std::max<long>(report.max_dim, s.dim());
    report.total_descriptors += static_cast<std::size_t>(s.size());
    report.total_seconds += it->second;
    if (static_cast<double>(s.size()) > kMaxDescriptorsPerSecond * it->second) {
      report.over_rate_videos.push_back(s.video());
    }
  }
  if (report.max_dim > kMaxDescriptorDim) {
    report.passed = false;
    report.violations.push_back("descriptor dimension " + std::to_string(report.max_dim) + " exceeds " +
                                std::to_string(kMaxDescriptorDim));
  }
  if (static_cast<double>(report.total_descriptors) > kMaxDescriptorsPerSecond * report.total_seconds) {
    report.passed = false;
    std::ostringstream msg;
    msg << report.total_descriptors << " descriptors for " << report.total_seconds
        << " s of video exceeds the average rate of " << kMaxDescriptorsPerSecond << " per second";
    report.violations.push_back(msg.str());
  }
  return report;
}

}  // namespace vcd
