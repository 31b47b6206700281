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

#include "vcd/interval_union.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace vcd {

double IntervalUnion::insert(double start, double end) {
  if (!(start < end)) return 0.0;
  // First piece that could touch [start, end): its end is >= start.
  auto first = std::lower_bound(pieces_.begin(), pieces_.end(), start,
                                [](const Interval& p, double s) { return p.end < s; });
  auto last = first;
  double merged_start = start;
  double merged_end = end;
  double swallowed = 0.0;
  while (last != pieces_.end() && last->start <= end) {
    merged_start = std::min(merged_start, last->start);
    merged_end = std::max(merged_end, last->end);
    swallowed += last->end - last->start;
    ++last;
  }
  const double gain = (merged_end - merged_start) - swallowed;
  if (first == last) {
    pieces_.insert(first, {merged_start, merged_end});
  } else {
    *first = {merged_start, merged_end};
    pieces_.erase(first + 1, last);
  }
  length_ += gain;
  assert(check_invariants());
  return gain;
}

bool IntervalUnion::check_invariants(double tol) const {
  double total = 0.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    if (!(pieces_[k].start < pieces_[k].end)) return false;
    if (k > 0 && !(pieces_[k - 1].end < pieces_[k].start)) return false;
    total += pieces_[k].end - pieces_[k].start;
  }
  return std::abs(total - length_) <= tol * std::max(1.0, total);
}

}  // namespace vcd
