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

#include <span>
#include <utility>
#include <vector>

namespace vcd {

/// Union of half-open intervals kept as a sorted list of disjoint pieces.
class IntervalUnion {
 public:
  struct Interval {
    double start;
    double end;
  };

  /// Adds [start, end) and returns the growth of the covered length.
  /// Empty or inverted intervals are ignored.
  double insert(double start, double end);

  double length() const { return length_; }
  std::span<const Interval> intervals() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }

  /// Disjoint, sorted, non-empty pieces whose extents sum to length().
  bool check_invariants(double tol = 1e-9) const;

 private:
  std::vector<Interval> pieces_;
  double length_ = 0.0;
};

}  // namespace vcd
