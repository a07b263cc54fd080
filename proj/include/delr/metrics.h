// Copyright 2026 The delr Authors.
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

#ifndef DELR_METRICS_H_
#define DELR_METRICS_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "delr/cost.h"
#include "delr/pool.h"
#include "delr/types.h"

namespace delr {

// Fractions of boxes by best IoU with ground truth. An IoU of exactly 0.7
// counts as correct.
struct IouBuckets {
  double incorrect = 0.0;  // IoU < 0.3
  double low = 0.0;        // 0.3 <= IoU < 0.7
  double correct = 0.0;    // IoU >= 0.7
  std::int64_t count = 0;

  friend bool operator==(const IouBuckets&, const IouBuckets&) = default;
};

inline constexpr double kCorrectLocIou = 0.7;
inline constexpr double kIncorrectLocIou = 0.3;

// Best IoU of `box` against the image ground truth, and the index of that
// object (lowest index on ties). Index is -1 when the image has no objects.
struct GtMatch {
  double iou = 0.0;
  int index = -1;
};
GtMatch BestGtMatch(const BoundingBox& box, const ImageRecord& image);

// Over non-Dropped entries. Throws PreconditionError when there are none.
IouBuckets ComputeIouBuckets(const PoolState& pool, const Dataset& dataset);

// Among non-Dropped entries with best IoU >= 0.7, the fraction whose class
// equals the best-matching object's class. Throws PreconditionError when no
// entry qualifies.
double ClsAccGivenCorrectLoc(const PoolState& pool, const Dataset& dataset);

// Rows are ground-truth classes, columns pool classes. Entries whose best IoU
// is below 0.3 have no matched object and are counted in `unmatched`.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::int64_t> counts;  // Row-major.
  std::int64_t unmatched = 0;

  std::int64_t operator()(int gt, int pred) const {
    return counts[static_cast<std::size_t>(gt * num_classes + pred)];
  }
  std::int64_t Total() const;
  std::int64_t Trace() const;

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;
};
ConfusionMatrix ComputeConfusionMatrix(const PoolState& pool,
                                       const Dataset& dataset);

struct StateCounts {
  std::int64_t box_pseudo = 0, box_verified_kept = 0, box_corrected = 0,
               box_dropped = 0;
  std::int64_t cls_pseudo = 0, cls_trusted = 0, cls_verified_kept = 0,
               cls_corrected = 0;

  friend bool operator==(const StateCounts&, const StateCounts&) = default;
};

struct BudgetSummary {
  Millis spent_loc_ms = 0;
  Millis spent_cls_ms = 0;
  Millis remaining_ms = 0;

  friend bool operator==(const BudgetSummary&, const BudgetSummary&) = default;
};

struct MetricsBundle {
  std::optional<IouBuckets> iou_buckets;
  std::optional<double> cls_acc_given_correct_loc;
  ConfusionMatrix confusion;
  BudgetSummary budget;
  StateCounts counts;
  // Objects with a human-grade box in the pool (kept or corrected), or, for
  // the full-annotation baseline, ground-truth objects of charged images.
  std::int64_t acquired_objects = 0;

  friend bool operator==(const MetricsBundle&, const MetricsBundle&) = default;
};

StateCounts CountStates(const PoolState& pool);
MetricsBundle ComputeMetrics(const PoolState& pool, const Dataset& dataset,
                             const CostLedger& ledger);

}  // namespace delr

#endif  // DELR_METRICS_H_
