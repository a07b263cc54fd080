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

#include "delr/metrics.h"

#include "delr/error.h"
#include "delr/geometry.h"

namespace delr {

GtMatch BestGtMatch(const BoundingBox& box, const ImageRecord& image) {
  GtMatch m;
  for (std::size_t i = 0; i < image.gt_objects.size(); ++i) {
    const double v = Iou(box, image.gt_objects[i].box);
    if (m.index < 0 || v > m.iou) {
      m.iou = v;
      m.index = static_cast<int>(i);
    }
  }
  return m;
}

IouBuckets ComputeIouBuckets(const PoolState& pool, const Dataset& dataset) {
  std::int64_t counts[3] = {0, 0, 0};
  for (const PoolEntry& e : pool.entries()) {
    if (e.box_state == BoxState::kDropped) continue;
    const double v =
        BestGtMatch(e.annotation.box, dataset.Image(e.annotation.image_id)).iou;
    if (v >= kCorrectLocIou) {
      ++counts[2];
    } else if (v >= kIncorrectLocIou) {
      ++counts[1];
    } else {
      ++counts[0];
    }
  }
  const std::int64_t n = counts[0] + counts[1] + counts[2];
  if (n == 0) throw PreconditionError("no non-dropped entries to bucket");
  const double dn = static_cast<double>(n);
  return {counts[0] / dn, counts[1] / dn, counts[2] / dn, n};
}

double ClsAccGivenCorrectLoc(const PoolState& pool, const Dataset& dataset) {
  std::int64_t qualifying = 0;
  std::int64_t right = 0;
  for (const PoolEntry& e : pool.entries()) {
    if (e.box_state == BoxState::kDropped) continue;
    const ImageRecord& img = dataset.Image(e.annotation.image_id);
    const GtMatch m = BestGtMatch(e.annotation.box, img);
    if (m.index < 0 || m.iou < kCorrectLocIou) continue;
    ++qualifying;
    if (img.gt_objects[static_cast<std::size_t>(m.index)].class_id ==
        e.annotation.PredictedClass()) {
      ++right;
    }
  }
  if (qualifying == 0) {
    throw PreconditionError("no entry with correct localization");
  }
  return static_cast<double>(right) / static_cast<double>(qualifying);
}

std::int64_t ConfusionMatrix::Total() const {
  std::int64_t t = 0;
  for (std::int64_t c : counts) t += c;
  return t;
}

std::int64_t ConfusionMatrix::Trace() const {
  std::int64_t t = 0;
  for (int i = 0; i < num_classes; ++i) t += (*this)(i, i);
  return t;
}

ConfusionMatrix ComputeConfusionMatrix(const PoolState& pool,
                                       const Dataset& dataset) {
  ConfusionMatrix cm;
  cm.num_classes = dataset.num_classes();
  cm.counts.assign(static_cast<std::size_t>(cm.num_classes * cm.num_classes),
                   0);
  for (const PoolEntry& e : pool.entries()) {
    if (e.box_state == BoxState::kDropped) continue;
    const ImageRecord& img = dataset.Image(e.annotation.image_id);
    const GtMatch m = BestGtMatch(e.annotation.box, img);
    if (m.index < 0 || m.iou < kIncorrectLocIou) {
      ++cm.unmatched;
      continue;
    }
    const int gt = img.gt_objects[static_cast<std::size_t>(m.index)].class_id;
    const int pred = e.annotation.PredictedClass();
    ++cm.counts[static_cast<std::size_t>(gt * cm.num_classes + pred)];
  }
  return cm;
}

StateCounts CountStates(const PoolState& pool) {
  StateCounts c;
  for (const PoolEntry& e : pool.entries()) {
    switch (e.box_state) {
      case BoxState::kPseudo: ++c.box_pseudo; break;
      case BoxState::kVerifiedKept: ++c.box_verified_kept; break;
      case BoxState::kCorrected: ++c.box_corrected; break;
      case BoxState::kDropped: ++c.box_dropped; break;
    }
    switch (e.class_state) {
      case ClassState::kPseudo: ++c.cls_pseudo; break;
      case ClassState::kTrusted: ++c.cls_trusted; break;
      case ClassState::kVerifiedKept: ++c.cls_verified_kept; break;
      case ClassState::kCorrected: ++c.cls_corrected; break;
    }
  }
  return c;
}

MetricsBundle ComputeMetrics(const PoolState& pool, const Dataset& dataset,
                             const CostLedger& ledger) {
  MetricsBundle m;
  m.counts = CountStates(pool);
  if (pool.size() > static_cast<std::size_t>(m.counts.box_dropped)) {
    m.iou_buckets = ComputeIouBuckets(pool, dataset);
    if (m.iou_buckets->correct > 0.0) {
      m.cls_acc_given_correct_loc = ClsAccGivenCorrectLoc(pool, dataset);
    }
  }
  m.confusion = ComputeConfusionMatrix(pool, dataset);
  m.budget = {ledger.spent_loc_ms(), ledger.spent_cls_ms(),
              ledger.remaining_ms()};
  m.acquired_objects = m.counts.box_verified_kept + m.counts.box_corrected;
  return m;
}

}  // namespace delr
