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

#include "delr/selection.h"

#include <algorithm>

#include "delr/error.h"

namespace delr {
namespace {

double KeyOf(const PseudoAnnotation& a, RankKey key) {
  return key == RankKey::kLoc ? a.u_loc : a.u_cls;
}

bool RankBefore(const PseudoAnnotation& a, const PseudoAnnotation& b,
                RankKey key) {
  const double ka = KeyOf(a, key);
  const double kb = KeyOf(b, key);
  if (ka != kb) return ka > kb;
  IdLess less;
  if (a.image_id != b.image_id) return less(a.image_id, b.image_id);
  return less(a.id, b.id);
}

}  // namespace

std::vector<PseudoAnnotation> FilterByConfidence(
    std::span<const PseudoAnnotation> anns, double tau) {
  std::vector<PseudoAnnotation> out;
  for (const auto& a : anns) {
    if (a.confidence >= tau) out.push_back(a);
  }
  return out;
}

std::vector<PseudoAnnotation> RankDescending(
    std::span<const PseudoAnnotation> anns, RankKey key) {
  std::vector<PseudoAnnotation> out(anns.begin(), anns.end());
  std::sort(out.begin(), out.end(),
            [key](const PseudoAnnotation& a, const PseudoAnnotation& b) {
              return RankBefore(a, b, key);
            });
  return out;
}

std::vector<Id> RankIds(std::span<const PoolEntry* const> entries,
                        RankKey key) {
  std::vector<const PoolEntry*> sorted(entries.begin(), entries.end());
  std::sort(sorted.begin(), sorted.end(),
            [key](const PoolEntry* a, const PoolEntry* b) {
              return RankBefore(a->annotation, b->annotation, key);
            });
  std::vector<Id> ids;
  ids.reserve(sorted.size());
  for (const PoolEntry* e : sorted) ids.push_back(e->annotation.id);
  return ids;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw PreconditionError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double MedianUCls(std::span<const PseudoAnnotation> anns) {
  std::vector<double> v;
  v.reserve(anns.size());
  for (const auto& a : anns) v.push_back(a.u_cls);
  return Median(std::move(v));
}

double MedianUCls(std::span<const PoolEntry* const> entries) {
  std::vector<double> v;
  for (const PoolEntry* e : entries) {
    if (e->box_state != BoxState::kDropped) v.push_back(e->annotation.u_cls);
  }
  return Median(std::move(v));
}

}  // namespace delr
