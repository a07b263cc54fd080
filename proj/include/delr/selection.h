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

#ifndef DELR_SELECTION_H_
#define DELR_SELECTION_H_

#include <span>
#include <vector>

#include "delr/pool.h"
#include "delr/types.h"

namespace delr {

enum class RankKey { kLoc, kCls };

// Keeps annotations with confidence >= tau.
std::vector<PseudoAnnotation> FilterByConfidence(
    std::span<const PseudoAnnotation> anns, double tau);

// Sorts by the chosen uncertainty, largest first; ties by (image_id, id).
std::vector<PseudoAnnotation> RankDescending(
    std::span<const PseudoAnnotation> anns, RankKey key);

// Pool-level ranking, returns annotation ids.
std::vector<Id> RankIds(std::span<const PoolEntry* const> entries,
                        RankKey key);

// Median with the even-count mean convention. Throws PreconditionError on
// empty input.
double Median(std::vector<double> values);
double MedianUCls(std::span<const PseudoAnnotation> anns);
// Median u_cls over the given entries, skipping Dropped boxes.
double MedianUCls(std::span<const PoolEntry* const> entries);

}  // namespace delr

#endif  // DELR_SELECTION_H_
