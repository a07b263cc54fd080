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

#ifndef DELR_POOL_H_
#define DELR_POOL_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "delr/types.h"

namespace delr {

// The evolving labeled pool. Entries keep insertion order; lookups by
// annotation id are O(1).
class PoolState {
 public:
  PoolState() = default;
  explicit PoolState(std::vector<PoolEntry> entries);

  const std::vector<PoolEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const PoolEntry* Find(std::string_view annotation_id) const;
  PoolEntry* FindMutable(std::string_view annotation_id);
  const PoolEntry& At(std::string_view annotation_id) const;
  PoolEntry& AtMutable(std::string_view annotation_id);

  // Throws ValidationError on a duplicate annotation id.
  void Add(PoolEntry entry);

  // Removes entries that were never touched by verification (both states
  // still Pseudo). Returns how many were removed.
  std::size_t RemoveUntouched();

  std::size_t CountBoxState(BoxState s) const;
  std::size_t CountClassState(ClassState s) const;
  std::size_t CountLabeled() const;

  friend bool operator==(const PoolState& a, const PoolState& b) {
    return a.entries_ == b.entries_;
  }

 private:
  void Reindex();

  std::vector<PoolEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Builds a pool of untouched entries. Throws ValidationError naming the
// annotation when its image is not in the dataset.
PoolState NewPool(const Dataset& dataset,
                  std::span<const PseudoAnnotation> predictions);

}  // namespace delr

#endif  // DELR_POOL_H_
