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

#include "delr/pool.h"

#include <algorithm>
#include <string>

#include "delr/error.h"

namespace delr {

PoolState::PoolState(std::vector<PoolEntry> entries)
    : entries_(std::move(entries)) {
  Reindex();
}

void PoolState::Reindex() {
  index_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].annotation.id, i).second) {
      throw ValidationError("duplicate annotation id \"" +
                            entries_[i].annotation.id + "\" in pool");
    }
  }
}

const PoolEntry* PoolState::Find(std::string_view annotation_id) const {
  auto it = index_.find(std::string(annotation_id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

PoolEntry* PoolState::FindMutable(std::string_view annotation_id) {
  auto it = index_.find(std::string(annotation_id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const PoolEntry& PoolState::At(std::string_view annotation_id) const {
  const PoolEntry* e = Find(annotation_id);
  if (e == nullptr) {
    throw PreconditionError("unknown annotation \"" +
                            std::string(annotation_id) + "\"");
  }
  return *e;
}

PoolEntry& PoolState::AtMutable(std::string_view annotation_id) {
  return const_cast<PoolEntry&>(At(annotation_id));
}

void PoolState::Add(PoolEntry entry) {
  if (index_.count(entry.annotation.id) != 0) {
    throw ValidationError("duplicate annotation id \"" + entry.annotation.id +
                          "\" in pool");
  }
  index_.emplace(entry.annotation.id, entries_.size());
  entries_.push_back(std::move(entry));
}

std::size_t PoolState::RemoveUntouched() {
  const std::size_t before = entries_.size();
  std::erase_if(entries_, [](const PoolEntry& e) {
    return e.box_state == BoxState::kPseudo &&
           e.class_state == ClassState::kPseudo && e.history.empty();
  });
  Reindex();
  return before - entries_.size();
}

std::size_t PoolState::CountBoxState(BoxState s) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(),
      [s](const PoolEntry& e) { return e.box_state == s; }));
}

std::size_t PoolState::CountClassState(ClassState s) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(),
      [s](const PoolEntry& e) { return e.class_state == s; }));
}

std::size_t PoolState::CountLabeled() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(),
                    [](const PoolEntry& e) { return e.IsLabeled(); }));
}

PoolState NewPool(const Dataset& dataset,
                  std::span<const PseudoAnnotation> predictions) {
  PoolState pool;
  for (const auto& a : predictions) {
    if (dataset.FindImage(a.image_id) == nullptr) {
      throw ValidationError("annotation \"" + a.id +
                            "\" references unknown image \"" + a.image_id +
                            "\"");
    }
    PoolEntry e;
    e.annotation = a;
    pool.Add(std::move(e));
  }
  return pool;
}

}  // namespace delr
