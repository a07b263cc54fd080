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

#include "delr/types.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "delr/error.h"

namespace delr {

bool IsCanonicalInteger(std::string_view s) {
  if (s.empty() || s.size() > 18) return false;
  if (s.size() > 1 && s.front() == '0') return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

bool IdLess::operator()(std::string_view a, std::string_view b) const {
  const bool na = IsCanonicalInteger(a);
  const bool nb = IsCanonicalInteger(b);
  if (na && nb) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
  if (na != nb) return na;
  return a < b;
}

const GroundTruthObject* ImageRecord::FindObject(
    std::string_view object_id) const {
  for (const auto& o : gt_objects) {
    if (o.id == object_id) return &o;
  }
  return nullptr;
}

Dataset::Dataset(std::vector<ImageRecord> images,
                 std::vector<Category> categories)
    : images_(std::move(images)), categories_(std::move(categories)) {
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (!index_.emplace(images_[i].id, i).second) {
      throw ValidationError("duplicate image id \"" + images_[i].id + "\"");
    }
  }
}

void Dataset::Validate() const {
  if (categories_.empty()) throw ValidationError("dataset has no categories");
  std::unordered_set<int> cat_ids;
  for (const auto& c : categories_) {
    if (!cat_ids.insert(c.id).second) {
      throw ValidationError("duplicate category id " + std::to_string(c.id));
    }
  }
  for (const auto& img : images_) {
    if (!(img.width > 0.0) || !(img.height > 0.0)) {
      throw ValidationError("image \"" + img.id + "\" has non-positive size");
    }
    std::unordered_set<std::string> obj_ids;
    for (const auto& o : img.gt_objects) {
      const std::string where = "object \"" + o.id + "\" of image \"" +
                                img.id + "\"";
      if (!obj_ids.insert(o.id).second) {
        throw ValidationError("duplicate " + where);
      }
      if (!o.box.HasPositiveArea()) {
        throw ValidationError(where + " has a degenerate box");
      }
      if (!img.Contains(o.box)) {
        throw ValidationError(where + " lies outside the image");
      }
      if (o.class_id < 0 || o.class_id >= num_classes()) {
        throw ValidationError(where + " has class " +
                              std::to_string(o.class_id) + " out of range");
      }
    }
  }
}

std::size_t Dataset::num_objects() const {
  std::size_t n = 0;
  for (const auto& img : images_) n += img.gt_objects.size();
  return n;
}

const ImageRecord* Dataset::FindImage(std::string_view image_id) const {
  auto it = index_.find(std::string(image_id));
  return it == index_.end() ? nullptr : &images_[it->second];
}

const ImageRecord& Dataset::Image(std::string_view image_id) const {
  const ImageRecord* img = FindImage(image_id);
  if (img == nullptr) {
    throw ValidationError("unknown image \"" + std::string(image_id) + "\"");
  }
  return *img;
}

ClassDistribution::ClassDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw ValidationError("empty class distribution");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("class probability " + std::to_string(p) +
                            " outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw ValidationError("class probabilities sum to " +
                          std::to_string(sum) + ", expected 1");
  }
}

ClassDistribution ClassDistribution::OneHot(int num_classes, ClassId cls) {
  if (cls < 0 || cls >= num_classes) {
    throw ValidationError("class " + std::to_string(cls) + " out of range");
  }
  std::vector<double> p(static_cast<std::size_t>(num_classes), 0.0);
  p[static_cast<std::size_t>(cls)] = 1.0;
  return ClassDistribution(std::move(p));
}

ClassId ClassDistribution::Argmax() const {
  // max_element returns the first maximum.
  return static_cast<ClassId>(
      std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

double ClassDistribution::Max() const {
  return probs_.empty() ? 0.0 : *std::max_element(probs_.begin(), probs_.end());
}

std::string_view ToString(BoxState s) {
  switch (s) {
    case BoxState::kPseudo: return "Pseudo";
    case BoxState::kVerifiedKept: return "VerifiedKept";
    case BoxState::kCorrected: return "Corrected";
    case BoxState::kDropped: return "Dropped";
  }
  return "?";
}

std::string_view ToString(ClassState s) {
  switch (s) {
    case ClassState::kPseudo: return "Pseudo";
    case ClassState::kTrusted: return "Trusted";
    case ClassState::kVerifiedKept: return "VerifiedKept";
    case ClassState::kCorrected: return "Corrected";
  }
  return "?";
}

BoxState ParseBoxState(std::string_view s) {
  for (BoxState v : {BoxState::kPseudo, BoxState::kVerifiedKept,
                     BoxState::kCorrected, BoxState::kDropped}) {
    if (ToString(v) == s) return v;
  }
  throw ValidationError("unknown box state \"" + std::string(s) + "\"");
}

ClassState ParseClassState(std::string_view s) {
  for (ClassState v : {ClassState::kPseudo, ClassState::kTrusted,
                       ClassState::kVerifiedKept, ClassState::kCorrected}) {
    if (ToString(v) == s) return v;
  }
  throw ValidationError("unknown class state \"" + std::string(s) + "\"");
}

}  // namespace delr
