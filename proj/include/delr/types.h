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

#ifndef DELR_TYPES_H_
#define DELR_TYPES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace delr {

using Id = std::string;
using ClassId = int;

// Orders identifiers numerically when both are canonical non-negative
// integers and lexicographically otherwise, so "9" < "10" and "a" < "b".
// Numeric identifiers sort before non-numeric ones.
struct IdLess {
  bool operator()(std::string_view a, std::string_view b) const;
};

bool IsCanonicalInteger(std::string_view s);

// Axis-aligned box, (x, y) is the top-left corner, all values in pixels.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double Area() const { return w * h; }
  double Right() const { return x + w; }
  double Bottom() const { return y + h; }
  bool HasPositiveArea() const { return w > 0.0 && h > 0.0; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct GroundTruthObject {
  Id id;
  BoundingBox box;
  ClassId class_id = 0;

  friend bool operator==(const GroundTruthObject&,
                         const GroundTruthObject&) = default;
};

struct ImageRecord {
  Id id;
  double width = 0.0;
  double height = 0.0;
  std::vector<GroundTruthObject> gt_objects;
  std::optional<std::string> raster_path;

  bool Contains(const BoundingBox& b) const {
    return b.x >= 0.0 && b.y >= 0.0 && b.Right() <= width &&
           b.Bottom() <= height;
  }
  const GroundTruthObject* FindObject(std::string_view object_id) const;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Category {
  int id = 0;
  std::string name;

  friend bool operator==(const Category&, const Category&) = default;
};

// A set of images with ground truth. Class indices are positions in
// `categories`, which holds the external (COCO) category ids.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ImageRecord> images, std::vector<Category> categories);

  // Throws ValidationError on duplicate ids, out-of-bounds or degenerate
  // boxes, and class ids outside [0, num_classes).
  void Validate() const;

  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<Category>& categories() const { return categories_; }
  int num_classes() const { return static_cast<int>(categories_.size()); }
  std::size_t num_objects() const;

  const ImageRecord* FindImage(std::string_view image_id) const;
  const ImageRecord& Image(std::string_view image_id) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.images_ == b.images_ && a.categories_ == b.categories_;
  }

 private:
  std::vector<ImageRecord> images_;
  std::vector<Category> categories_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Probability vector over classes. Construction validates that entries lie in
// [0, 1] and sum to one within 1e-6.
class ClassDistribution {
 public:
  static constexpr double kSumTolerance = 1e-6;

  ClassDistribution() = default;
  explicit ClassDistribution(std::vector<double> probs);

  // Builds a one-hot distribution.
  static ClassDistribution OneHot(int num_classes, ClassId cls);

  std::span<const double> probs() const { return probs_; }
  int size() const { return static_cast<int>(probs_.size()); }
  // Lowest index wins ties.
  ClassId Argmax() const;
  double Max() const;

  friend bool operator==(const ClassDistribution&,
                         const ClassDistribution&) = default;

 private:
  std::vector<double> probs_;
};

struct PseudoAnnotation {
  Id id;
  Id image_id;
  BoundingBox box;  // Unflipped image frame.
  ClassDistribution class_dist;
  double confidence = 0.0;  // Max of class_dist.
  double u_loc = 0.0;       // Pixels, mean L1 over (x, y, w, h).
  double u_cls = 0.0;       // Nats.
  bool paired = false;

  ClassId PredictedClass() const { return class_dist.Argmax(); }

  friend bool operator==(const PseudoAnnotation&,
                         const PseudoAnnotation&) = default;
};

enum class BoxState { kPseudo, kVerifiedKept, kCorrected, kDropped };
enum class ClassState { kPseudo, kTrusted, kVerifiedKept, kCorrected };

std::string_view ToString(BoxState s);
std::string_view ToString(ClassState s);
BoxState ParseBoxState(std::string_view s);
ClassState ParseClassState(std::string_view s);

struct HistoryRecord {
  int cycle = 0;
  std::string action;
  std::int64_t cost_ms = 0;

  friend bool operator==(const HistoryRecord&, const HistoryRecord&) = default;
};

struct PoolEntry {
  PseudoAnnotation annotation;
  BoxState box_state = BoxState::kPseudo;
  ClassState class_state = ClassState::kPseudo;
  // Ground-truth object matched at box verification, used by the class pass.
  std::optional<Id> matched_gt_id;
  std::vector<HistoryRecord> history;

  bool IsLabeled() const {
    return box_state == BoxState::kVerifiedKept ||
           box_state == BoxState::kCorrected;
  }

  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

}  // namespace delr

#endif  // DELR_TYPES_H_
