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

#ifndef DELR_UNCERTAINTY_H_
#define DELR_UNCERTAINTY_H_

#include <optional>
#include <span>
#include <vector>

#include "delr/types.h"

namespace delr {

// Detector output for a single instance from one branch.
struct RawPrediction {
  Id id;
  Id image_id;
  BoundingBox box;
  ClassDistribution class_dist;

  friend bool operator==(const RawPrediction&, const RawPrediction&) = default;
};

enum class Frame { kOriginal, kFlipped };

// All detections of one branch. Branch 1 runs on the original image, branch 2
// on the horizontally flipped one.
struct BranchOutput {
  int branch = 1;
  Frame frame = Frame::kOriginal;
  std::vector<RawPrediction> detections;

  friend bool operator==(const BranchOutput&, const BranchOutput&) = default;
};

struct PredictionPair {
  RawPrediction primary;
  std::optional<RawPrediction> secondary;  // Unflipped frame.
  std::optional<double> match_iou;
};

inline constexpr double kPairingIou = 0.5;
inline constexpr double kKlSmoothing = 1e-8;

// Greedy one-to-one matching by descending IoU; only pairs with
// IoU >= kPairingIou are formed. Output follows the primary order.
std::vector<PredictionPair> PairPredictions(
    std::span<const RawPrediction> primary,
    std::span<const RawPrediction> secondary_unflipped);

// Mean absolute coordinate difference between the paired boxes.
double LocUncertainty(const BoundingBox& b, const BoundingBox& b_hat);
double LocUncertainty(const PredictionPair& pair);

// KL(c || c_hat) with additive smoothing, clamped at zero. Throws
// PreconditionError on a length mismatch.
double ClsUncertainty(std::span<const double> c, std::span<const double> c_hat);
double ClsUncertainty(const PredictionPair& pair);

struct ScoringOptions {
  // Sentinels for primaries with no cross-branch match. Defaults: the image
  // diagonal and ln(num_classes).
  std::optional<double> u_max_loc;
  std::optional<double> u_max_cls;
};

// Scores the primary detections of one image.
std::vector<PseudoAnnotation> ScoreAnnotations(
    const ImageRecord& image, int num_classes,
    std::span<const RawPrediction> primary,
    std::span<const RawPrediction> secondary_unflipped,
    const ScoringOptions& options = {});

// Maps branch detections back to the original frame if needed.
std::vector<RawPrediction> ToOriginalFrame(const BranchOutput& branch,
                                           const Dataset& dataset);

// Scores every image of the dataset, in dataset image order.
std::vector<PseudoAnnotation> ScoreDataset(const Dataset& dataset,
                                           const BranchOutput& primary,
                                           const BranchOutput& secondary,
                                           const ScoringOptions& options = {});

}  // namespace delr

#endif  // DELR_UNCERTAINTY_H_
