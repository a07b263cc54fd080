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

#ifndef DELR_SYNTH_H_
#define DELR_SYNTH_H_

#include <cstdint>
#include <utility>

#include "delr/types.h"
#include "delr/uncertainty.h"

namespace delr {

struct ScenarioParams {
  int num_images = 100;
  int num_classes = 20;
  int min_objects = 1;
  int max_objects = 6;
  int min_box_size = 30;   // Pixels, applies to w and h independently.
  int max_box_size = 150;
  int image_width = 500;
  int image_height = 375;
  std::uint64_t seed = 0;

  friend bool operator==(const ScenarioParams&,
                         const ScenarioParams&) = default;
};

// Noise model of the stand-in detector.
struct NoiseParams {
  // Offsets uniform in [-j*size, j*size], drawn per coordinate; x and w use
  // the box width, y and h the box height.
  double jitter_frac = 0.0;
  // Probability the predicted class is replaced by a random wrong one.
  double class_confusion = 0.0;
  double miss_rate = 0.0;
  // Expected spurious boxes per image and branch (Poisson).
  double spurious_rate = 0.0;
  // Confidence is 0.5 + 0.5 * (1 - normalized jitter magnitude), minus this
  // penalty when the class was confused.
  double confusion_penalty = 0.1;
  // Confidence of spurious boxes is uniform in this range.
  double spurious_conf_lo = 0.5;
  double spurious_conf_hi = 1.0;

  // Throws ValidationError for probabilities outside [0, 1] or negative
  // jitter or spurious rate.
  void Validate() const;

  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

// Noise calibrated on ScenarioParams defaults so that pseudo labels passing
// the 0.7 confidence filter fall in the IoU buckets (<0.3, 0.3-0.7, >=0.7)
// at about (0.19, 0.28, 0.53). See tools/calibrate_mock.cc.
NoiseParams CalibratedNoise();

// Integer-pixel ground truth placed uniformly, with pairwise IoU < 0.5.
// Throws InfeasibleError when an object cannot be placed after bounded
// retries and ValidationError for empty ranges.
Dataset GenerateScenario(const ScenarioParams& params);

// Two-branch mock detections. Branch 1 is in the original frame; branch 2
// uses independent draws and is emitted in the flipped frame.
std::pair<BranchOutput, BranchOutput> MockDetect(const Dataset& dataset,
                                                 const NoiseParams& noise,
                                                 std::uint64_t seed);

}  // namespace delr

#endif  // DELR_SYNTH_H_
