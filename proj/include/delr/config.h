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

#ifndef DELR_CONFIG_H_
#define DELR_CONFIG_H_

#include <cstdint>
#include <vector>

#include "delr/cost.h"

namespace delr {

struct ExperimentConfig {
  double tau_conf = 0.7;
  double iou_pos = 0.7;
  double iou_bg = 0.3;
  double delta_pos = 0.0;
  double delta_bg = 0.0;
  double enlarge_factor = 2.0;
  double conf_trust = 0.9;
  double loc_budget_fraction = 0.5;
  std::vector<Millis> cycle_budgets_ms;
  CostProfile dataset_profile;
  std::uint64_t seed = 0;

  // Throws ValidationError when thresholds or fractions are out of range.
  // delta_pos is clamped to 1 - iou_pos rather than rejected.
  void Validate();

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

}  // namespace delr

#endif  // DELR_CONFIG_H_
