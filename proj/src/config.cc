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

#include "delr/config.h"

#include <algorithm>
#include <string>

#include "delr/error.h"

namespace delr {
namespace {

void RequireUnit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [0, 1], got " +
                          std::to_string(v));
  }
}

}  // namespace

void ExperimentConfig::Validate() {
  RequireUnit(tau_conf, "tau_conf");
  RequireUnit(iou_pos, "iou_pos");
  RequireUnit(iou_bg, "iou_bg");
  RequireUnit(loc_budget_fraction, "loc_budget_fraction");
  if (!(iou_bg < iou_pos)) {
    throw ValidationError("iou_bg must be below iou_pos");
  }
  if (!(delta_pos >= 0.0) || !(delta_bg >= 0.0)) {
    throw ValidationError("disturbance widths must be non-negative");
  }
  delta_pos = std::min(delta_pos, 1.0 - iou_pos);
  if (!(enlarge_factor >= 1.0)) {
    throw ValidationError("enlarge_factor must be at least 1");
  }
  if (!(conf_trust >= 0.0)) {
    throw ValidationError("conf_trust must be non-negative");
  }
  for (Millis b : cycle_budgets_ms) {
    if (b < 0) throw ValidationError("cycle budgets must be non-negative");
  }
  if (dataset_profile.kind == ProfileKind::kCustom) {
    dataset_profile.custom.Validate();
  }
}

}  // namespace delr
