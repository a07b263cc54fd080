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

#ifndef DELR_ORACLE_H_
#define DELR_ORACLE_H_

#include <optional>
#include <string>
#include <string_view>

#include "delr/config.h"
#include "delr/rng.h"
#include "delr/types.h"

namespace delr {

enum class TaskKind { kBox, kClass };

std::string_view ToString(TaskKind k);
TaskKind ParseTaskKind(std::string_view s);

struct VerificationTask {
  std::string task_id;
  TaskKind kind = TaskKind::kBox;
  Id image_id;
  Id annotation_id;
  BoundingBox region;  // Enlarged and clipped pseudo box.
  BoundingBox pseudo_box;
  ClassId pseudo_class = 0;
  int issued_cycle = 0;
  // Ground truth matched during box verification; only set for class tasks
  // and never shown to a human.
  std::optional<Id> matched_gt_id;

  friend bool operator==(const VerificationTask&,
                         const VerificationTask&) = default;
};

enum class Answer { kBoxKeep, kBoxDrop, kBoxCorrect, kClassKeep, kClassCorrect };

std::string_view ToString(Answer a);
// Throws ValidationError for unknown names.
Answer ParseAnswer(std::string_view s);
TaskKind KindOf(Answer a);

struct Verdict {
  std::string task_id;
  Answer answer = Answer::kBoxKeep;
  std::optional<BoundingBox> new_box;   // kBoxCorrect only.
  std::optional<ClassId> new_class;     // kClassCorrect only.
  // Ground truth the simulated oracle compared against. Humans leave it empty.
  std::optional<Id> matched_gt_id;

  static Verdict BoxKeep(std::string task_id);
  static Verdict BoxDrop(std::string task_id);
  static Verdict BoxCorrect(std::string task_id, BoundingBox box);
  static Verdict ClassKeep(std::string task_id);
  static Verdict ClassCorrect(std::string task_id, ClassId cls);

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Throws ValidationError if the verdict does not fit the task: kind mismatch,
// missing payload, a corrected box outside the image or a class out of range.
void ValidateVerdict(const Verdict& verdict, const VerificationTask& task,
                     const ImageRecord& image, int num_classes);

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual Verdict Answer(const VerificationTask& task) = 0;
};

// Effective thresholds for one verification event after disturbance.
struct Thresholds {
  double pos = 0.7;
  double bg = 0.3;
};

// Box verification against ground truth. `thresholds` is already disturbed.
Verdict SimulatedVerifyBox(const VerificationTask& task,
                           const ImageRecord& gt, const Thresholds& thresholds);

// Draws offsets from [0, delta] and adds them to the configured thresholds.
// Always consumes two draws so the stream position depends only on the
// number of verification events.
Thresholds DisturbThresholds(const ExperimentConfig& cfg, RngStream& rng);

// Same as above with a freshly disturbed threshold pair.
Verdict SimulatedVerifyBox(const VerificationTask& task,
                           const ImageRecord& gt, const ExperimentConfig& cfg,
                           RngStream& rng);

// Throws PreconditionError when no ground truth is matched.
Verdict SimulatedVerifyClass(const VerificationTask& task,
                             std::optional<ClassId> matched_gt_class);

// Oracle backed by the dataset's ground truth.
class SimulatedOracle : public Oracle {
 public:
  SimulatedOracle(const Dataset& dataset, const ExperimentConfig& cfg,
                  RngStream rng)
      : dataset_(dataset), cfg_(cfg), rng_(rng) {}

  Verdict Answer(const VerificationTask& task) override;

 private:
  const Dataset& dataset_;
  ExperimentConfig cfg_;
  RngStream rng_;
};

}  // namespace delr

#endif  // DELR_ORACLE_H_
