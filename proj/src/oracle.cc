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

#include "delr/oracle.h"

#include <algorithm>
#include <string>

#include "delr/error.h"
#include "delr/geometry.h"

namespace delr {

std::string_view ToString(TaskKind k) {
  return k == TaskKind::kBox ? "Box" : "Class";
}

TaskKind ParseTaskKind(std::string_view s) {
  if (s == "Box") return TaskKind::kBox;
  if (s == "Class") return TaskKind::kClass;
  throw ValidationError("unknown task kind \"" + std::string(s) + "\"");
}

std::string_view ToString(Answer a) {
  switch (a) {
    case Answer::kBoxKeep: return "BoxKeep";
    case Answer::kBoxDrop: return "BoxDrop";
    case Answer::kBoxCorrect: return "BoxCorrect";
    case Answer::kClassKeep: return "ClassKeep";
    case Answer::kClassCorrect: return "ClassCorrect";
  }
  return "?";
}

Answer ParseAnswer(std::string_view s) {
  for (Answer a : {Answer::kBoxKeep, Answer::kBoxDrop, Answer::kBoxCorrect,
                   Answer::kClassKeep, Answer::kClassCorrect}) {
    if (ToString(a) == s) return a;
  }
  throw ValidationError("unknown answer \"" + std::string(s) + "\"");
}

TaskKind KindOf(Answer a) {
  return (a == Answer::kClassKeep || a == Answer::kClassCorrect)
             ? TaskKind::kClass
             : TaskKind::kBox;
}

Verdict Verdict::BoxKeep(std::string task_id) {
  return {std::move(task_id), Answer::kBoxKeep, {}, {}, {}};
}
Verdict Verdict::BoxDrop(std::string task_id) {
  return {std::move(task_id), Answer::kBoxDrop, {}, {}, {}};
}
Verdict Verdict::BoxCorrect(std::string task_id, BoundingBox box) {
  return {std::move(task_id), Answer::kBoxCorrect, box, {}, {}};
}
Verdict Verdict::ClassKeep(std::string task_id) {
  return {std::move(task_id), Answer::kClassKeep, {}, {}, {}};
}
Verdict Verdict::ClassCorrect(std::string task_id, ClassId cls) {
  return {std::move(task_id), Answer::kClassCorrect, {}, cls, {}};
}

void ValidateVerdict(const Verdict& verdict, const VerificationTask& task,
                     const ImageRecord& image, int num_classes) {
  if (verdict.task_id != task.task_id) {
    throw ValidationError("verdict is for task " + verdict.task_id +
                          ", expected " + task.task_id);
  }
  if (KindOf(verdict.answer) != task.kind) {
    throw ValidationError(std::string(ToString(verdict.answer)) +
                          " does not answer a " +
                          std::string(ToString(task.kind)) + " task");
  }
  if (verdict.answer == Answer::kBoxCorrect) {
    if (!verdict.new_box) throw ValidationError("BoxCorrect needs new_box");
    if (!verdict.new_box->HasPositiveArea()) {
      throw ValidationError("new_box has non-positive area");
    }
    if (!image.Contains(*verdict.new_box)) {
      throw ValidationError("new_box lies outside the image");
    }
  }
  if (verdict.answer == Answer::kClassCorrect) {
    if (!verdict.new_class) {
      throw ValidationError("ClassCorrect needs new_class");
    }
    if (*verdict.new_class < 0 || *verdict.new_class >= num_classes) {
      throw ValidationError("new_class " + std::to_string(*verdict.new_class) +
                            " out of range");
    }
  }
}

Thresholds DisturbThresholds(const ExperimentConfig& cfg, RngStream& rng) {
  const double dp = rng.Uniform(0.0, cfg.delta_pos);
  const double db = rng.Uniform(0.0, cfg.delta_bg);
  Thresholds t;
  t.pos = std::min(cfg.iou_pos + dp, 1.0);
  t.bg = std::min(cfg.iou_bg + db, t.pos);
  return t;
}

Verdict SimulatedVerifyBox(const VerificationTask& task,
                           const ImageRecord& gt,
                           const Thresholds& thresholds) {
  if (task.kind != TaskKind::kBox) {
    throw PreconditionError("box oracle given a class task");
  }
  const GroundTruthObject* best = nullptr;
  double best_iou = -1.0;
  for (const GroundTruthObject& o : gt.gt_objects) {
    if (!Intersects(o.box, task.region)) continue;
    const double v = Iou(task.pseudo_box, o.box);
    if (v > best_iou) {
      best_iou = v;
      best = &o;
    }
  }
  if (best == nullptr) return Verdict::BoxDrop(task.task_id);
  if (best_iou >= thresholds.pos) {
    Verdict v = Verdict::BoxKeep(task.task_id);
    v.matched_gt_id = best->id;
    return v;
  }
  if (best_iou < thresholds.bg) return Verdict::BoxDrop(task.task_id);
  Verdict v = Verdict::BoxCorrect(task.task_id, best->box);
  v.matched_gt_id = best->id;
  return v;
}

Verdict SimulatedVerifyBox(const VerificationTask& task,
                           const ImageRecord& gt, const ExperimentConfig& cfg,
                           RngStream& rng) {
  return SimulatedVerifyBox(task, gt, DisturbThresholds(cfg, rng));
}

Verdict SimulatedVerifyClass(const VerificationTask& task,
                             std::optional<ClassId> matched_gt_class) {
  if (task.kind != TaskKind::kClass) {
    throw PreconditionError("class oracle given a box task");
  }
  if (!matched_gt_class) {
    throw PreconditionError("class task " + task.task_id +
                            " has no matched ground truth");
  }
  Verdict v = task.pseudo_class == *matched_gt_class
                  ? Verdict::ClassKeep(task.task_id)
                  : Verdict::ClassCorrect(task.task_id, *matched_gt_class);
  v.matched_gt_id = task.matched_gt_id;
  return v;
}

Verdict SimulatedOracle::Answer(const VerificationTask& task) {
  const ImageRecord& image = dataset_.Image(task.image_id);
  if (task.kind == TaskKind::kBox) {
    return SimulatedVerifyBox(task, image, cfg_, rng_);
  }
  std::optional<ClassId> cls;
  if (task.matched_gt_id) {
    if (const GroundTruthObject* o = image.FindObject(*task.matched_gt_id)) {
      cls = o->class_id;
    }
  }
  return SimulatedVerifyClass(task, cls);
}

}  // namespace delr
