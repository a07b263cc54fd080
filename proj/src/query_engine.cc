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

#include "delr/query_engine.h"

#include <string>

#include "delr/error.h"
#include "delr/geometry.h"
#include "delr/selection.h"

namespace delr {

std::string_view ToString(PassKind k) {
  switch (k) {
    case PassKind::kBox: return "Box";
    case PassKind::kClass: return "Class";
    case PassKind::kFull: return "Full";
  }
  return "?";
}

std::string_view ToString(StopReason r) {
  switch (r) {
    case StopReason::kNone: return "None";
    case StopReason::kBudgetExhausted: return "BudgetExhausted";
    case StopReason::kQueueExhausted: return "QueueExhausted";
  }
  return "?";
}

PassKind ParsePassKind(std::string_view s) {
  for (PassKind k : {PassKind::kBox, PassKind::kClass, PassKind::kFull}) {
    if (ToString(k) == s) return k;
  }
  throw ValidationError("unknown pass kind \"" + std::string(s) + "\"");
}

StopReason ParseStopReason(std::string_view s) {
  for (StopReason r : {StopReason::kNone, StopReason::kBudgetExhausted,
                       StopReason::kQueueExhausted}) {
    if (ToString(r) == s) return r;
  }
  throw ValidationError("unknown stop reason \"" + std::string(s) + "\"");
}

Millis WorstCaseCost(TaskKind kind, const CostTable& costs) {
  return kind == TaskKind::kBox ? costs.verify_box_ms + costs.draw_box_ms
                                : costs.verify_class_ms + costs.assign_class_ms;
}

namespace {

// Drops `entry` if an earlier labeled entry of the same image already holds
// the identical box and class.
bool MergeIfDuplicate(EngineState& state, PoolEntry& entry) {
  if (!entry.IsLabeled()) return false;
  const ClassId cls = entry.annotation.PredictedClass();
  for (const PoolEntry& other : state.pool.entries()) {
    if (&other == &entry || !other.IsLabeled()) continue;
    if (other.annotation.image_id != entry.annotation.image_id) continue;
    if (other.annotation.box != entry.annotation.box) continue;
    if (other.annotation.PredictedClass() != cls) continue;
    entry.box_state = BoxState::kDropped;
    entry.history.push_back({state.cycle, "Merged", 0});
    state.ledger.Note("merged " + entry.annotation.id + " into " +
                      other.annotation.id);
    return true;
  }
  return false;
}

}  // namespace

void ApplyVerdict(EngineState& state, const VerificationTask& task,
                  const Verdict& verdict, PassReport& report) {
  PoolEntry& entry = state.pool.AtMutable(task.annotation_id);
  const ImageRecord& image = state.dataset.Image(entry.annotation.image_id);
  ValidateVerdict(verdict, task, image, state.dataset.num_classes());

  const CostTable& c = state.costs;
  if (task.kind == TaskKind::kBox) {
    if (entry.box_state != BoxState::kPseudo) {
      throw PreconditionError("box of " + entry.annotation.id +
                              " is no longer pseudo");
    }
    const bool correct = verdict.answer == Answer::kBoxCorrect;
    const Millis cost = c.verify_box_ms + (correct ? c.draw_box_ms : 0);
    if (cost > state.ledger.remaining_loc_ms()) {
      throw PreconditionError("box verdict exceeds the remaining budget");
    }
    state.ledger.Charge(Account::kLoc, task.task_id, Action::kVerifyBox,
                        c.verify_box_ms);
    if (correct) {
      state.ledger.Charge(Account::kLoc, task.task_id, Action::kDrawBox,
                          c.draw_box_ms);
    }
    switch (verdict.answer) {
      case Answer::kBoxKeep:
        entry.box_state = BoxState::kVerifiedKept;
        entry.matched_gt_id = verdict.matched_gt_id;
        ++report.keeps;
        break;
      case Answer::kBoxDrop:
        entry.box_state = BoxState::kDropped;
        ++report.drops;
        break;
      default:
        entry.annotation.box = *verdict.new_box;
        entry.box_state = BoxState::kCorrected;
        entry.matched_gt_id = verdict.matched_gt_id;
        ++report.corrections;
        break;
    }
    entry.history.push_back(
        {state.cycle, std::string(ToString(verdict.answer)), cost});
    ++report.tasks_issued;
    report.spent_ms += cost;
  } else {
    if (!entry.IsLabeled() || entry.class_state != ClassState::kPseudo) {
      throw PreconditionError("class of " + entry.annotation.id +
                              " is not awaiting verification");
    }
    const bool correct = verdict.answer == Answer::kClassCorrect;
    const Millis cost = c.verify_class_ms + (correct ? c.assign_class_ms : 0);
    if (cost > state.ledger.remaining_cls_ms()) {
      throw PreconditionError("class verdict exceeds the remaining budget");
    }
    state.ledger.Charge(Account::kCls, task.task_id, Action::kVerifyClass,
                        c.verify_class_ms);
    if (correct) {
      state.ledger.Charge(Account::kCls, task.task_id, Action::kAssignClass,
                          c.assign_class_ms);
      entry.annotation.class_dist = ClassDistribution::OneHot(
          state.dataset.num_classes(), *verdict.new_class);
      entry.annotation.confidence = 1.0;
      entry.class_state = ClassState::kCorrected;
      ++report.corrections;
    } else {
      entry.class_state = ClassState::kVerifiedKept;
      ++report.keeps;
    }
    entry.history.push_back(
        {state.cycle, std::string(ToString(verdict.answer)), cost});
    ++report.tasks_issued;
    report.spent_ms += cost;
  }
  if (MergeIfDuplicate(state, entry)) ++report.merged;
}

VerificationPass::VerificationPass(EngineState& state, TaskKind kind,
                                   std::vector<Id> ranked_ids)
    : state_(state), kind_(kind), pending_(ranked_ids.begin(), ranked_ids.end()) {
  report_.pass_kind = kind == TaskKind::kBox ? PassKind::kBox : PassKind::kClass;
  if (kind_ == TaskKind::kClass) {
    std::vector<const PoolEntry*> eligible;
    for (const Id& id : ranked_ids) {
      const PoolEntry* e = state_.pool.Find(id);
      if (e != nullptr && Eligible(*e)) eligible.push_back(e);
    }
    report_.tau_cls = eligible.empty() ? 0.0 : MedianUCls(eligible);
  }
}

bool VerificationPass::Eligible(const PoolEntry& e) const {
  if (kind_ == TaskKind::kBox) return e.box_state == BoxState::kPseudo;
  return e.IsLabeled() && e.class_state == ClassState::kPseudo;
}

bool VerificationPass::Trusted(const PoolEntry& e) const {
  return e.annotation.confidence > state_.cfg.conf_trust &&
         e.annotation.u_cls < report_.tau_cls;
}

void VerificationPass::AcceptTrusted(PoolEntry& e) {
  e.class_state = ClassState::kTrusted;
  e.history.push_back({state_.cycle, "ClassTrusted", 0});
  ++report_.trusted;
}

Millis VerificationPass::Available() const {
  return state_.ledger.Remaining(account()) - reserved_ms_;
}

void VerificationPass::Stop(StopReason reason) {
  report_.stopped_reason = reason;
  // Trust costs nothing, so it still applies to entries the budget could not
  // reach.
  if (kind_ == TaskKind::kClass) {
    for (const Id& id : pending_) {
      PoolEntry* e = state_.pool.FindMutable(id);
      if (e != nullptr && Eligible(*e) && Trusted(*e)) AcceptTrusted(*e);
    }
  }
  pending_.clear();
}

std::optional<VerificationTask> VerificationPass::NextTask() {
  if (report_.stopped_reason != StopReason::kNone) return std::nullopt;
  const Millis worst = WorstCaseCost(kind_, state_.costs);
  if (Available() < worst) {
    if (outstanding_.empty()) Stop(StopReason::kBudgetExhausted);
    return std::nullopt;
  }
  while (!pending_.empty()) {
    PoolEntry* e = state_.pool.FindMutable(pending_.front());
    if (e == nullptr || !Eligible(*e)) {
      pending_.pop_front();
      continue;
    }
    if (kind_ == TaskKind::kClass && Trusted(*e)) {
      AcceptTrusted(*e);
      pending_.pop_front();
      continue;
    }
    break;
  }
  if (pending_.empty()) {
    if (outstanding_.empty()) Stop(StopReason::kQueueExhausted);
    return std::nullopt;
  }

  PoolEntry& e = state_.pool.AtMutable(pending_.front());
  pending_.pop_front();
  const ImageRecord& image = state_.dataset.Image(e.annotation.image_id);
  VerificationTask task;
  task.task_id = std::string(kind_ == TaskKind::kBox ? "b" : "c") +
                 std::to_string(state_.cycle) + "-" +
                 std::to_string(next_task_number_++);
  task.kind = kind_;
  task.image_id = e.annotation.image_id;
  task.annotation_id = e.annotation.id;
  task.pseudo_box = e.annotation.box;
  task.region = EnlargeRegion(e.annotation.box, state_.cfg.enlarge_factor, image);
  task.pseudo_class = e.annotation.PredictedClass();
  task.issued_cycle = state_.cycle;
  if (kind_ == TaskKind::kClass) task.matched_gt_id = e.matched_gt_id;
  reserved_ms_ += worst;
  outstanding_.emplace(task.task_id, task);
  return task;
}

void VerificationPass::Submit(const Verdict& verdict) {
  auto it = outstanding_.find(verdict.task_id);
  if (it == outstanding_.end()) {
    throw PreconditionError("task " + verdict.task_id + " is not outstanding");
  }
  const VerificationTask task = it->second;
  const ImageRecord& image = state_.dataset.Image(task.image_id);
  ValidateVerdict(verdict, task, image, state_.dataset.num_classes());
  outstanding_.erase(it);
  reserved_ms_ -= WorstCaseCost(kind_, state_.costs);
  ApplyVerdict(state_, task, verdict, report_);
}

void VerificationPass::Release(const std::string& task_id) {
  auto it = outstanding_.find(task_id);
  if (it == outstanding_.end()) return;
  pending_.push_front(it->second.annotation_id);
  outstanding_.erase(it);
  reserved_ms_ -= WorstCaseCost(kind_, state_.costs);
}

bool VerificationPass::finished() const {
  return report_.stopped_reason != StopReason::kNone;
}

bool VerificationPass::IsOutstanding(const std::string& task_id) const {
  return outstanding_.count(task_id) != 0;
}

const VerificationTask* VerificationPass::Outstanding(
    const std::string& task_id) const {
  auto it = outstanding_.find(task_id);
  return it == outstanding_.end() ? nullptr : &it->second;
}

namespace {

PassReport RunPass(EngineState& state, TaskKind kind,
                   std::vector<Id> ranked_ids, Oracle& oracle) {
  VerificationPass pass(state, kind, std::move(ranked_ids));
  while (auto task = pass.NextTask()) {
    pass.Submit(oracle.Answer(*task));
  }
  return pass.report();
}

}  // namespace

PassReport RunBoxPass(EngineState& state, std::vector<Id> ranked_ids,
                      Oracle& oracle) {
  return RunPass(state, TaskKind::kBox, std::move(ranked_ids), oracle);
}

PassReport RunClassPass(EngineState& state, std::vector<Id> ranked_ids,
                        Oracle& oracle) {
  return RunPass(state, TaskKind::kClass, std::move(ranked_ids), oracle);
}

PassReport FullAnnotationBaseline(std::span<const ImageRecord* const> images,
                                  CostLedger& ledger, const CostTable& costs,
                                  std::vector<Id>* charged) {
  PassReport report;
  report.pass_kind = PassKind::kFull;
  std::size_t i = 0;
  for (;;) {
    if (ledger.remaining_loc_ms() < costs.full_image_ms) {
      report.stopped_reason = StopReason::kBudgetExhausted;
      break;
    }
    if (i == images.size()) {
      report.stopped_reason = StopReason::kQueueExhausted;
      break;
    }
    const ImageRecord& img = *images[i++];
    ledger.Charge(Account::kLoc, "full-" + img.id, Action::kFullImage,
                  costs.full_image_ms);
    ++report.tasks_issued;
    ++report.keeps;
    report.spent_ms += costs.full_image_ms;
    if (charged != nullptr) charged->push_back(img.id);
  }
  return report;
}

}  // namespace delr
