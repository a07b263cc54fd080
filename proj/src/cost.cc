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

#include "delr/cost.h"

#include <cmath>
#include <string>

#include "delr/error.h"

namespace delr {

std::string_view ToString(Action a) {
  switch (a) {
    case Action::kVerifyBox: return "VerifyBox";
    case Action::kDrawBox: return "DrawBox";
    case Action::kVerifyClass: return "VerifyClass";
    case Action::kAssignClass: return "AssignClass";
    case Action::kFullImage: return "FullImage";
  }
  return "?";
}

Action ParseAction(std::string_view s) {
  for (Action a : {Action::kVerifyBox, Action::kDrawBox, Action::kVerifyClass,
                   Action::kAssignClass, Action::kFullImage}) {
    if (ToString(a) == s) return a;
  }
  throw ValidationError("unknown action \"" + std::string(s) + "\"");
}

CostTable CostTable::VocLike() { return CostTable{}; }

CostTable CostTable::CocoLike() {
  CostTable t;
  t.assign_class_ms = 38000;
  t.full_image_ms = 346000;
  return t;
}

void CostTable::Validate() const {
  if (verify_box_ms <= 0 || verify_class_ms <= 0 || draw_box_ms <= 0 ||
      assign_class_ms <= 0 || full_image_ms <= 0) {
    throw ValidationError("cost table entries must be positive");
  }
}

CostTable CostProfile::Table() const {
  switch (kind) {
    case ProfileKind::kVocLike: return CostTable::VocLike();
    case ProfileKind::kCocoLike: return CostTable::CocoLike();
    case ProfileKind::kCustom: return custom;
  }
  return CostTable::VocLike();
}

Millis CostOf(Action action, const CostTable& table) {
  switch (action) {
    case Action::kVerifyBox: return table.verify_box_ms;
    case Action::kDrawBox: return table.draw_box_ms;
    case Action::kVerifyClass: return table.verify_class_ms;
    case Action::kAssignClass: return table.assign_class_ms;
    case Action::kFullImage: return table.full_image_ms;
  }
  return 0;
}

Millis ImageFractionBudgetMs(std::int64_t num_images, double fraction,
                             const CostTable& table) {
  const auto images = static_cast<std::int64_t>(
      std::llround(static_cast<double>(num_images) * fraction));
  return images * table.full_image_ms;
}

double MillisToHours(Millis ms) { return static_cast<double>(ms) / 3.6e6; }

void CostLedger::Grant(Millis loc_ms, Millis cls_ms) {
  if (loc_ms < 0 || cls_ms < 0) {
    throw PreconditionError("budget grants must be non-negative");
  }
  budget_loc_ms_ += loc_ms;
  budget_cls_ms_ += cls_ms;
  grants_.push_back({entries_.size(), loc_ms, cls_ms});
}

void CostLedger::TransferLocToCls(Millis ms) {
  if (ms < 0 || ms > remaining_loc_ms()) {
    throw PreconditionError("transfer exceeds remaining localization budget");
  }
  if (ms == 0) return;
  budget_loc_ms_ -= ms;
  budget_cls_ms_ += ms;
  grants_.push_back({entries_.size(), -ms, ms});
}

void CostLedger::TransferClsToLoc(Millis ms) {
  if (ms < 0 || ms > remaining_cls_ms()) {
    throw PreconditionError("transfer exceeds remaining recognition budget");
  }
  if (ms == 0) return;
  budget_cls_ms_ -= ms;
  budget_loc_ms_ += ms;
  grants_.push_back({entries_.size(), ms, -ms});
}

void CostLedger::Charge(Account account, std::string task_id, Action action,
                        Millis cost_ms) {
  if (cost_ms < 0) throw PreconditionError("negative charge");
  if (cost_ms > Remaining(account)) {
    throw PreconditionError("charge of " + std::to_string(cost_ms) +
                            " ms for task " + task_id +
                            " exceeds the remaining budget");
  }
  (account == Account::kLoc ? spent_loc_ms_ : spent_cls_ms_) += cost_ms;
  entries_.push_back({std::move(task_id), action, cost_ms, account});
}

CostLedger CostLedger::FromRecords(std::vector<LedgerEntry> entries,
                                   std::vector<LedgerGrant> grants,
                                   std::vector<std::string> notes) {
  CostLedger ledger;
  std::size_t g = 0;
  auto apply_grants = [&](std::size_t at) {
    while (g < grants.size() && grants[g].at_entry == at) {
      ledger.budget_loc_ms_ += grants[g].loc_delta;
      ledger.budget_cls_ms_ += grants[g].cls_delta;
      if (ledger.budget_loc_ms_ < ledger.spent_loc_ms_ ||
          ledger.budget_cls_ms_ < ledger.spent_cls_ms_) {
        throw ValidationError("ledger grant leaves an account overdrawn");
      }
      ++g;
    }
  };
  for (std::size_t i = 0; i < entries.size(); ++i) {
    apply_grants(i);
    const LedgerEntry& e = entries[i];
    if (e.cost_ms < 0 || e.cost_ms > ledger.Remaining(e.account)) {
      throw ValidationError("ledger entry " + std::to_string(i) +
                            " overdraws its account");
    }
    (e.account == Account::kLoc ? ledger.spent_loc_ms_
                                : ledger.spent_cls_ms_) += e.cost_ms;
  }
  apply_grants(entries.size());
  if (g != grants.size()) {
    throw ValidationError("ledger grants are not ordered by position");
  }
  ledger.entries_ = std::move(entries);
  ledger.grants_ = std::move(grants);
  ledger.notes_ = std::move(notes);
  return ledger;
}

LedgerAudit AuditLedger(const CostLedger& ledger) {
  LedgerAudit audit;
  Millis budget_loc = 0;
  Millis budget_cls = 0;
  std::size_t g = 0;
  const auto& grants = ledger.grants();
  const auto& entries = ledger.entries();
  auto check = [&] {
    if (audit.replayed_loc_ms > budget_loc) ++audit.violations;
    if (audit.replayed_cls_ms > budget_cls) ++audit.violations;
  };
  for (std::size_t i = 0; i <= entries.size(); ++i) {
    while (g < grants.size() && grants[g].at_entry == i) {
      budget_loc += grants[g].loc_delta;
      budget_cls += grants[g].cls_delta;
      ++g;
      check();
    }
    if (i == entries.size()) break;
    (entries[i].account == Account::kLoc ? audit.replayed_loc_ms
                                         : audit.replayed_cls_ms) +=
        entries[i].cost_ms;
    check();
  }
  if (audit.replayed_loc_ms != ledger.spent_loc_ms() ||
      audit.replayed_cls_ms != ledger.spent_cls_ms()) {
    ++audit.violations;
  }
  return audit;
}

}  // namespace delr
