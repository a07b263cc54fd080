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

#ifndef DELR_COST_H_
#define DELR_COST_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace delr {

using Millis = std::int64_t;

enum class Action { kVerifyBox, kDrawBox, kVerifyClass, kAssignClass, kFullImage };

std::string_view ToString(Action a);
Action ParseAction(std::string_view s);

// Per-object annotation times in integer milliseconds.
struct CostTable {
  Millis verify_box_ms = 1600;
  Millis verify_class_ms = 2700;
  Millis draw_box_ms = 35000;
  Millis assign_class_ms = 26000;
  Millis full_image_ms = 102600;

  static CostTable VocLike();
  static CostTable CocoLike();

  // Throws ValidationError unless every entry is positive.
  void Validate() const;

  friend bool operator==(const CostTable&, const CostTable&) = default;
};

enum class ProfileKind { kVocLike, kCocoLike, kCustom };

struct CostProfile {
  ProfileKind kind = ProfileKind::kVocLike;
  CostTable custom;  // Only read when kind == kCustom.

  CostTable Table() const;

  friend bool operator==(const CostProfile&, const CostProfile&) = default;
};

Millis CostOf(Action action, const CostTable& table);
inline Millis CostOf(Action action, const CostProfile& profile) {
  return CostOf(action, profile.Table());
}

// Converts an image-count budget into annotation time:
// round(num_images * fraction) full-image annotations.
Millis ImageFractionBudgetMs(std::int64_t num_images, double fraction,
                             const CostTable& table);
double MillisToHours(Millis ms);

enum class Account { kLoc, kCls };

struct LedgerEntry {
  std::string task_id;
  Action action = Action::kVerifyBox;
  Millis cost_ms = 0;
  Account account = Account::kLoc;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

// Budget change applied before entry `at_entry` (i.e. after that many
// entries had been recorded).
struct LedgerGrant {
  std::size_t at_entry = 0;
  Millis loc_delta = 0;
  Millis cls_delta = 0;

  friend bool operator==(const LedgerGrant&, const LedgerGrant&) = default;
};

// Append-only spend record against decoupled localization and recognition
// budgets. Charges that would overdraw an account are refused.
class CostLedger {
 public:
  CostLedger() = default;

  // Adds budget to both accounts.
  void Grant(Millis loc_ms, Millis cls_ms);
  // Moves unspent localization budget to the recognition account.
  void TransferLocToCls(Millis ms);
  // Moves unspent recognition budget to the localization account.
  void TransferClsToLoc(Millis ms);
  // Throws PreconditionError if the charge would exceed the account budget.
  void Charge(Account account, std::string task_id, Action action,
              Millis cost_ms);
  void Note(std::string note) { notes_.push_back(std::move(note)); }

  Millis budget_total_ms() const { return budget_loc_ms_ + budget_cls_ms_; }
  Millis budget_loc_ms() const { return budget_loc_ms_; }
  Millis budget_cls_ms() const { return budget_cls_ms_; }
  Millis spent_loc_ms() const { return spent_loc_ms_; }
  Millis spent_cls_ms() const { return spent_cls_ms_; }
  Millis spent_total_ms() const { return spent_loc_ms_ + spent_cls_ms_; }
  Millis remaining_loc_ms() const { return budget_loc_ms_ - spent_loc_ms_; }
  Millis remaining_cls_ms() const { return budget_cls_ms_ - spent_cls_ms_; }
  Millis remaining_ms() const { return budget_total_ms() - spent_total_ms(); }
  Millis Remaining(Account a) const {
    return a == Account::kLoc ? remaining_loc_ms() : remaining_cls_ms();
  }

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  const std::vector<LedgerGrant>& grants() const { return grants_; }
  const std::vector<std::string>& notes() const { return notes_; }

  // Rebuilds a ledger from its serialized parts, checking every prefix.
  static CostLedger FromRecords(std::vector<LedgerEntry> entries,
                                std::vector<LedgerGrant> grants,
                                std::vector<std::string> notes);

  friend bool operator==(const CostLedger&, const CostLedger&) = default;

 private:
  Millis budget_loc_ms_ = 0;
  Millis budget_cls_ms_ = 0;
  Millis spent_loc_ms_ = 0;
  Millis spent_cls_ms_ = 0;
  std::vector<LedgerEntry> entries_;
  std::vector<LedgerGrant> grants_;
  std::vector<std::string> notes_;
};

// Replays entries and grants in order and counts prefixes at which either
// account is overdrawn, or the entry total disagrees with the spent totals.
struct LedgerAudit {
  std::size_t violations = 0;
  Millis replayed_loc_ms = 0;
  Millis replayed_cls_ms = 0;
};
LedgerAudit AuditLedger(const CostLedger& ledger);

}  // namespace delr

#endif  // DELR_COST_H_
