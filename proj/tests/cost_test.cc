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

#include <gtest/gtest.h>

#include "delr/error.h"

namespace delr {
namespace {

TEST(CostTableTest, Profiles) {
  const CostTable voc = CostTable::VocLike();
  EXPECT_EQ(voc.verify_box_ms, 1600);
  EXPECT_EQ(voc.verify_class_ms, 2700);
  EXPECT_EQ(voc.draw_box_ms, 35000);
  EXPECT_EQ(voc.assign_class_ms, 26000);
  EXPECT_EQ(voc.full_image_ms, 102600);
  const CostTable coco = CostTable::CocoLike();
  EXPECT_EQ(coco.verify_box_ms, 1600);
  EXPECT_EQ(coco.verify_class_ms, 2700);
  EXPECT_EQ(coco.draw_box_ms, 35000);
  EXPECT_EQ(coco.assign_class_ms, 38000);
  EXPECT_EQ(coco.full_image_ms, 346000);
}

TEST(CostTableTest, CostOfEachAction) {
  const CostProfile p{ProfileKind::kCocoLike, {}};
  EXPECT_EQ(CostOf(Action::kVerifyBox, p), 1600);
  EXPECT_EQ(CostOf(Action::kVerifyClass, p), 2700);
  EXPECT_EQ(CostOf(Action::kDrawBox, p), 35000);
  EXPECT_EQ(CostOf(Action::kAssignClass, p), 38000);
  EXPECT_EQ(CostOf(Action::kFullImage, p), 346000);
  CostProfile custom{ProfileKind::kCustom, {1, 2, 3, 4, 5}};
  EXPECT_EQ(CostOf(Action::kFullImage, custom), 5);
}

TEST(CostTableTest, RejectsNonPositive) {
  CostTable t;
  t.draw_box_ms = 0;
  EXPECT_THROW(t.Validate(), ValidationError);
  EXPECT_NO_THROW(CostTable::VocLike().Validate());
}

TEST(CostTableTest, ActionNames) {
  for (Action a : {Action::kVerifyBox, Action::kDrawBox, Action::kVerifyClass,
                   Action::kAssignClass, Action::kFullImage}) {
    EXPECT_EQ(ParseAction(ToString(a)), a);
  }
  EXPECT_THROW(ParseAction("Nap"), ValidationError);
}

TEST(BudgetTest, ImageFraction) {
  // 2.5% of 16511 images rounds to 413 full annotations.
  const Millis ms = ImageFractionBudgetMs(16511, 0.025, CostTable::VocLike());
  EXPECT_EQ(ms, 413 * 102600);
  EXPECT_EQ(ms, 42373800);
  EXPECT_NEAR(MillisToHours(ms), 11.77, 0.005);
  EXPECT_EQ(ImageFractionBudgetMs(100, 0.1, CostTable::VocLike()), 1026000);
  EXPECT_EQ(ImageFractionBudgetMs(0, 0.5, CostTable::VocLike()), 0);
}

TEST(LedgerTest, ChargeAndRefuse) {
  CostLedger l;
  l.Grant(2000, 3000);
  l.Charge(Account::kLoc, "b0-0", Action::kVerifyBox, 1600);
  EXPECT_EQ(l.remaining_loc_ms(), 400);
  EXPECT_THROW(l.Charge(Account::kLoc, "b0-1", Action::kVerifyBox, 1600),
               PreconditionError);
  l.Charge(Account::kCls, "c0-0", Action::kVerifyClass, 2700);
  EXPECT_EQ(l.spent_total_ms(), 4300);
  EXPECT_EQ(l.remaining_ms(), 700);
  EXPECT_EQ(l.entries().size(), 2u);
}

TEST(LedgerTest, Transfers) {
  CostLedger l;
  l.Grant(1000, 0);
  l.TransferLocToCls(400);
  EXPECT_EQ(l.budget_loc_ms(), 600);
  EXPECT_EQ(l.budget_cls_ms(), 400);
  l.TransferClsToLoc(100);
  EXPECT_EQ(l.budget_loc_ms(), 700);
  EXPECT_THROW(l.TransferLocToCls(701), PreconditionError);
  EXPECT_THROW(l.TransferClsToLoc(301), PreconditionError);
  EXPECT_EQ(l.budget_total_ms(), 1000);
  EXPECT_EQ(l.grants().size(), 3u);
}

TEST(LedgerTest, RejectsNegativeGrants) {
  CostLedger l;
  EXPECT_THROW(l.Grant(-1, 0), PreconditionError);
  EXPECT_THROW(l.Charge(Account::kLoc, "x", Action::kVerifyBox, -5),
               PreconditionError);
}

TEST(LedgerTest, RecordsRoundTripAndAudit) {
  CostLedger l;
  l.Grant(40000, 30000);
  l.Charge(Account::kLoc, "b0-0", Action::kVerifyBox, 1600);
  l.Charge(Account::kLoc, "b0-0", Action::kDrawBox, 35000);
  l.TransferLocToCls(3400);
  l.Charge(Account::kCls, "c0-0", Action::kVerifyClass, 2700);
  l.Note("n");
  const CostLedger r = CostLedger::FromRecords(l.entries(), l.grants(), l.notes());
  EXPECT_EQ(r, l);
  const LedgerAudit a = AuditLedger(l);
  EXPECT_EQ(a.violations, 0u);
  EXPECT_EQ(a.replayed_loc_ms, 36600);
  EXPECT_EQ(a.replayed_cls_ms, 2700);
}

TEST(LedgerTest, FromRecordsRejectsOverdraw) {
  std::vector<LedgerEntry> entries = {
      {"b0-0", Action::kVerifyBox, 1600, Account::kLoc}};
  // The grant arrives after the entry, so the first prefix is overdrawn.
  std::vector<LedgerGrant> grants = {{1, 2000, 0}};
  EXPECT_THROW(CostLedger::FromRecords(entries, grants, {}), ValidationError);
  grants = {{0, 2000, 0}};
  EXPECT_NO_THROW(CostLedger::FromRecords(entries, grants, {}));
}

}  // namespace
}  // namespace delr
