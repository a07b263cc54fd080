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

#include <gtest/gtest.h>

#include <deque>

#include "delr/error.h"
#include "test_util.h"

namespace delr {
namespace {

using testing::Annotation;
using testing::Categories;
using testing::Entry;
using testing::Image;
using testing::Peaked;

// Answers every task with verdicts built by `make`.
class ScriptedOracle : public Oracle {
 public:
  explicit ScriptedOracle(std::function<Verdict(const VerificationTask&)> make)
      : make_(std::move(make)) {}
  Verdict Answer(const VerificationTask& task) override {
    asked.push_back(task);
    return make_(task);
  }
  std::vector<VerificationTask> asked;

 private:
  std::function<Verdict(const VerificationTask&)> make_;
};

Verdict Keep(const VerificationTask& t) {
  return t.kind == TaskKind::kBox ? Verdict::BoxKeep(t.task_id)
                                  : Verdict::ClassKeep(t.task_id);
}

Verdict Fix(const VerificationTask& t) {
  if (t.kind == TaskKind::kBox) {
    BoundingBox b = t.pseudo_box;
    b.w -= 1;
    return Verdict::BoxCorrect(t.task_id, b);
  }
  return Verdict::ClassCorrect(t.task_id, (t.pseudo_class + 1) % 3);
}

class EngineTest : public ::testing::Test {
 protected:
  EngineTest()
      : dataset_({Image("i1", 400, 400), Image("i2", 400, 400)},
                 Categories(3)) {}

  void AddPseudo(const std::string& id, BoundingBox box, double u_loc,
                 double u_cls = 0.0, double conf = 0.8) {
    pool_.Add(Entry(Annotation(id, "i1", box, Peaked(3, 0, conf), u_loc, u_cls)));
  }
  void AddLabeled(const std::string& id, BoundingBox box, double u_cls,
                  double conf = 0.8) {
    PoolEntry e = Entry(Annotation(id, "i1", box, Peaked(3, 0, conf), 0.0, u_cls));
    e.box_state = BoxState::kVerifiedKept;
    pool_.Add(std::move(e));
  }
  EngineState State() {
    return EngineState{pool_, ledger_, dataset_, cfg_, CostTable::VocLike(), 0};
  }

  Dataset dataset_;
  ExperimentConfig cfg_;
  PoolState pool_;
  CostLedger ledger_;
};

TEST_F(EngineTest, WorstCase) {
  EXPECT_EQ(WorstCaseCost(TaskKind::kBox, CostTable::VocLike()), 36600);
  EXPECT_EQ(WorstCaseCost(TaskKind::kClass, CostTable::VocLike()), 28700);
  EXPECT_EQ(WorstCaseCost(TaskKind::kClass, CostTable::CocoLike()), 40700);
}

TEST_F(EngineTest, KeepChargesVerifyOnly) {
  AddPseudo("a", {10, 10, 50, 50}, 1.0);
  ledger_.Grant(40000, 0);
  EngineState s = State();
  ScriptedOracle oracle(Keep);
  const PassReport r = RunBoxPass(s, {"a"}, oracle);
  EXPECT_EQ(ledger_.spent_loc_ms(), 1600);
  EXPECT_EQ(r.keeps, 1);
  EXPECT_EQ(r.stopped_reason, StopReason::kQueueExhausted);
  EXPECT_EQ(pool_.At("a").box_state, BoxState::kVerifiedKept);
}

TEST_F(EngineTest, StopsBeforeIssuingWhenWorstCaseDoesNotFit) {
  AddPseudo("a", {10, 10, 50, 50}, 1.0);
  ledger_.Grant(30000, 0);
  EngineState s = State();
  ScriptedOracle oracle(Keep);
  const PassReport r = RunBoxPass(s, {"a"}, oracle);
  EXPECT_TRUE(oracle.asked.empty());
  EXPECT_EQ(r.tasks_issued, 0);
  EXPECT_EQ(r.stopped_reason, StopReason::kBudgetExhausted);
  EXPECT_EQ(ledger_.spent_loc_ms(), 0);
}

TEST_F(EngineTest, ThreeCorrections) {
  AddPseudo("a", {10, 10, 50, 50}, 3.0);
  AddPseudo("b", {100, 10, 50, 50}, 2.0);
  AddPseudo("c", {200, 10, 50, 50}, 1.0);
  ledger_.Grant(3 * 36600, 0);
  EngineState s = State();
  ScriptedOracle oracle(Fix);
  const PassReport r = RunBoxPass(s, {"a", "b", "c"}, oracle);
  EXPECT_EQ(r.corrections, 3);
  EXPECT_EQ(ledger_.spent_loc_ms(), 109800);
  EXPECT_EQ(r.spent_ms, 109800);
  EXPECT_EQ(pool_.At("b").annotation.box, (BoundingBox{100, 10, 49, 50}));
}

TEST_F(EngineTest, IssuesInRankedOrder) {
  AddPseudo("a", {10, 10, 50, 50}, 1.0);
  AddPseudo("b", {100, 10, 50, 50}, 3.0);
  ledger_.Grant(100000, 0);
  EngineState s = State();
  ScriptedOracle oracle(Keep);
  RunBoxPass(s, {"b", "a"}, oracle);
  ASSERT_EQ(oracle.asked.size(), 2u);
  EXPECT_EQ(oracle.asked[0].annotation_id, "b");
  EXPECT_EQ(oracle.asked[0].task_id, "b0-0");
  EXPECT_EQ(oracle.asked[1].task_id, "b0-1");
}

TEST_F(EngineTest, WrongClassCosts28700) {
  AddLabeled("a", {10, 10, 50, 50}, 0.5);
  ledger_.Grant(0, 28700);
  EngineState s = State();
  ScriptedOracle oracle(Fix);
  const PassReport r = RunClassPass(s, {"a"}, oracle);
  EXPECT_EQ(ledger_.spent_cls_ms(), 28700);
  EXPECT_EQ(r.corrections, 1);
  const PoolEntry& e = pool_.At("a");
  EXPECT_EQ(e.class_state, ClassState::kCorrected);
  EXPECT_EQ(e.annotation.PredictedClass(), 1);
  EXPECT_EQ(e.annotation.confidence, 1.0);
}

TEST_F(EngineTest, TrustedCostsNothing) {
  // Median of {0.1, 0.5, 0.9} is 0.5; "t" is confident and below it.
  AddLabeled("t", {10, 10, 50, 50}, 0.1, 0.95);
  AddLabeled("m", {100, 10, 50, 50}, 0.5, 0.95);
  AddLabeled("h", {200, 10, 50, 50}, 0.9, 0.95);
  ledger_.Grant(0, 1000000);
  EngineState s = State();
  ScriptedOracle oracle(Keep);
  const PassReport r = RunClassPass(s, {"h", "m", "t"}, oracle);
  EXPECT_DOUBLE_EQ(r.tau_cls, 0.5);
  EXPECT_EQ(r.trusted, 1);
  EXPECT_EQ(pool_.At("t").class_state, ClassState::kTrusted);
  EXPECT_EQ(r.tasks_issued, 2);
  EXPECT_EQ(ledger_.spent_cls_ms(), 2 * 2700);
  for (const auto& t : oracle.asked) EXPECT_NE(t.annotation_id, "t");
}

TEST_F(EngineTest, TrustStillAppliesAfterBudgetRunsOut) {
  AddLabeled("h", {200, 10, 50, 50}, 0.9, 0.95);
  AddLabeled("m", {100, 10, 50, 50}, 0.5, 0.95);
  AddLabeled("t", {10, 10, 50, 50}, 0.1, 0.95);
  ledger_.Grant(0, 28700);
  EngineState s = State();
  ScriptedOracle oracle(Keep);
  const PassReport r = RunClassPass(s, {"h", "m", "t"}, oracle);
  EXPECT_EQ(r.tasks_issued, 1);
  EXPECT_EQ(r.stopped_reason, StopReason::kBudgetExhausted);
  EXPECT_EQ(pool_.At("t").class_state, ClassState::kTrusted);
  EXPECT_EQ(pool_.At("m").class_state, ClassState::kPseudo);
}

TEST_F(EngineTest, ClassPassSkipsUnlabeled) {
  AddPseudo("p", {10, 10, 50, 50}, 1.0, 0.3);
  AddLabeled("l", {100, 10, 50, 50}, 0.5);
  ledger_.Grant(0, 1000000);
  EngineState s = State();
  ScriptedOracle oracle(Keep);
  const PassReport r = RunClassPass(s, {"p", "l"}, oracle);
  EXPECT_EQ(r.tasks_issued, 1);
  EXPECT_EQ(oracle.asked[0].annotation_id, "l");
  EXPECT_EQ(pool_.At("p").class_state, ClassState::kPseudo);
}

TEST_F(EngineTest, ReservationBlocksSecondTaskUntilAnswered) {
  AddPseudo("a", {10, 10, 50, 50}, 2.0);
  AddPseudo("b", {100, 10, 50, 50}, 1.0);
  ledger_.Grant(40000, 0);
  EngineState s = State();
  VerificationPass pass(s, TaskKind::kBox, {"a", "b"});
  const auto t1 = pass.NextTask();
  ASSERT_TRUE(t1);
  EXPECT_FALSE(pass.NextTask());
  EXPECT_FALSE(pass.finished());
  pass.Submit(Verdict::BoxKeep(t1->task_id));
  const auto t2 = pass.NextTask();
  ASSERT_TRUE(t2);
  EXPECT_EQ(t2->annotation_id, "b");
  pass.Submit(Verdict::BoxDrop(t2->task_id));
  EXPECT_FALSE(pass.NextTask());
  EXPECT_EQ(pass.report().stopped_reason, StopReason::kQueueExhausted);
  EXPECT_EQ(ledger_.spent_loc_ms(), 3200);
}

TEST_F(EngineTest, ReleaseReturnsTaskToHead) {
  AddPseudo("a", {10, 10, 50, 50}, 2.0);
  AddPseudo("b", {100, 10, 50, 50}, 1.0);
  ledger_.Grant(1000000, 0);
  EngineState s = State();
  VerificationPass pass(s, TaskKind::kBox, {"a", "b"});
  const auto t1 = pass.NextTask();
  pass.Release(t1->task_id);
  EXPECT_FALSE(pass.IsOutstanding(t1->task_id));
  const auto t2 = pass.NextTask();
  EXPECT_EQ(t2->annotation_id, "a");
  EXPECT_NE(t2->task_id, t1->task_id);
  EXPECT_THROW(pass.Submit(Verdict::BoxKeep(t1->task_id)), PreconditionError);
}

TEST_F(EngineTest, RejectsMismatchedVerdict) {
  AddPseudo("a", {10, 10, 50, 50}, 2.0);
  ledger_.Grant(1000000, 0);
  EngineState s = State();
  VerificationPass pass(s, TaskKind::kBox, {"a"});
  const auto t = pass.NextTask();
  EXPECT_THROW(pass.Submit(Verdict::ClassKeep(t->task_id)), ValidationError);
  EXPECT_TRUE(pass.IsOutstanding(t->task_id));
  EXPECT_EQ(ledger_.spent_total_ms(), 0);
}

TEST_F(EngineTest, CorrectionOntoLabeledBoxMerges) {
  AddLabeled("first", {10, 10, 50, 50}, 0.5);
  AddPseudo("dup", {12, 10, 50, 50}, 1.0);
  ledger_.Grant(100000, 0);
  EngineState s = State();
  ScriptedOracle oracle([](const VerificationTask& t) {
    return Verdict::BoxCorrect(t.task_id, {10, 10, 50, 50});
  });
  const PassReport r = RunBoxPass(s, {"dup"}, oracle);
  EXPECT_EQ(r.merged, 1);
  EXPECT_EQ(pool_.At("dup").box_state, BoxState::kDropped);
  EXPECT_EQ(pool_.At("first").box_state, BoxState::kVerifiedKept);
  EXPECT_EQ(pool_.CountLabeled(), 1u);
}

TEST(BaselineTest, StopsWhenNextImageDoesNotFit) {
  std::vector<ImageRecord> imgs;
  for (int i = 0; i < 5; ++i) imgs.push_back(Image(std::to_string(i), 10, 10));
  std::vector<const ImageRecord*> ptrs;
  for (const auto& img : imgs) ptrs.push_back(&img);
  CostLedger l;
  l.Grant(2 * 102600 + 50000, 0);
  std::vector<Id> charged;
  const PassReport r =
      FullAnnotationBaseline(ptrs, l, CostTable::VocLike(), &charged);
  EXPECT_EQ(r.tasks_issued, 2);
  EXPECT_EQ(r.stopped_reason, StopReason::kBudgetExhausted);
  EXPECT_EQ(charged, (std::vector<Id>{"0", "1"}));
  EXPECT_EQ(l.spent_loc_ms(), 205200);
}

TEST(BaselineTest, QueueExhausted) {
  const ImageRecord img = Image("x", 10, 10);
  const ImageRecord* ptrs[] = {&img};
  CostLedger l;
  l.Grant(1000000, 0);
  EXPECT_EQ(FullAnnotationBaseline(ptrs, l, CostTable::VocLike()).stopped_reason,
            StopReason::kQueueExhausted);
}

TEST(BaselineTest, BudgetForFractionOfImages) {
  std::vector<ImageRecord> imgs;
  for (int i = 0; i < 1000; ++i) imgs.push_back(Image(std::to_string(i), 10, 10));
  std::vector<const ImageRecord*> ptrs;
  for (const auto& img : imgs) ptrs.push_back(&img);
  CostLedger l;
  l.Grant(ImageFractionBudgetMs(16511, 0.025, CostTable::VocLike()), 0);
  const PassReport r = FullAnnotationBaseline(ptrs, l, CostTable::VocLike());
  EXPECT_EQ(r.tasks_issued, 413);
  EXPECT_EQ(l.spent_loc_ms(), 42373800);
}

TEST(NamesTest, RoundTrip) {
  for (StopReason s : {StopReason::kNone, StopReason::kBudgetExhausted,
                       StopReason::kQueueExhausted}) {
    EXPECT_EQ(ParseStopReason(ToString(s)), s);
  }
  for (PassKind k : {PassKind::kBox, PassKind::kClass, PassKind::kFull}) {
    EXPECT_EQ(ParsePassKind(ToString(k)), k);
  }
}

}  // namespace
}  // namespace delr
