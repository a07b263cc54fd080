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

#include "delr/scheduler.h"

#include <gtest/gtest.h>

#include <numeric>
#include <stdexcept>

#include "delr/error.h"
#include "delr/synth.h"

namespace delr {
namespace {

ExperimentConfig Config(std::vector<Millis> budgets) {
  ExperimentConfig cfg;
  cfg.cycle_budgets_ms = std::move(budgets);
  return cfg;
}

Dataset Scenario(int images, std::uint64_t seed = 0) {
  ScenarioParams p;
  p.num_images = images;
  p.seed = seed;
  return GenerateScenario(p);
}

TEST(SchedulerTest, PerfectDetectorKeepsEverything) {
  const Dataset d = Scenario(30);
  MockProvider provider(NoiseParams{}, MockCoupling{}, 1);
  const ExperimentResult r =
      RunExperiment(d, Config({1'000'000'000}), provider);
  const CycleReport& c = r.reports[0];
  EXPECT_EQ(c.box_pass.tasks_issued, static_cast<int>(d.num_objects()));
  EXPECT_EQ(c.box_pass.keeps, c.box_pass.tasks_issued);
  EXPECT_EQ(c.class_pass.corrections, 0);
  EXPECT_EQ(c.metrics.iou_buckets->correct, 1.0);
  EXPECT_EQ(*c.metrics.cls_acc_given_correct_loc, 1.0);
  EXPECT_EQ(c.metrics.acquired_objects, static_cast<std::int64_t>(d.num_objects()));
}

TEST(SchedulerTest, ZeroBudgetStopsBothPasses) {
  const Dataset d = Scenario(20);
  MockProvider provider(CalibratedNoise(), MockCoupling{}, 1);
  const ExperimentResult r = RunExperiment(d, Config({0}), provider);
  EXPECT_EQ(r.reports[0].box_pass.stopped_reason, StopReason::kBudgetExhausted);
  EXPECT_EQ(r.reports[0].class_pass.stopped_reason,
            StopReason::kBudgetExhausted);
  EXPECT_EQ(r.ledger.spent_total_ms(), 0);
  EXPECT_EQ(r.reports[0].metrics, r.reports[0].metrics_before);
}

TEST(SchedulerTest, NoCyclesMeansNoReports) {
  const Dataset d = Scenario(5);
  MockProvider provider(CalibratedNoise(), MockCoupling{}, 1);
  const ExperimentResult r = RunExperiment(d, Config({}), provider);
  EXPECT_TRUE(r.reports.empty());
  EXPECT_EQ(r.ledger.budget_total_ms(), 0);
}

TEST(SchedulerTest, Deterministic) {
  const Dataset d = Scenario(60, 3);
  const ExperimentConfig cfg = Config({2'000'000, 2'000'000, 2'000'000});
  MockProvider p1(CalibratedNoise(), MockCoupling{}, 9);
  MockProvider p2(CalibratedNoise(), MockCoupling{}, 9);
  const ExperimentResult a = RunExperiment(d, cfg, p1);
  const ExperimentResult b = RunExperiment(d, cfg, p2);
  EXPECT_EQ(a.reports, b.reports);
  EXPECT_EQ(a.snapshots, b.snapshots);
  EXPECT_EQ(a.ledger, b.ledger);
}

TEST(SchedulerTest, SpendNeverExceedsBudgets) {
  const Dataset d = Scenario(80, 2);
  const std::vector<Millis> budgets = {700'000, 1'300'000, 0, 900'000};
  MockProvider provider(CalibratedNoise(), MockCoupling{}, 4);
  const ExperimentResult r = RunExperiment(d, Config(budgets), provider);
  const Millis total = std::accumulate(budgets.begin(), budgets.end(), Millis{0});
  EXPECT_LE(r.ledger.spent_total_ms(), total);
  EXPECT_EQ(r.ledger.budget_total_ms(), total);
  EXPECT_EQ(AuditLedger(r.ledger).violations, 0u);
  Millis prefix = 0;
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    prefix += budgets[i];
    const LedgerSnapshot& s = r.reports[i].ledger_snapshot;
    EXPECT_LE(s.spent_loc_ms + s.spent_cls_ms, prefix);
    EXPECT_LE(s.spent_loc_ms, s.budget_loc_ms);
    EXPECT_LE(s.spent_cls_ms, s.budget_cls_ms);
  }
}

class FailingProvider : public PredictionProvider {
 public:
  explicit FailingProvider(int fail_at) : fail_at_(fail_at) {}
  BranchPair Predict(const Dataset& d, int cycle, double v) override {
    if (cycle == fail_at_) throw std::runtime_error("detector crashed");
    return inner_.Predict(d, cycle, v);
  }

 private:
  int fail_at_;
  MockProvider inner_{CalibratedNoise(), MockCoupling{}, 5};
};

TEST(SchedulerTest, ProviderFailureLeavesStateUnchanged) {
  const Dataset d = Scenario(40);
  FailingProvider provider(1);
  ActiveLearningLoop loop(d, Config({}), provider);
  loop.RunCycle(1'000'000);
  const PoolState pool = loop.pool();
  const CostLedger ledger = loop.ledger();
  EXPECT_THROW(loop.RunCycle(1'000'000), std::runtime_error);
  EXPECT_EQ(loop.pool(), pool);
  EXPECT_EQ(loop.ledger(), ledger);
  EXPECT_EQ(loop.cycles_run(), 1);
  EXPECT_THROW(loop.RunCycle(-1), PreconditionError);
}

TEST(SchedulerTest, RefreshSuppressesLabeledObjects) {
  const Dataset d = Scenario(20);
  MockProvider provider(NoiseParams{}, MockCoupling{}, 1);
  ActiveLearningLoop loop(d, Config({}), provider);
  loop.RunCycle(1'000'000'000);
  const CycleReport second = loop.RunCycle(1'000'000'000);
  EXPECT_EQ(second.added, 0);
  EXPECT_EQ(second.suppressed, static_cast<std::int64_t>(d.num_objects()));
  EXPECT_EQ(second.box_pass.tasks_issued, 0);
}

TEST(SchedulerTest, UntouchedEntriesAreReplacedAndIdsPrefixed) {
  const Dataset d = Scenario(20);
  MockProvider provider(CalibratedNoise(), MockCoupling{}, 1);
  ActiveLearningLoop loop(d, Config({}), provider);
  const CycleReport first = loop.RunCycle(0);
  for (const PoolEntry& e : loop.pool().entries()) {
    ASSERT_EQ(e.annotation.id.rfind("c0/", 0), 0u);
  }
  const CycleReport second = loop.RunCycle(0);
  EXPECT_EQ(second.replaced, first.added);
  for (const PoolEntry& e : loop.pool().entries()) {
    ASSERT_EQ(e.annotation.id.rfind("c1/", 0), 0u);
  }
}

TEST(SchedulerTest, CarriedBudgetIsResplit) {
  // Few objects, lots of budget: most of the first grant is left over.
  const Dataset d = Scenario(2);
  MockProvider provider(CalibratedNoise(), MockCoupling{}, 1);
  ActiveLearningLoop loop(d, Config({}), provider);
  loop.RunCycle(10'000'000);
  const Millis carried = loop.ledger().remaining_ms();
  ASSERT_GT(carried, 0);
  ASSERT_EQ(loop.ledger().remaining_loc_ms(), 0);
  const std::size_t n0 = loop.ledger().grants().size();
  const std::size_t at = loop.ledger().entries().size();
  loop.RunCycle(0);
  const auto& g = loop.ledger().grants();
  ASSERT_GE(g.size(), n0 + 2);
  EXPECT_EQ(g[n0], (LedgerGrant{at, 0, 0}));
  EXPECT_EQ(g[n0 + 1], (LedgerGrant{at, carried / 2, -(carried / 2)}));
  EXPECT_EQ(loop.ledger().budget_total_ms(), 10'000'000);
  EXPECT_EQ(AuditLedger(loop.ledger()).violations, 0u);
}

TEST(SchedulerTest, DelrAcquiresMoreObjectsThanBaseline) {
  const Dataset d = Scenario(100);
  const Millis per_cycle =
      ImageFractionBudgetMs(100, 0.1, CostTable::VocLike());
  const ExperimentConfig cfg = Config({per_cycle, per_cycle, per_cycle, per_cycle});
  MockProvider provider(CalibratedNoise(), MockCoupling{}, cfg.seed);
  const ExperimentResult delr = RunExperiment(d, cfg, provider);
  const ExperimentResult base = RunBaselineExperiment(d, cfg);
  EXPECT_GT(delr.reports.back().metrics.acquired_objects,
            base.reports.back().metrics.acquired_objects);
  EXPECT_EQ(base.reports.back().box_pass.pass_kind, PassKind::kFull);
  EXPECT_EQ(base.ledger.spent_loc_ms() % 102600, 0);
}

TEST(SchedulerTest, EffectiveJitter) {
  const MockCoupling c;
  EXPECT_DOUBLE_EQ(EffectiveJitter(0.2, 0.0, c), 0.2);
  EXPECT_DOUBLE_EQ(EffectiveJitter(0.2, 0.5, c), 0.1);
  EXPECT_DOUBLE_EQ(EffectiveJitter(0.2, 1.0, c), 0.02);
}

TEST(SchedulerTest, CorrectLocImprovesAcrossCycles) {
  const Dataset d = Scenario(200);
  const Millis per_cycle =
      ImageFractionBudgetMs(200, 0.1, CostTable::VocLike());
  MockProvider provider(CalibratedNoise(), MockCoupling{}, 0);
  const ExperimentResult r = RunExperiment(
      d, Config({per_cycle, per_cycle, per_cycle, per_cycle}), provider);
  double prev = 0.0;
  for (const CycleReport& c : r.reports) {
    EXPECT_GE(c.metrics.iou_buckets->correct, c.metrics_before.iou_buckets->correct);
    EXPECT_GE(c.metrics_before.iou_buckets->correct, prev - 1e-12);
    prev = c.metrics_before.iou_buckets->correct;
  }
  EXPECT_GE(r.reports.back().metrics.iou_buckets->correct -
                r.reports.front().metrics_before.iou_buckets->correct,
            0.15);
}

}  // namespace
}  // namespace delr
