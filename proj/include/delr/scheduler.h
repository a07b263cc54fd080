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

#ifndef DELR_SCHEDULER_H_
#define DELR_SCHEDULER_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "delr/config.h"
#include "delr/cost.h"
#include "delr/metrics.h"
#include "delr/pool.h"
#include "delr/query_engine.h"
#include "delr/synth.h"
#include "delr/uncertainty.h"

namespace delr {

struct LedgerSnapshot {
  Millis budget_loc_ms = 0;
  Millis budget_cls_ms = 0;
  Millis spent_loc_ms = 0;
  Millis spent_cls_ms = 0;
  std::int64_t num_entries = 0;

  friend bool operator==(const LedgerSnapshot&,
                         const LedgerSnapshot&) = default;
};

struct CycleReport {
  int cycle_index = 0;
  std::string pool_snapshot_ref;
  PassReport box_pass;
  PassReport class_pass;
  // Pool after the provider refresh, before any verification this cycle.
  MetricsBundle metrics_before;
  MetricsBundle metrics;
  LedgerSnapshot ledger_snapshot;
  double verified_fraction = 0.0;  // Input to the provider this cycle.
  std::int64_t added = 0;          // New pseudo entries from the refresh.
  std::int64_t replaced = 0;       // Untouched entries dropped by the refresh.
  std::int64_t suppressed = 0;     // Predictions overlapping labeled entries.

  friend bool operator==(const CycleReport&, const CycleReport&) = default;
};

using BranchPair = std::pair<BranchOutput, BranchOutput>;

// Stand-in for the detector being trained. Returns both branches' outputs:
// branch 1 on the image, branch 2 on its horizontal flip.
class PredictionProvider {
 public:
  virtual ~PredictionProvider() = default;
  virtual BranchPair Predict(const Dataset& dataset, int cycle,
                             double verified_fraction) = 0;
};

// Jitter shrinks as labels accumulate: j(v) = j0 * max(1 - alpha * v, floor).
struct MockCoupling {
  double alpha = 1.0;
  double floor = 0.1;

  friend bool operator==(const MockCoupling&, const MockCoupling&) = default;
};

double EffectiveJitter(double base_jitter, double verified_fraction,
                       const MockCoupling& coupling);

class MockProvider : public PredictionProvider {
 public:
  MockProvider(NoiseParams base, MockCoupling coupling, std::uint64_t seed)
      : base_(base), coupling_(coupling), seed_(seed) {}

  BranchPair Predict(const Dataset& dataset, int cycle,
                     double verified_fraction) override;

 private:
  NoiseParams base_;
  MockCoupling coupling_;
  std::uint64_t seed_;
};

// Annotations the provider contributes this cycle: scored, filtered, with
// ids prefixed by the cycle so they stay unique across refreshes.
std::vector<PseudoAnnotation> PreparePseudoLabels(const Dataset& dataset,
                                                  const BranchPair& branches,
                                                  const ExperimentConfig& cfg,
                                                  int cycle);

// Fraction of ground-truth objects with a kept or corrected pool entry.
double VerifiedFraction(const PoolState& pool, const Dataset& dataset);

// Drives the score -> filter -> rank -> box pass -> class pass loop.
class ActiveLearningLoop {
 public:
  ActiveLearningLoop(const Dataset& dataset, ExperimentConfig cfg,
                     PredictionProvider& provider);

  // Runs one cycle with `cycle_budget_ms` of fresh budget. If the provider
  // throws, the pool and ledger are left unchanged and the error propagates.
  CycleReport RunCycle(Millis cycle_budget_ms);

  const PoolState& pool() const { return pool_; }
  const CostLedger& ledger() const { return ledger_; }
  int cycles_run() const { return cycle_; }

 private:
  const Dataset& dataset_;
  ExperimentConfig cfg_;
  PredictionProvider& provider_;
  PoolState pool_;
  CostLedger ledger_;
  int cycle_ = 0;
};

struct ExperimentResult {
  std::vector<CycleReport> reports;
  std::vector<PoolState> snapshots;  // Pool after each cycle.
  CostLedger ledger;
};

ExperimentResult RunExperiment(const Dataset& dataset,
                               const ExperimentConfig& cfg,
                               PredictionProvider& provider);

// Full-annotation comparator over the same cycle budgets. Images are taken in
// dataset order; each cycle's report carries the baseline pass as box_pass.
ExperimentResult RunBaselineExperiment(const Dataset& dataset,
                                       const ExperimentConfig& cfg);

}  // namespace delr

#endif  // DELR_SCHEDULER_H_
