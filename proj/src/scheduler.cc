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

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "delr/error.h"
#include "delr/geometry.h"
#include "delr/oracle.h"
#include "delr/rng.h"
#include "delr/selection.h"

namespace delr {

double EffectiveJitter(double base_jitter, double verified_fraction,
                       const MockCoupling& coupling) {
  return base_jitter *
         std::max(1.0 - coupling.alpha * verified_fraction, coupling.floor);
}

BranchPair MockProvider::Predict(const Dataset& dataset, int cycle,
                                 double verified_fraction) {
  NoiseParams noise = base_;
  noise.jitter_frac =
      EffectiveJitter(base_.jitter_frac, verified_fraction, coupling_);
  const std::uint64_t cycle_seed =
      RngStream::Derive(seed_, "provider.mock", static_cast<std::uint64_t>(cycle))
          .NextU64();
  return MockDetect(dataset, noise, cycle_seed);
}

std::vector<PseudoAnnotation> PreparePseudoLabels(const Dataset& dataset,
                                                  const BranchPair& branches,
                                                  const ExperimentConfig& cfg,
                                                  int cycle) {
  std::vector<PseudoAnnotation> scored =
      ScoreDataset(dataset, branches.first, branches.second);
  std::vector<PseudoAnnotation> kept = FilterByConfidence(scored, cfg.tau_conf);
  const std::string prefix = "c" + std::to_string(cycle) + "/";
  for (PseudoAnnotation& a : kept) a.id = prefix + a.id;
  return kept;
}

double VerifiedFraction(const PoolState& pool, const Dataset& dataset) {
  const std::size_t total = dataset.num_objects();
  if (total == 0) return 0.0;
  return std::min(1.0, static_cast<double>(pool.CountLabeled()) /
                           static_cast<double>(total));
}

ActiveLearningLoop::ActiveLearningLoop(const Dataset& dataset,
                                       ExperimentConfig cfg,
                                       PredictionProvider& provider)
    : dataset_(dataset), cfg_(std::move(cfg)), provider_(provider) {
  cfg_.Validate();
}

CycleReport ActiveLearningLoop::RunCycle(Millis cycle_budget_ms) {
  if (cycle_budget_ms < 0) {
    throw PreconditionError("cycle budget must be non-negative");
  }
  CycleReport report;
  report.cycle_index = cycle_;
  report.verified_fraction = VerifiedFraction(pool_, dataset_);

  // Everything that can fail happens before the pool is touched.
  const BranchPair branches =
      provider_.Predict(dataset_, cycle_, report.verified_fraction);
  std::vector<PseudoAnnotation> fresh =
      PreparePseudoLabels(dataset_, branches, cfg_, cycle_);
  for (const PseudoAnnotation& a : fresh) {
    if (dataset_.FindImage(a.image_id) == nullptr) {
      throw ValidationError("annotation \"" + a.id +
                            "\" references unknown image \"" + a.image_id +
                            "\"");
    }
  }

  report.replaced = static_cast<std::int64_t>(pool_.RemoveUntouched());
  std::unordered_map<std::string, std::vector<BoundingBox>> labeled;
  for (const PoolEntry& e : pool_.entries()) {
    if (e.IsLabeled()) labeled[e.annotation.image_id].push_back(e.annotation.box);
  }
  for (PseudoAnnotation& a : fresh) {
    auto it = labeled.find(a.image_id);
    const bool covered =
        it != labeled.end() &&
        std::any_of(it->second.begin(), it->second.end(),
                    [&](const BoundingBox& b) { return Iou(a.box, b) >= kPairingIou; });
    if (covered) {
      ++report.suppressed;
      continue;
    }
    PoolEntry e;
    e.annotation = std::move(a);
    pool_.Add(std::move(e));
    ++report.added;
  }
  report.metrics_before = ComputeMetrics(pool_, dataset_, ledger_);

  // Budget carried from earlier cycles is split together with the new grant.
  const Millis carried = ledger_.remaining_ms();
  const auto loc_target = static_cast<Millis>(
      std::floor(static_cast<double>(cycle_budget_ms + carried) *
                 cfg_.loc_budget_fraction));
  const Millis loc_ms = loc_target - ledger_.remaining_loc_ms();
  if (loc_ms <= cycle_budget_ms) {
    if (loc_ms >= 0) {
      ledger_.Grant(loc_ms, cycle_budget_ms - loc_ms);
    } else {
      ledger_.Grant(0, cycle_budget_ms);
      ledger_.TransferLocToCls(-loc_ms);
    }
  } else {
    ledger_.Grant(cycle_budget_ms, 0);
    ledger_.TransferClsToLoc(loc_ms - cycle_budget_ms);
  }

  EngineState state{pool_, ledger_, dataset_, cfg_,
                    cfg_.dataset_profile.Table(), cycle_};
  SimulatedOracle oracle(
      dataset_, cfg_,
      RngStream::Derive(cfg_.seed, "oracle", static_cast<std::uint64_t>(cycle_)));

  std::vector<const PoolEntry*> box_queue;
  for (const PoolEntry& e : pool_.entries()) {
    if (e.box_state == BoxState::kPseudo) box_queue.push_back(&e);
  }
  report.box_pass = RunBoxPass(state, RankIds(box_queue, RankKey::kLoc), oracle);

  const Millis box_leftover = ledger_.remaining_loc_ms();
  if (box_leftover > 0) {
    ledger_.TransferLocToCls(box_leftover);
  }

  std::vector<const PoolEntry*> class_queue;
  for (const PoolEntry& e : pool_.entries()) {
    if (e.IsLabeled() && e.class_state == ClassState::kPseudo) {
      class_queue.push_back(&e);
    }
  }
  report.class_pass =
      RunClassPass(state, RankIds(class_queue, RankKey::kCls), oracle);

  if (ledger_.remaining_cls_ms() > 0) {
    ledger_.Note("cycle " + std::to_string(cycle_) + ": " +
                 std::to_string(ledger_.remaining_cls_ms()) +
                 " ms of recognition budget carried forward");
  }

  report.metrics = ComputeMetrics(pool_, dataset_, ledger_);
  report.ledger_snapshot = {ledger_.budget_loc_ms(), ledger_.budget_cls_ms(),
                            ledger_.spent_loc_ms(), ledger_.spent_cls_ms(),
                            static_cast<std::int64_t>(ledger_.entries().size())};
  report.pool_snapshot_ref = "pool_cycle_" + std::to_string(cycle_) + ".json";
  ++cycle_;
  return report;
}

ExperimentResult RunExperiment(const Dataset& dataset,
                               const ExperimentConfig& cfg,
                               PredictionProvider& provider) {
  ActiveLearningLoop loop(dataset, cfg, provider);
  ExperimentResult result;
  for (Millis budget : cfg.cycle_budgets_ms) {
    result.reports.push_back(loop.RunCycle(budget));
    result.snapshots.push_back(loop.pool());
  }
  result.ledger = loop.ledger();
  return result;
}

ExperimentResult RunBaselineExperiment(const Dataset& dataset,
                                       const ExperimentConfig& raw_cfg) {
  ExperimentConfig cfg = raw_cfg;
  cfg.Validate();
  const CostTable costs = cfg.dataset_profile.Table();
  ExperimentResult result;
  PoolState pool;
  std::unordered_set<std::string> charged_ids;

  for (std::size_t c = 0; c < cfg.cycle_budgets_ms.size(); ++c) {
    const int cycle = static_cast<int>(c);
    CycleReport report;
    report.cycle_index = cycle;
    report.verified_fraction = VerifiedFraction(pool, dataset);
    report.metrics_before = ComputeMetrics(pool, dataset, result.ledger);
    result.ledger.Grant(cfg.cycle_budgets_ms[c], 0);

    std::vector<const ImageRecord*> remaining;
    for (const ImageRecord& img : dataset.images()) {
      if (charged_ids.count(img.id) == 0) remaining.push_back(&img);
    }
    std::vector<Id> charged;
    report.box_pass =
        FullAnnotationBaseline(remaining, result.ledger, costs, &charged);
    report.class_pass.pass_kind = PassKind::kClass;
    for (const Id& id : charged) {
      charged_ids.insert(id);
      for (const GroundTruthObject& o : dataset.Image(id).gt_objects) {
        PoolEntry e;
        e.annotation.id = "gt/" + o.id;
        e.annotation.image_id = id;
        e.annotation.box = o.box;
        e.annotation.class_dist =
            ClassDistribution::OneHot(dataset.num_classes(), o.class_id);
        e.annotation.confidence = 1.0;
        e.annotation.paired = true;
        e.box_state = BoxState::kCorrected;
        e.class_state = ClassState::kCorrected;
        e.matched_gt_id = o.id;
        e.history.push_back({cycle, "FullImage", 0});
        pool.Add(std::move(e));
      }
    }
    report.metrics = ComputeMetrics(pool, dataset, result.ledger);
    const LedgerSnapshot snap{
        result.ledger.budget_loc_ms(), result.ledger.budget_cls_ms(),
        result.ledger.spent_loc_ms(), result.ledger.spent_cls_ms(),
        static_cast<std::int64_t>(result.ledger.entries().size())};
    report.ledger_snapshot = snap;
    report.added = static_cast<std::int64_t>(pool.size()) -
                   report.metrics_before.counts.box_corrected;
    report.pool_snapshot_ref = "pool_cycle_" + std::to_string(cycle) + ".json";
    result.reports.push_back(std::move(report));
    result.snapshots.push_back(pool);
  }
  return result;
}

}  // namespace delr
