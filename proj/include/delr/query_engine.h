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

#ifndef DELR_QUERY_ENGINE_H_
#define DELR_QUERY_ENGINE_H_

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delr/config.h"
#include "delr/cost.h"
#include "delr/oracle.h"
#include "delr/pool.h"
#include "delr/types.h"

namespace delr {

enum class PassKind { kBox, kClass, kFull };
enum class StopReason { kNone, kBudgetExhausted, kQueueExhausted };

std::string_view ToString(PassKind k);
std::string_view ToString(StopReason r);
PassKind ParsePassKind(std::string_view s);
StopReason ParseStopReason(std::string_view s);

struct PassReport {
  PassKind pass_kind = PassKind::kBox;
  int tasks_issued = 0;
  int keeps = 0;
  int drops = 0;
  int corrections = 0;
  int trusted = 0;  // Class pass: accepted without asking.
  int merged = 0;   // Entries dropped as duplicates of an earlier entry.
  Millis spent_ms = 0;
  StopReason stopped_reason = StopReason::kNone;
  double tau_cls = 0.0;  // Class pass: median u_cls at pass start.

  friend bool operator==(const PassReport&, const PassReport&) = default;
};

// Shared state a verification pass mutates. The pass is the single writer.
struct EngineState {
  PoolState& pool;
  CostLedger& ledger;
  const Dataset& dataset;
  const ExperimentConfig& cfg;
  CostTable costs;
  int cycle = 0;
};

// Worst-case cost reserved before issuing a task of this kind.
Millis WorstCaseCost(TaskKind kind, const CostTable& costs);

// Applies one verdict: charges the ledger, updates the pool entry, appends
// history and merges exact duplicates. This is the only path that mutates the
// pool in response to an oracle, whether simulated, human or replayed.
void ApplyVerdict(EngineState& state, const VerificationTask& task,
                  const Verdict& verdict, PassReport& report);

// A budgeted verification pass over ranked annotation ids. Tasks are issued
// in ranked order and may be answered later (human oracle), so budget is
// reserved for each outstanding task at its worst-case cost.
class VerificationPass {
 public:
  // For the class pass, tau_cls is the median u_cls taken over the eligible
  // entries among `ranked_ids` at construction.
  VerificationPass(EngineState& state, TaskKind kind,
                   std::vector<Id> ranked_ids);

  // Next task, or nullopt if none can be issued now. Class entries that
  // satisfy the trust rule are accepted here at zero cost.
  std::optional<VerificationTask> NextTask();
  // Throws PreconditionError for a task id that is not outstanding and
  // ValidationError for a verdict that does not fit its task.
  void Submit(const Verdict& verdict);
  // Returns an unanswered task to the head of the queue.
  void Release(const std::string& task_id);

  bool finished() const;
  bool IsOutstanding(const std::string& task_id) const;
  const VerificationTask* Outstanding(const std::string& task_id) const;
  const PassReport& report() const { return report_; }
  TaskKind kind() const { return kind_; }
  Account account() const {
    return kind_ == TaskKind::kBox ? Account::kLoc : Account::kCls;
  }

 private:
  bool Eligible(const PoolEntry& e) const;
  bool Trusted(const PoolEntry& e) const;
  void AcceptTrusted(PoolEntry& e);
  Millis Available() const;
  void Stop(StopReason reason);

  EngineState& state_;
  TaskKind kind_;
  std::deque<Id> pending_;
  std::map<std::string, VerificationTask> outstanding_;
  Millis reserved_ms_ = 0;
  int next_task_number_ = 0;
  PassReport report_;
};

// Runs a pass to completion against an oracle that answers immediately.
PassReport RunBoxPass(EngineState& state, std::vector<Id> ranked_ids,
                      Oracle& oracle);
PassReport RunClassPass(EngineState& state, std::vector<Id> ranked_ids,
                        Oracle& oracle);

// Conventional comparator: annotates whole images at full_image_ms each,
// charged to the localization account, until the budget runs out. Ids of
// charged images are appended to `charged`.
PassReport FullAnnotationBaseline(std::span<const ImageRecord* const> images,
                                  CostLedger& ledger, const CostTable& costs,
                                  std::vector<Id>* charged = nullptr);

}  // namespace delr

#endif  // DELR_QUERY_ENGINE_H_
