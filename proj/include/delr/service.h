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

#ifndef DELR_SERVICE_H_
#define DELR_SERVICE_H_

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "delr/config.h"
#include "delr/cost.h"
#include "delr/io.h"
#include "delr/oracle.h"
#include "delr/pool.h"
#include "delr/query_engine.h"
#include "delr/types.h"

namespace httplib {
class Server;
}

namespace delr {

using ServiceClock = std::function<std::chrono::steady_clock::time_point()>;

struct ServiceOptions {
  std::chrono::steady_clock::duration lease_timeout = std::chrono::seconds(300);
  // Defaults to steady_clock::now.
  ServiceClock clock;
};

// Every state-changing call, in order. Replaying these reproduces the pool.
struct ServiceEvent {
  // kFinish: a request found the cycle's passes over.
  enum class Type { kIssue, kSubmit, kRelease, kFinish };
  Type type = Type::kIssue;
  std::string session;
  std::string task_id;
  std::optional<Verdict> verdict;  // kSubmit only.
  friend bool operator==(const ServiceEvent&, const ServiceEvent&) = default;
};

Json ServiceLogToJson(const std::vector<ServiceEvent>& events, int cycle);
std::vector<ServiceEvent> ServiceLogFromJson(const Json& doc);

enum class ServicePhase { kBox, kClass, kFinished };
std::string_view ToString(ServicePhase p);

// Human-oracle verification of one cycle: the box pass, then the class pass,
// over a pool that already holds this cycle's pseudo labels. Each client
// session holds at most one task; a lease not answered within the timeout
// returns the task to the head of the queue. All calls are serialized.
class VerificationService {
 public:
  VerificationService(const Dataset& dataset, ExperimentConfig cfg,
                      PoolState pool, Millis cycle_budget_ms, int cycle = 0,
                      ServiceOptions options = {});
  VerificationService(const VerificationService&) = delete;
  VerificationService& operator=(const VerificationService&) = delete;

  struct NextResult {
    enum class Status { kTask, kWait, kFinished } status = Status::kWait;
    std::optional<VerificationTask> task;
    StopReason reason = StopReason::kNone;  // kFinished only.
  };
  // The session's leased task if it has one, else a new task.
  NextResult Next(const std::string& session);

  enum class SubmitStatus { kAccepted, kUnknownTask, kExpired, kDuplicate };
  // Throws ValidationError if the verdict does not fit its task.
  SubmitStatus Submit(const std::string& session, const Verdict& verdict);

  Json Status() const;
  // Task as served over HTTP, with a crop URL when a raster is available.
  Json TaskJson(const VerificationTask& task, bool rasters) const;

  ServicePhase phase() const;
  PoolState pool() const;
  CostLedger ledger() const;
  std::vector<ServiceEvent> events() const;
  PassReport box_report() const;
  PassReport class_report() const;
  const Dataset& dataset() const { return dataset_; }

  // Replays `events` on a fresh service built from the same inputs. Throws
  // ValidationError if the log does not fit those inputs.
  static void Replay(VerificationService& fresh,
                     const std::vector<ServiceEvent>& events);

 private:
  struct Lease {
    std::string task_id;
    std::chrono::steady_clock::time_point issued_at;
  };

  VerificationPass& CurrentPass();
  void ExpireLeases();
  void Advance();
  std::optional<VerificationTask> Issue(const std::string& session);
  SubmitStatus SubmitLocked(const std::string& session, const Verdict& verdict);
  void ReleaseLocked(const std::string& task_id);
  std::chrono::steady_clock::time_point Now() const;

  const Dataset& dataset_;
  ExperimentConfig cfg_;
  PoolState pool_;
  CostLedger ledger_;
  EngineState state_;
  ServiceOptions options_;
  int cycle_;
  ServicePhase phase_ = ServicePhase::kBox;
  std::optional<VerificationPass> box_pass_;
  std::optional<VerificationPass> class_pass_;
  std::map<std::string, Lease> leases_;   // By session.
  std::set<std::string> completed_;
  std::set<std::string> expired_;
  std::vector<ServiceEvent> events_;
  mutable std::mutex mu_;
};

// Registers the /api/v1 routes. `images_dir`, when set, is where raster
// files named by ImageRecord::raster_path are looked up. `on_change` runs
// after every accepted verdict.
void RegisterRoutes(httplib::Server& server, VerificationService& service,
                    std::optional<std::filesystem::path> images_dir,
                    std::function<void()> on_change = {});

}  // namespace delr

#endif  // DELR_SERVICE_H_
