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

#include "delr/service.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "delr/error.h"
#include "delr/metrics.h"
#include "delr/selection.h"
#include "httplib.h"

namespace delr {
namespace {

std::string_view ToString(ServiceEvent::Type t) {
  switch (t) {
    case ServiceEvent::Type::kIssue: return "issue";
    case ServiceEvent::Type::kSubmit: return "submit";
    case ServiceEvent::Type::kRelease: return "release";
    case ServiceEvent::Type::kFinish: return "finish";
  }
  return "?";
}

ServiceEvent::Type ParseEventType(const std::string& s) {
  if (s == "issue") return ServiceEvent::Type::kIssue;
  if (s == "submit") return ServiceEvent::Type::kSubmit;
  if (s == "release") return ServiceEvent::Type::kRelease;
  if (s == "finish") return ServiceEvent::Type::kFinish;
  throw ValidationError("unknown service event \"" + s + "\"");
}

}  // namespace

std::string_view ToString(ServicePhase p) {
  switch (p) {
    case ServicePhase::kBox: return "box";
    case ServicePhase::kClass: return "class";
    case ServicePhase::kFinished: return "finished";
  }
  return "?";
}

Json ServiceLogToJson(const std::vector<ServiceEvent>& events, int cycle) {
  Json list = Json::array();
  for (const ServiceEvent& e : events) {
    Json j = {{"type", ToString(e.type)}};
    if (!e.task_id.empty()) j["task_id"] = e.task_id;
    if (!e.session.empty()) j["session"] = e.session;
    if (e.verdict) j["verdict"] = VerdictToJson(*e.verdict);
    list.push_back(std::move(j));
  }
  return {{"format", "delr.service_log"},
          {"version", 1},
          {"cycle", cycle},
          {"events", list}};
}

std::vector<ServiceEvent> ServiceLogFromJson(const Json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "delr.service_log") {
    throw ValidationError("not a service log document");
  }
  std::vector<ServiceEvent> out;
  const Json& events = doc.at("events");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Json& j = events[i];
    const std::string where = "events[" + std::to_string(i) + "]";
    if (!j.is_object() || !j.contains("type")) {
      throw ValidationError(where + ": needs a type");
    }
    ServiceEvent e;
    e.type = ParseEventType(j.at("type").get<std::string>());
    if (e.type != ServiceEvent::Type::kFinish) {
      if (!j.contains("task_id")) throw ValidationError(where + ": no task_id");
      e.task_id = j.at("task_id").get<std::string>();
    }
    e.session = j.value("session", "");
    if (e.type == ServiceEvent::Type::kSubmit) {
      if (!j.contains("verdict")) throw ValidationError(where + ": no verdict");
      e.verdict = VerdictFromJson(j.at("verdict"), e.task_id);
    }
    out.push_back(std::move(e));
  }
  return out;
}

VerificationService::VerificationService(const Dataset& dataset,
                                         ExperimentConfig cfg, PoolState pool,
                                         Millis cycle_budget_ms, int cycle,
                                         ServiceOptions options)
    : dataset_(dataset),
      cfg_(std::move(cfg)),
      pool_(std::move(pool)),
      state_{pool_, ledger_, dataset_, cfg_, CostTable{}, cycle},
      options_(std::move(options)),
      cycle_(cycle) {
  cfg_.Validate();
  state_.costs = cfg_.dataset_profile.Table();
  if (cycle_budget_ms < 0) {
    throw PreconditionError("cycle budget must be non-negative");
  }
  const auto loc_ms = static_cast<Millis>(
      static_cast<double>(cycle_budget_ms) * cfg_.loc_budget_fraction);
  ledger_.Grant(loc_ms, cycle_budget_ms - loc_ms);
  std::vector<const PoolEntry*> queue;
  for (const PoolEntry& e : pool_.entries()) {
    if (e.box_state == BoxState::kPseudo) queue.push_back(&e);
  }
  box_pass_.emplace(state_, TaskKind::kBox, RankIds(queue, RankKey::kLoc));
}

std::chrono::steady_clock::time_point VerificationService::Now() const {
  return options_.clock ? options_.clock() : std::chrono::steady_clock::now();
}

VerificationPass& VerificationService::CurrentPass() {
  return phase_ == ServicePhase::kBox ? *box_pass_ : *class_pass_;
}

void VerificationService::ReleaseLocked(const std::string& task_id) {
  for (auto it = leases_.begin(); it != leases_.end(); ++it) {
    if (it->second.task_id != task_id) continue;
    leases_.erase(it);
    break;
  }
  CurrentPass().Release(task_id);
  expired_.insert(task_id);
  events_.push_back({ServiceEvent::Type::kRelease, "", task_id, std::nullopt});
}

void VerificationService::ExpireLeases() {
  const auto now = Now();
  std::vector<std::string> stale;
  for (const auto& [session, lease] : leases_) {
    if (now - lease.issued_at >= options_.lease_timeout) {
      stale.push_back(lease.task_id);
    }
  }
  for (const std::string& id : stale) ReleaseLocked(id);
}

void VerificationService::Advance() {
  if (phase_ == ServicePhase::kBox && box_pass_->finished()) {
    const Millis leftover = ledger_.remaining_loc_ms();
    if (leftover > 0) ledger_.TransferLocToCls(leftover);
    std::vector<const PoolEntry*> queue;
    for (const PoolEntry& e : pool_.entries()) {
      if (e.IsLabeled() && e.class_state == ClassState::kPseudo) {
        queue.push_back(&e);
      }
    }
    class_pass_.emplace(state_, TaskKind::kClass,
                        RankIds(queue, RankKey::kCls));
    phase_ = ServicePhase::kClass;
  }
  if (phase_ == ServicePhase::kClass && class_pass_->finished()) {
    phase_ = ServicePhase::kFinished;
  }
}

std::optional<VerificationTask> VerificationService::Issue(
    const std::string& session) {
  for (;;) {
    Advance();
    if (phase_ == ServicePhase::kFinished) {
      // Ending a pass can still accept trusted classes, so it is logged.
      if (events_.empty() || events_.back().type != ServiceEvent::Type::kFinish) {
        events_.push_back(
            {ServiceEvent::Type::kFinish, session, "", std::nullopt});
      }
      return std::nullopt;
    }
    VerificationPass& pass = CurrentPass();
    std::optional<VerificationTask> task = pass.NextTask();
    if (task) {
      leases_[session] = {task->task_id, Now()};
      events_.push_back(
          {ServiceEvent::Type::kIssue, session, task->task_id, std::nullopt});
      return task;
    }
    // Not finished means others hold tasks that may still free budget.
    if (!pass.finished()) return std::nullopt;
  }
}

VerificationService::NextResult VerificationService::Next(
    const std::string& session) {
  std::lock_guard<std::mutex> lock(mu_);
  ExpireLeases();
  NextResult r;
  if (auto it = leases_.find(session); it != leases_.end()) {
    r.status = NextResult::Status::kTask;
    r.task = *CurrentPass().Outstanding(it->second.task_id);
    return r;
  }
  r.task = Issue(session);
  if (r.task) {
    r.status = NextResult::Status::kTask;
  } else if (phase_ == ServicePhase::kFinished) {
    r.status = NextResult::Status::kFinished;
    r.reason = class_pass_->report().stopped_reason;
  } else {
    r.status = NextResult::Status::kWait;
  }
  return r;
}

VerificationService::SubmitStatus VerificationService::SubmitLocked(
    const std::string& session, const Verdict& verdict) {
  if (completed_.count(verdict.task_id) != 0) return SubmitStatus::kDuplicate;
  if (expired_.count(verdict.task_id) != 0) return SubmitStatus::kExpired;
  if (phase_ == ServicePhase::kFinished ||
      !CurrentPass().IsOutstanding(verdict.task_id)) {
    return SubmitStatus::kUnknownTask;
  }
  CurrentPass().Submit(verdict);
  for (auto it = leases_.begin(); it != leases_.end(); ++it) {
    if (it->second.task_id != verdict.task_id) continue;
    leases_.erase(it);
    break;
  }
  completed_.insert(verdict.task_id);
  events_.push_back({ServiceEvent::Type::kSubmit, session, verdict.task_id,
                     verdict});
  Advance();
  return SubmitStatus::kAccepted;
}

VerificationService::SubmitStatus VerificationService::Submit(
    const std::string& session, const Verdict& verdict) {
  std::lock_guard<std::mutex> lock(mu_);
  ExpireLeases();
  if (verdict.matched_gt_id) {
    throw ValidationError("human verdicts carry no ground-truth match");
  }
  return SubmitLocked(session, verdict);
}

void VerificationService::Replay(VerificationService& fresh,
                                 const std::vector<ServiceEvent>& events) {
  std::lock_guard<std::mutex> lock(fresh.mu_);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const ServiceEvent& e = events[i];
    const std::string where = "event " + std::to_string(i) + ": ";
    switch (e.type) {
      case ServiceEvent::Type::kIssue: {
        fresh.leases_.erase(e.session);
        std::optional<VerificationTask> task = fresh.Issue(e.session);
        if (!task || task->task_id != e.task_id) {
          throw ValidationError(where + "expected task " + e.task_id);
        }
        break;
      }
      case ServiceEvent::Type::kSubmit:
        if (!e.verdict ||
            fresh.SubmitLocked(e.session, *e.verdict) !=
                SubmitStatus::kAccepted) {
          throw ValidationError(where + "verdict for " + e.task_id +
                                " was not accepted");
        }
        break;
      case ServiceEvent::Type::kRelease:
        if (fresh.phase_ == ServicePhase::kFinished ||
            !fresh.CurrentPass().IsOutstanding(e.task_id)) {
          throw ValidationError(where + e.task_id + " is not outstanding");
        }
        fresh.ReleaseLocked(e.task_id);
        break;
      case ServiceEvent::Type::kFinish:
        if (fresh.Issue(e.session) ||
            fresh.phase_ != ServicePhase::kFinished) {
          throw ValidationError(where + "passes are not over");
        }
        break;
    }
  }
}

Json VerificationService::Status() const {
  std::lock_guard<std::mutex> lock(mu_);
  PassReport total;
  for (const std::optional<VerificationPass>* p : {&box_pass_, &class_pass_}) {
    if (!p->has_value()) continue;
    const PassReport& r = (*p)->report();
    total.tasks_issued += r.tasks_issued;
    total.keeps += r.keeps;
    total.drops += r.drops;
    total.corrections += r.corrections;
    total.trusted += r.trusted;
    total.merged += r.merged;
  }
  const StateCounts c = CountStates(pool_);
  Json j = {
      {"cycle", cycle_},
      {"phase", ToString(phase_)},
      {"tasks_answered", total.tasks_issued},
      {"keeps", total.keeps},
      {"drops", total.drops},
      {"corrections", total.corrections},
      {"trusted", total.trusted},
      {"merged", total.merged},
      {"outstanding", leases_.size()},
      {"ledger",
       {{"budget_loc_ms", ledger_.budget_loc_ms()},
        {"budget_cls_ms", ledger_.budget_cls_ms()},
        {"spent_loc_ms", ledger_.spent_loc_ms()},
        {"spent_cls_ms", ledger_.spent_cls_ms()},
        {"remaining_ms", ledger_.remaining_ms()},
        {"spent_hours", MillisToHours(ledger_.spent_total_ms())}}},
      {"counts",
       {{"box",
         {{"Pseudo", c.box_pseudo},
          {"VerifiedKept", c.box_verified_kept},
          {"Corrected", c.box_corrected},
          {"Dropped", c.box_dropped}}},
        {"class",
         {{"Pseudo", c.cls_pseudo},
          {"Trusted", c.cls_trusted},
          {"VerifiedKept", c.cls_verified_kept},
          {"Corrected", c.cls_corrected}}}}},
      {"box_pass", PassReportToJson(box_pass_->report())}};
  if (class_pass_) j["class_pass"] = PassReportToJson(class_pass_->report());
  if (phase_ == ServicePhase::kFinished) {
    j["stopped_reason"] = ToString(class_pass_->report().stopped_reason);
  }
  return j;
}

Json VerificationService::TaskJson(const VerificationTask& task,
                                   bool rasters) const {
  Json j = TaskToJson(task);
  const ImageRecord& img = dataset_.Image(task.image_id);
  if (rasters && img.raster_path) {
    const BoundingBox& r = task.region;
    char crop[128];
    std::snprintf(crop, sizeof(crop), "%.17g,%.17g,%.17g,%.17g", r.x, r.y, r.w,
                  r.h);
    j["crop_url"] = "/api/v1/images/" + img.id + "?crop=" + crop;
  }
  return j;
}

ServicePhase VerificationService::phase() const {
  std::lock_guard<std::mutex> lock(mu_);
  return phase_;
}

PoolState VerificationService::pool() const {
  std::lock_guard<std::mutex> lock(mu_);
  return pool_;
}

CostLedger VerificationService::ledger() const {
  std::lock_guard<std::mutex> lock(mu_);
  return ledger_;
}

std::vector<ServiceEvent> VerificationService::events() const {
  std::lock_guard<std::mutex> lock(mu_);
  return events_;
}

PassReport VerificationService::box_report() const {
  std::lock_guard<std::mutex> lock(mu_);
  return box_pass_->report();
}

PassReport VerificationService::class_report() const {
  std::lock_guard<std::mutex> lock(mu_);
  return class_pass_ ? class_pass_->report() : PassReport{};
}

// ------------------------------------------------------------------ http

namespace {

void SendJson(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& error,
               const std::string& detail = "") {
  Json j = {{"error", error}};
  if (!detail.empty()) j["detail"] = detail;
  SendJson(res, status, j);
}

std::string SessionOf(const httplib::Request& req) {
  if (req.has_header("X-Session")) return req.get_header_value("X-Session");
  if (req.has_param("session")) return req.get_param_value("session");
  return "default";
}

std::optional<BoundingBox> ParseCrop(const std::string& s) {
  BoundingBox b;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf,%lf%c", &b.x, &b.y, &b.w, &b.h,
                  &tail) != 4 ||
      !b.HasPositiveArea()) {
    return std::nullopt;
  }
  return b;
}

std::string MimeType(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

}  // namespace

void RegisterRoutes(httplib::Server& server, VerificationService& service,
                    std::optional<std::filesystem::path> images_dir,
                    std::function<void()> on_change) {
  const bool rasters = images_dir.has_value();

  server.Get("/api/v1/tasks/next", [&service, rasters](
                                       const httplib::Request& req,
                                       httplib::Response& res) {
    const auto r = service.Next(SessionOf(req));
    using S = VerificationService::NextResult::Status;
    switch (r.status) {
      case S::kTask:
        SendJson(res, 200, service.TaskJson(*r.task, rasters));
        break;
      case S::kWait:
        res.status = 204;
        break;
      case S::kFinished:
        SendJson(res, 410, {{"error", "no more tasks"},
                            {"reason", ToString(r.reason)}});
        break;
    }
  });

  server.Post(R"(/api/v1/tasks/([^/]+)/verdict)",
              [&service, on_change](const httplib::Request& req,
                                    httplib::Response& res) {
                const std::string task_id = req.matches[1];
                Verdict v;
                try {
                  v = VerdictFromJson(Json::parse(req.body), task_id);
                } catch (const Json::exception& e) {
                  SendError(res, 422, "malformed verdict", e.what());
                  return;
                } catch (const ValidationError& e) {
                  SendError(res, 422, "malformed verdict", e.what());
                  return;
                }
                using S = VerificationService::SubmitStatus;
                S status = S::kAccepted;
                try {
                  status = service.Submit(SessionOf(req), v);
                } catch (const ValidationError& e) {
                  SendError(res, 422, "invalid verdict", e.what());
                  return;
                }
                switch (status) {
                  case S::kAccepted:
                    if (on_change) on_change();
                    SendJson(res, 200,
                             {{"accepted", true}, {"task_id", task_id}});
                    break;
                  case S::kUnknownTask:
                    SendError(res, 409, "unknown task", task_id);
                    break;
                  case S::kExpired:
                    SendError(res, 409, "lease expired", task_id);
                    break;
                  case S::kDuplicate:
                    SendError(res, 409, "duplicate verdict", task_id);
                    break;
                }
              });

  server.Get("/api/v1/status",
             [&service](const httplib::Request&, httplib::Response& res) {
               SendJson(res, 200, service.Status());
             });

  server.Get(R"(/api/v1/images/([^/]+))", [&service, images_dir](
                                              const httplib::Request& req,
                                              httplib::Response& res) {
    const ImageRecord* img = service.dataset().FindImage(req.matches[1].str());
    if (img == nullptr) {
      SendError(res, 404, "unknown image");
      return;
    }
    if (!images_dir || !img->raster_path) {
      SendError(res, 404, "no raster for this image");
      return;
    }
    if (req.has_param("crop") && !ParseCrop(req.get_param_value("crop"))) {
      SendError(res, 422, "crop must be x,y,w,h with positive size");
      return;
    }
    const std::filesystem::path path = *images_dir / *img->raster_path;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      SendError(res, 404, "raster file missing");
      return;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    // Raster bytes are served whole; the client crops to the region.
    res.status = 200;
    res.set_content(ss.str(), MimeType(path));
  });
}

}  // namespace delr
