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

// delr: command-line driver.
//
//   delr synth    --out DIR [--images N] [--classes K] [--seed S]
//   delr score    --dataset F --pred1 F --pred2 F --out POOL [--tau T]
//   delr loop     --config F --out DIR
//   delr baseline --config F --out DIR
//   delr report   --in DIR [--csv]
//   delr serve    --config F [--port P] [--images-dir D] [--out DIR]
//   delr replay   --config F --log F --out DIR
//
// Exit codes: 0 success, 2 invalid input, 3 infeasible request, 1 other.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "delr/error.h"
#include "delr/io.h"
#include "delr/metrics.h"
#include "delr/pool.h"
#include "delr/scheduler.h"
#include "delr/selection.h"
#include "delr/service.h"
#include "delr/synth.h"
#include "httplib.h"

namespace fs = std::filesystem;

namespace {

void PrintWarnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

struct Setup {
  delr::RunConfig rc;
  delr::Dataset dataset;
  std::unique_ptr<delr::PredictionProvider> provider;
};

Setup LoadSetup(const std::string& config_path) {
  delr::Diagnostics diag;
  Setup s;
  s.rc = delr::LoadRunConfig(config_path, &diag);
  const delr::ProviderSpec& p = s.rc.provider;
  if (p.mode == delr::ProviderSpec::Mode::kMock) {
    s.dataset = delr::GenerateScenario(p.scenario);
    s.provider = std::make_unique<delr::MockProvider>(p.noise, p.coupling,
                                                      s.rc.experiment.seed);
  } else {
    s.dataset = delr::LoadDataset(p.dataset_path, &diag);
    s.provider = std::make_unique<delr::FileProvider>(p.cycle_predictions);
  }
  PrintWarnings(diag.warnings);
  return s;
}

void PrintReports(const std::vector<delr::CycleReport>& reports) {
  std::printf("%5s %6s %6s %6s %6s %10s %10s %7s %7s %7s %8s\n", "cycle",
              "box", "keep", "drop", "fix", "class", "trusted", "<0.3",
              "0.3-0.7", ">=0.7", "acquired");
  for (const delr::CycleReport& r : reports) {
    const auto& b = r.metrics.iou_buckets;
    std::printf("%5d %6d %6d %6d %6d %10d %10d %7.3f %7.3f %7.3f %8lld\n",
                r.cycle_index, r.box_pass.tasks_issued, r.box_pass.keeps,
                r.box_pass.drops, r.box_pass.corrections,
                r.class_pass.tasks_issued, r.class_pass.trusted,
                b ? b->incorrect : 0.0, b ? b->low : 0.0, b ? b->correct : 0.0,
                static_cast<long long>(r.metrics.acquired_objects));
  }
  if (!reports.empty()) {
    const auto& m = reports.back().metrics.budget;
    std::printf("spent: loc %.3f h, cls %.3f h\n",
                delr::MillisToHours(m.spent_loc_ms),
                delr::MillisToHours(m.spent_cls_ms));
  }
}

// Pool holding the first cycle's filtered pseudo labels.
delr::PoolState FirstCyclePool(Setup& s) {
  const delr::BranchPair branches = s.provider->Predict(s.dataset, 0, 0.0);
  return delr::NewPool(s.dataset, delr::PreparePseudoLabels(
                                      s.dataset, branches, s.rc.experiment, 0));
}

delr::Millis FirstCycleBudget(const Setup& s) {
  if (s.rc.experiment.cycle_budgets_ms.empty()) {
    throw delr::ValidationError("cycle_budgets_ms is empty");
  }
  return s.rc.experiment.cycle_budgets_ms.front();
}

void WriteServiceArtifacts(const delr::VerificationService& svc,
                           const fs::path& dir) {
  fs::create_directories(dir);
  delr::WriteJsonFile(dir / "service_log.json",
                      delr::ServiceLogToJson(svc.events(), 0));
  delr::SavePool(svc.pool(), dir / "pool.json");
  delr::WriteJsonFile(dir / "ledger.json", delr::LedgerToJson(svc.ledger()));
}

httplib::Server* g_server = nullptr;

void StopServer(int) {
  if (g_server != nullptr) g_server->stop();
}

int Run(int argc, char** argv) {
  CLI::App app{"decoupled localization/recognition query engine"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic scenario");
  std::string synth_out;
  delr::ScenarioParams sp;
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--images", sp.num_images);
  synth->add_option("--classes", sp.num_classes);
  synth->add_option("--seed", sp.seed);

  // score
  auto* score = app.add_subcommand("score", "score and filter predictions");
  std::string score_dataset, score_p1, score_p2, score_out;
  double tau = delr::ExperimentConfig{}.tau_conf;
  score->add_option("--dataset", score_dataset)->required();
  score->add_option("--pred1", score_p1)->required();
  score->add_option("--pred2", score_p2)->required();
  score->add_option("--out", score_out)->required();
  score->add_option("--tau", tau);

  // loop / baseline
  std::string config, out_dir;
  auto* loop = app.add_subcommand("loop", "run the active-learning loop");
  loop->add_option("--config", config)->required();
  loop->add_option("--out", out_dir)->required();
  auto* baseline =
      app.add_subcommand("baseline", "run the full-annotation baseline");
  baseline->add_option("--config", config)->required();
  baseline->add_option("--out", out_dir)->required();

  // report
  auto* report = app.add_subcommand("report", "summarize a run directory");
  std::string report_in;
  bool csv = false;
  report->add_option("--in", report_in)->required();
  report->add_flag("--csv", csv);

  // serve
  auto* serve = app.add_subcommand("serve", "serve the verification queue");
  int port = 8080;
  std::string images_dir;
  serve->add_option("--config", config)->required();
  serve->add_option("--port", port);
  serve->add_option("--images-dir", images_dir);
  serve->add_option("--out", out_dir);

  // replay
  auto* replay = app.add_subcommand("replay", "replay a service log offline");
  std::string log_path;
  replay->add_option("--config", config)->required();
  replay->add_option("--log", log_path)->required();
  replay->add_option("--out", out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (synth->parsed()) {
    const fs::path dir(synth_out);
    fs::create_directories(dir);
    const delr::Dataset d = delr::GenerateScenario(sp);
    const auto [b1, b2] = delr::MockDetect(d, delr::CalibratedNoise(), sp.seed);
    delr::SaveDataset(d, dir / "dataset.json");
    delr::SavePredictions(b1, dir / "pred1.json");
    delr::SavePredictions(b2, dir / "pred2.json");
    delr::RunConfig rc;
    rc.experiment.seed = sp.seed;
    const delr::Millis per_cycle = delr::ImageFractionBudgetMs(
        sp.num_images, 0.1, rc.experiment.dataset_profile.Table());
    rc.experiment.cycle_budgets_ms.assign(4, per_cycle);
    rc.provider.mode = delr::ProviderSpec::Mode::kFiles;
    rc.provider.dataset_path = "dataset.json";
    rc.provider.cycle_predictions = {{"pred1.json", "pred2.json"}};
    delr::WriteJsonFile(dir / "config.json", delr::RunConfigToJson(rc));
    std::printf("wrote %zu images, %zu objects to %s\n", d.images().size(),
                d.num_objects(), dir.string().c_str());
    return 0;
  }

  if (score->parsed()) {
    delr::Diagnostics diag;
    const delr::Dataset d = delr::LoadDataset(score_dataset, &diag);
    const delr::BranchOutput b1 = delr::LoadPredictions(score_p1, d, &diag);
    const delr::BranchOutput b2 = delr::LoadPredictions(score_p2, d, &diag);
    PrintWarnings(diag.warnings);
    const auto scored = delr::ScoreDataset(d, b1, b2);
    const auto kept = delr::FilterByConfidence(scored, tau);
    const delr::PoolState pool = delr::NewPool(d, kept);
    delr::SavePool(pool, score_out);
    std::printf("scored %zu detections, %zu kept at tau %.3f\n", scored.size(),
                kept.size(), tau);
    return 0;
  }

  if (loop->parsed() || baseline->parsed()) {
    Setup s = LoadSetup(config);
    const bool is_loop = loop->parsed();
    const delr::ExperimentResult r =
        is_loop ? delr::RunExperiment(s.dataset, s.rc.experiment, *s.provider)
                : delr::RunBaselineExperiment(s.dataset, s.rc.experiment);
    delr::WriteReports(r, is_loop ? "delr" : "baseline", out_dir);
    PrintReports(r.reports);
    return 0;
  }

  if (report->parsed()) {
    const auto reports = delr::ReportsFromJson(
        delr::ReadJsonFile(fs::path(report_in) / "report.json"));
    if (csv) {
      std::cout << delr::ReportsCsv(reports);
    } else {
      PrintReports(reports);
    }
    return 0;
  }

  if (serve->parsed()) {
    Setup s = LoadSetup(config);
    delr::VerificationService svc(s.dataset, s.rc.experiment,
                                  FirstCyclePool(s), FirstCycleBudget(s));
    httplib::Server server;
    std::optional<fs::path> dir;
    if (!images_dir.empty()) dir = images_dir;
    std::function<void()> on_change;
    if (!out_dir.empty()) {
      on_change = [&svc, out = fs::path(out_dir)] {
        WriteServiceArtifacts(svc, out);
      };
    }
    delr::RegisterRoutes(server, svc, dir, on_change);
    g_server = &server;
    std::signal(SIGINT, StopServer);
    std::signal(SIGTERM, StopServer);
    std::fprintf(stderr, "listening on 127.0.0.1:%d\n", port);
    if (!server.listen("127.0.0.1", port)) {
      throw delr::ValidationError("cannot listen on port " +
                                  std::to_string(port));
    }
    if (!out_dir.empty()) WriteServiceArtifacts(svc, out_dir);
    return 0;
  }

  if (replay->parsed()) {
    Setup s = LoadSetup(config);
    delr::VerificationService svc(s.dataset, s.rc.experiment,
                                  FirstCyclePool(s), FirstCycleBudget(s));
    delr::VerificationService::Replay(
        svc, delr::ServiceLogFromJson(delr::ReadJsonFile(log_path)));
    WriteServiceArtifacts(svc, out_dir);
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const delr::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const delr::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
