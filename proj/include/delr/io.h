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

#ifndef DELR_IO_H_
#define DELR_IO_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "delr/config.h"
#include "delr/oracle.h"
#include "delr/pool.h"
#include "delr/scheduler.h"
#include "delr/synth.h"
#include "delr/types.h"
#include "delr/uncertainty.h"

namespace delr {

using Json = nlohmann::json;

inline constexpr int kPoolFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

// Collects non-fatal findings such as unknown fields.
struct Diagnostics {
  std::vector<std::string> warnings;
  void Warn(std::string message) { warnings.push_back(std::move(message)); }
};

// Reads and parses a JSON file. Parse errors name the file, line and column.
Json ReadJsonFile(const std::filesystem::path& path);
// Writes `value` with two-space indent and a trailing newline.
void WriteJsonFile(const std::filesystem::path& path, const Json& value);

// COCO-style subset: images, annotations and categories. Class indices are
// positions in the categories array.
Dataset DatasetFromJson(const Json& doc, Diagnostics* diag = nullptr);
Json DatasetToJson(const Dataset& dataset);
Dataset LoadDataset(const std::filesystem::path& path,
                    Diagnostics* diag = nullptr);
void SaveDataset(const Dataset& dataset, const std::filesystem::path& path);

// Prediction files keep the frame they declare; use ToOriginalFrame to
// unflip. Detections are validated against the dataset: known image, box
// inside the (flipped) image, probs of length num_classes summing to one.
BranchOutput PredictionsFromJson(const Json& doc, const Dataset& dataset,
                                 Diagnostics* diag = nullptr);
Json PredictionsToJson(const BranchOutput& branch);
BranchOutput LoadPredictions(const std::filesystem::path& path,
                             const Dataset& dataset,
                             Diagnostics* diag = nullptr);
void SavePredictions(const BranchOutput& branch,
                     const std::filesystem::path& path);

Json AnnotationToJson(const PseudoAnnotation& a);
PseudoAnnotation AnnotationFromJson(const Json& j, const std::string& where);

Json PoolToJson(const PoolState& pool);
PoolState PoolFromJson(const Json& doc, Diagnostics* diag = nullptr);
void SavePool(const PoolState& pool, const std::filesystem::path& path);
PoolState LoadPool(const std::filesystem::path& path,
                   Diagnostics* diag = nullptr);

Json LedgerToJson(const CostLedger& ledger);
CostLedger LedgerFromJson(const Json& j);

Json TaskToJson(const VerificationTask& task);
Json VerdictToJson(const Verdict& verdict);
// Body of a verdict submission: {answer, new_box?, new_class?}.
Verdict VerdictFromJson(const Json& j, const std::string& task_id);

// Provider settings for `loop`, `baseline` and `serve`.
struct ProviderSpec {
  enum class Mode { kMock, kFiles } mode = Mode::kMock;
  // Mock mode: the scenario is generated, noise drives the mock detector.
  ScenarioParams scenario;
  NoiseParams noise = CalibratedNoise();
  MockCoupling coupling;
  // Files mode: ground truth and per-cycle prediction files. The last pair is
  // reused when there are more cycles than pairs.
  std::string dataset_path;
  std::vector<std::pair<std::string, std::string>> cycle_predictions;
};

struct RunConfig {
  ExperimentConfig experiment;
  ProviderSpec provider;
};

// Mirrors ExperimentConfig field for field, plus an optional "provider"
// object. Relative file paths resolve against `base_dir`.
RunConfig RunConfigFromJson(const Json& doc,
                            const std::filesystem::path& base_dir,
                            Diagnostics* diag = nullptr);
Json RunConfigToJson(const RunConfig& cfg);
// Loads, applies the DELR_SEED override and validates.
RunConfig LoadRunConfig(const std::filesystem::path& path,
                        Diagnostics* diag = nullptr);

Json ExperimentConfigToJson(const ExperimentConfig& cfg);
ExperimentConfig ExperimentConfigFromJson(const Json& doc,
                                          Diagnostics* diag = nullptr);

Json PassReportToJson(const PassReport& r);
PassReport PassReportFromJson(const Json& j);
Json MetricsToJson(const MetricsBundle& m);
MetricsBundle MetricsFromJson(const Json& j);
Json CycleReportToJson(const CycleReport& r);
CycleReport CycleReportFromJson(const Json& j);

Json ReportsToJson(const std::vector<CycleReport>& reports,
                   const std::string& mode);
std::vector<CycleReport> ReportsFromJson(const Json& doc);

// One header row plus one row per cycle.
std::string ReportsCsv(const std::vector<CycleReport>& reports);

// Writes report.json, metrics.csv, ledger.json, pool.json (final) and
// pool_cycle_<i>.json while holding an exclusive lock on `dir`.
void WriteReports(const ExperimentResult& result, const std::string& mode,
                  const std::filesystem::path& dir);

// Reads predictions from files named per cycle.
class FileProvider : public PredictionProvider {
 public:
  explicit FileProvider(
      std::vector<std::pair<std::string, std::string>> cycle_files)
      : cycle_files_(std::move(cycle_files)) {}

  BranchPair Predict(const Dataset& dataset, int cycle,
                     double verified_fraction) override;

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<std::pair<std::string, std::string>> cycle_files_;
  std::vector<std::string> warnings_;
};

}  // namespace delr

#endif  // DELR_IO_H_
