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

#include "delr/io.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>

#include "delr/error.h"

namespace delr {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void Fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

const Json& Req(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) Fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    Fail(where, std::string("missing required field \"") + key + "\"");
  }
  return *it;
}

const Json* Opt(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

void WarnUnknown(const Json& obj, std::initializer_list<const char*> known,
                 const std::string& where, Diagnostics* diag,
                 std::set<std::string>* seen = nullptr) {
  if (diag == nullptr || !obj.is_object()) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (ok) continue;
    if (seen != nullptr && !seen->insert(it.key()).second) continue;
    diag->Warn(where + ": ignoring unknown field \"" + it.key() + "\"");
  }
}

double AsNumber(const Json& j, const std::string& where) {
  if (!j.is_number()) Fail(where, "expected a number");
  return j.get<double>();
}

std::int64_t AsInt(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9.0e15) {
      return static_cast<std::int64_t>(v);
    }
  }
  Fail(where, "expected an integer");
}

std::string AsString(const Json& j, const std::string& where) {
  if (!j.is_string()) Fail(where, "expected a string");
  return j.get<std::string>();
}

bool AsBool(const Json& j, const std::string& where) {
  if (!j.is_boolean()) Fail(where, "expected a boolean");
  return j.get<bool>();
}

const Json& AsArray(const Json& j, const std::string& where) {
  if (!j.is_array()) Fail(where, "expected an array");
  return j;
}

Id IdFromJson(const Json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_unsigned()) return std::to_string(j.get<std::uint64_t>());
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  Fail(where, "expected a string or integer id");
}

Json IdToJson(const Id& id) {
  if (IsCanonicalInteger(id)) return Json(std::stoll(id));
  return Json(id);
}

Json NumberToJson(double v) {
  if (std::floor(v) == v && std::abs(v) < 9.0e15 && !std::signbit(v)) {
    return Json(static_cast<std::int64_t>(v));
  }
  return Json(v);
}

BoundingBox BoxFromJson(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) Fail(where, "expected [x, y, w, h]");
  return {AsNumber(j[0], where), AsNumber(j[1], where), AsNumber(j[2], where),
          AsNumber(j[3], where)};
}

Json BoxToJson(const BoundingBox& b) {
  return Json::array({NumberToJson(b.x), NumberToJson(b.y), NumberToJson(b.w),
                      NumberToJson(b.h)});
}

std::vector<double> ProbsFromJson(const Json& j, const std::string& where) {
  AsArray(j, where);
  std::vector<double> p;
  p.reserve(j.size());
  for (const Json& v : j) p.push_back(AsNumber(v, where));
  return p;
}

Json ProbsToJson(std::span<const double> p) {
  Json a = Json::array();
  for (double v : p) a.push_back(NumberToJson(v));
  return a;
}

std::string At(const std::string& section, std::size_t i) {
  return section + "[" + std::to_string(i) + "]";
}

std::string LineColumn(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

Json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + LineColumn(text, e.byte) +
                          ": malformed JSON");
  }
}

void WriteJsonFile(const fs::path& path, const Json& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(path.string() + ": cannot write file");
  out << value.dump(2) << '\n';
}

// ---------------------------------------------------------------- dataset

Dataset DatasetFromJson(const Json& doc, Diagnostics* diag) {
  if (!doc.is_object()) Fail("dataset", "expected an object");
  WarnUnknown(doc, {"images", "annotations", "categories"}, "dataset", diag);

  std::vector<Category> cats;
  std::unordered_map<std::int64_t, int> cat_index;
  const Json& jcats = AsArray(Req(doc, "categories", "dataset"), "categories");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < jcats.size(); ++i) {
    const std::string where = At("categories", i);
    const Json& c = jcats[i];
    WarnUnknown(c, {"id", "name", "supercategory"}, "categories", diag, &seen);
    Category cat;
    cat.id = static_cast<int>(AsInt(Req(c, "id", where), where + ".id"));
    cat.name = AsString(Req(c, "name", where), where + ".name");
    if (!cat_index.emplace(cat.id, static_cast<int>(cats.size())).second) {
      Fail(where, "duplicate category id " + std::to_string(cat.id));
    }
    cats.push_back(std::move(cat));
  }

  std::vector<ImageRecord> images;
  std::unordered_map<std::string, std::size_t> image_index;
  const Json& jimgs = AsArray(Req(doc, "images", "dataset"), "images");
  seen.clear();
  for (std::size_t i = 0; i < jimgs.size(); ++i) {
    const std::string where = At("images", i);
    const Json& im = jimgs[i];
    WarnUnknown(im, {"id", "width", "height", "file_name"}, "images", diag,
                &seen);
    ImageRecord img;
    img.id = IdFromJson(Req(im, "id", where), where + ".id");
    img.width = AsNumber(Req(im, "width", where), where + ".width");
    img.height = AsNumber(Req(im, "height", where), where + ".height");
    if (const Json* f = Opt(im, "file_name")) {
      img.raster_path = AsString(*f, where + ".file_name");
    }
    if (!(img.width > 0.0 && img.height > 0.0)) {
      Fail(where, "image size must be positive");
    }
    if (!image_index.emplace(img.id, images.size()).second) {
      Fail(where, "duplicate image id \"" + img.id + "\"");
    }
    images.push_back(std::move(img));
  }

  const Json& janns =
      AsArray(Req(doc, "annotations", "dataset"), "annotations");
  seen.clear();
  for (std::size_t i = 0; i < janns.size(); ++i) {
    const std::string where = At("annotations", i);
    const Json& a = janns[i];
    WarnUnknown(a, {"id", "image_id", "bbox", "category_id"}, "annotations",
                diag, &seen);
    GroundTruthObject o;
    o.id = IdFromJson(Req(a, "id", where), where + ".id");
    const Id image_id =
        IdFromJson(Req(a, "image_id", where), where + ".image_id");
    o.box = BoxFromJson(Req(a, "bbox", where), where + ".bbox");
    const std::int64_t cat =
        AsInt(Req(a, "category_id", where), where + ".category_id");
    auto ci = cat_index.find(cat);
    if (ci == cat_index.end()) {
      Fail(where, "unknown category_id " + std::to_string(cat));
    }
    o.class_id = ci->second;
    auto ii = image_index.find(image_id);
    if (ii == image_index.end()) {
      Fail(where, "unknown image \"" + image_id + "\"");
    }
    ImageRecord& img = images[ii->second];
    if (!o.box.HasPositiveArea()) Fail(where, "bbox has non-positive area");
    if (!img.Contains(o.box)) Fail(where, "bbox lies outside the image");
    if (img.FindObject(o.id) != nullptr) {
      Fail(where, "duplicate annotation id \"" + o.id + "\"");
    }
    img.gt_objects.push_back(std::move(o));
  }

  Dataset d(std::move(images), std::move(cats));
  d.Validate();
  return d;
}

Json DatasetToJson(const Dataset& dataset) {
  Json images = Json::array();
  Json anns = Json::array();
  for (const ImageRecord& img : dataset.images()) {
    Json j = {{"id", IdToJson(img.id)},
              {"width", NumberToJson(img.width)},
              {"height", NumberToJson(img.height)}};
    if (img.raster_path) j["file_name"] = *img.raster_path;
    images.push_back(std::move(j));
    for (const GroundTruthObject& o : img.gt_objects) {
      anns.push_back(
          {{"id", IdToJson(o.id)},
           {"image_id", IdToJson(img.id)},
           {"bbox", BoxToJson(o.box)},
           {"category_id",
            dataset.categories()[static_cast<std::size_t>(o.class_id)].id}});
    }
  }
  Json cats = Json::array();
  for (const Category& c : dataset.categories()) {
    cats.push_back({{"id", c.id}, {"name", c.name}});
  }
  return {{"images", images}, {"annotations", anns}, {"categories", cats}};
}

Dataset LoadDataset(const fs::path& path, Diagnostics* diag) {
  Diagnostics local;
  try {
    return DatasetFromJson(ReadJsonFile(path), diag != nullptr ? diag : &local);
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ValidationError(path.string() + ": " + msg);
  }
}

void SaveDataset(const Dataset& dataset, const fs::path& path) {
  WriteJsonFile(path, DatasetToJson(dataset));
}

// ------------------------------------------------------------ predictions

BranchOutput PredictionsFromJson(const Json& doc, const Dataset& dataset,
                                 Diagnostics* diag) {
  const std::string root = "predictions";
  WarnUnknown(doc, {"branch", "frame", "detections"}, root, diag);
  BranchOutput out;
  out.branch = static_cast<int>(AsInt(Req(doc, "branch", root), "branch"));
  if (out.branch != 1 && out.branch != 2) Fail("branch", "must be 1 or 2");
  const std::string frame = AsString(Req(doc, "frame", root), "frame");
  if (frame == "original") {
    out.frame = Frame::kOriginal;
  } else if (frame == "flipped") {
    out.frame = Frame::kFlipped;
  } else {
    Fail("frame", "must be \"original\" or \"flipped\"");
  }
  const Json& dets = AsArray(Req(doc, "detections", root), "detections");
  std::unordered_set<std::string> ids;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Json& d = dets[i];
    std::string where = At("detections", i);
    WarnUnknown(d, {"image_id", "bbox", "probs", "id"}, "detections", diag,
                &seen);
    RawPrediction p;
    p.id = IdFromJson(Req(d, "id", where), where + ".id");
    where = "detection \"" + p.id + "\" (" + where + ")";
    if (!ids.insert(p.id).second) Fail(where, "duplicate detection id");
    p.image_id = IdFromJson(Req(d, "image_id", where), where + ".image_id");
    const ImageRecord* img = dataset.FindImage(p.image_id);
    if (img == nullptr) Fail(where, "unknown image \"" + p.image_id + "\"");
    p.box = BoxFromJson(Req(d, "bbox", where), where + ".bbox");
    if (!p.box.HasPositiveArea()) Fail(where, "bbox has non-positive area");
    if (!img->Contains(p.box)) Fail(where, "bbox lies outside the image");
    std::vector<double> probs =
        ProbsFromJson(Req(d, "probs", where), where + ".probs");
    if (static_cast<int>(probs.size()) != dataset.num_classes()) {
      Fail(where, "probs has " + std::to_string(probs.size()) +
                      " entries, dataset has " +
                      std::to_string(dataset.num_classes()) + " classes");
    }
    try {
      p.class_dist = ClassDistribution(std::move(probs));
    } catch (const ValidationError& e) {
      Fail(where, e.what());
    }
    out.detections.push_back(std::move(p));
  }
  return out;
}

Json PredictionsToJson(const BranchOutput& branch) {
  Json dets = Json::array();
  for (const RawPrediction& p : branch.detections) {
    dets.push_back({{"id", IdToJson(p.id)},
                    {"image_id", IdToJson(p.image_id)},
                    {"bbox", BoxToJson(p.box)},
                    {"probs", ProbsToJson(p.class_dist.probs())}});
  }
  return {{"branch", branch.branch},
          {"frame", branch.frame == Frame::kFlipped ? "flipped" : "original"},
          {"detections", dets}};
}

BranchOutput LoadPredictions(const fs::path& path, const Dataset& dataset,
                             Diagnostics* diag) {
  try {
    return PredictionsFromJson(ReadJsonFile(path), dataset, diag);
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ValidationError(path.string() + ": " + msg);
  }
}

void SavePredictions(const BranchOutput& branch, const fs::path& path) {
  WriteJsonFile(path, PredictionsToJson(branch));
}

// ------------------------------------------------------------------- pool

Json AnnotationToJson(const PseudoAnnotation& a) {
  return {{"id", a.id},
          {"image_id", a.image_id},
          {"bbox", BoxToJson(a.box)},
          {"probs", ProbsToJson(a.class_dist.probs())},
          {"confidence", NumberToJson(a.confidence)},
          {"u_loc", NumberToJson(a.u_loc)},
          {"u_cls", NumberToJson(a.u_cls)},
          {"paired", a.paired}};
}

PseudoAnnotation AnnotationFromJson(const Json& j, const std::string& where) {
  PseudoAnnotation a;
  a.id = IdFromJson(Req(j, "id", where), where + ".id");
  a.image_id = IdFromJson(Req(j, "image_id", where), where + ".image_id");
  a.box = BoxFromJson(Req(j, "bbox", where), where + ".bbox");
  if (!a.box.HasPositiveArea()) Fail(where, "bbox has non-positive area");
  try {
    a.class_dist =
        ClassDistribution(ProbsFromJson(Req(j, "probs", where), where));
  } catch (const ValidationError& e) {
    Fail("annotation \"" + a.id + "\"", e.what());
  }
  a.confidence = AsNumber(Req(j, "confidence", where), where + ".confidence");
  if (std::abs(a.confidence - a.class_dist.Max()) > 1e-9) {
    Fail(where, "confidence differs from the maximum class probability");
  }
  a.u_loc = AsNumber(Req(j, "u_loc", where), where + ".u_loc");
  a.u_cls = AsNumber(Req(j, "u_cls", where), where + ".u_cls");
  if (a.u_loc < 0.0 || a.u_cls < 0.0) Fail(where, "negative uncertainty");
  a.paired = AsBool(Req(j, "paired", where), where + ".paired");
  return a;
}

Json PoolToJson(const PoolState& pool) {
  Json entries = Json::array();
  for (const PoolEntry& e : pool.entries()) {
    Json history = Json::array();
    for (const HistoryRecord& h : e.history) {
      history.push_back(
          {{"cycle", h.cycle}, {"action", h.action}, {"cost_ms", h.cost_ms}});
    }
    Json j = {{"annotation", AnnotationToJson(e.annotation)},
              {"box_state", ToString(e.box_state)},
              {"class_state", ToString(e.class_state)},
              {"history", history}};
    if (e.matched_gt_id) j["matched_gt_id"] = *e.matched_gt_id;
    entries.push_back(std::move(j));
  }
  return {{"format", "delr.pool"},
          {"version", kPoolFormatVersion},
          {"entries", entries}};
}

PoolState PoolFromJson(const Json& doc, Diagnostics* diag) {
  WarnUnknown(doc, {"format", "version", "entries"}, "pool", diag);
  if (AsString(Req(doc, "format", "pool"), "format") != "delr.pool") {
    Fail("pool", "not a pool document");
  }
  const std::int64_t version = AsInt(Req(doc, "version", "pool"), "version");
  if (version != kPoolFormatVersion) {
    Fail("pool", "unsupported version " + std::to_string(version));
  }
  std::vector<PoolEntry> entries;
  const Json& jentries = AsArray(Req(doc, "entries", "pool"), "entries");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < jentries.size(); ++i) {
    const std::string where = At("entries", i);
    const Json& j = jentries[i];
    WarnUnknown(j,
                {"annotation", "box_state", "class_state", "history",
                 "matched_gt_id"},
                "entries", diag, &seen);
    PoolEntry e;
    e.annotation =
        AnnotationFromJson(Req(j, "annotation", where), where + ".annotation");
    e.box_state =
        ParseBoxState(AsString(Req(j, "box_state", where), where + ".box_state"));
    e.class_state = ParseClassState(
        AsString(Req(j, "class_state", where), where + ".class_state"));
    if (const Json* m = Opt(j, "matched_gt_id")) {
      e.matched_gt_id = IdFromJson(*m, where + ".matched_gt_id");
    }
    const Json& hist = AsArray(Req(j, "history", where), where + ".history");
    for (std::size_t k = 0; k < hist.size(); ++k) {
      const std::string hw = where + ".history[" + std::to_string(k) + "]";
      HistoryRecord h;
      h.cycle = static_cast<int>(AsInt(Req(hist[k], "cycle", hw), hw));
      h.action = AsString(Req(hist[k], "action", hw), hw);
      h.cost_ms = AsInt(Req(hist[k], "cost_ms", hw), hw);
      e.history.push_back(std::move(h));
    }
    entries.push_back(std::move(e));
  }
  return PoolState(std::move(entries));
}

void SavePool(const PoolState& pool, const fs::path& path) {
  WriteJsonFile(path, PoolToJson(pool));
}

PoolState LoadPool(const fs::path& path, Diagnostics* diag) {
  return PoolFromJson(ReadJsonFile(path), diag);
}

// ----------------------------------------------------------------- ledger

Json LedgerToJson(const CostLedger& ledger) {
  Json entries = Json::array();
  for (const LedgerEntry& e : ledger.entries()) {
    entries.push_back({{"task_id", e.task_id},
                       {"action", ToString(e.action)},
                       {"cost_ms", e.cost_ms},
                       {"account", e.account == Account::kLoc ? "loc" : "cls"}});
  }
  Json grants = Json::array();
  for (const LedgerGrant& g : ledger.grants()) {
    grants.push_back({{"at_entry", g.at_entry},
                      {"loc_delta", g.loc_delta},
                      {"cls_delta", g.cls_delta}});
  }
  return {{"budget_total_ms", ledger.budget_total_ms()},
          {"budget_loc_ms", ledger.budget_loc_ms()},
          {"budget_cls_ms", ledger.budget_cls_ms()},
          {"spent_loc_ms", ledger.spent_loc_ms()},
          {"spent_cls_ms", ledger.spent_cls_ms()},
          {"entries", entries},
          {"grants", grants},
          {"notes", ledger.notes()}};
}

CostLedger LedgerFromJson(const Json& j) {
  const std::string where = "ledger";
  std::vector<LedgerEntry> entries;
  const Json& je = AsArray(Req(j, "entries", where), "entries");
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string w = At("entries", i);
    LedgerEntry e;
    e.task_id = AsString(Req(je[i], "task_id", w), w);
    e.action = ParseAction(AsString(Req(je[i], "action", w), w));
    e.cost_ms = AsInt(Req(je[i], "cost_ms", w), w);
    const std::string account = AsString(Req(je[i], "account", w), w);
    if (account != "loc" && account != "cls") Fail(w, "unknown account");
    e.account = account == "loc" ? Account::kLoc : Account::kCls;
    entries.push_back(std::move(e));
  }
  std::vector<LedgerGrant> grants;
  const Json& jg = AsArray(Req(j, "grants", where), "grants");
  for (std::size_t i = 0; i < jg.size(); ++i) {
    const std::string w = At("grants", i);
    grants.push_back(
        {static_cast<std::size_t>(AsInt(Req(jg[i], "at_entry", w), w)),
         AsInt(Req(jg[i], "loc_delta", w), w),
         AsInt(Req(jg[i], "cls_delta", w), w)});
  }
  std::vector<std::string> notes;
  if (const Json* n = Opt(j, "notes")) {
    for (const Json& s : AsArray(*n, "notes")) notes.push_back(AsString(s, "notes"));
  }
  CostLedger ledger = CostLedger::FromRecords(std::move(entries),
                                              std::move(grants), std::move(notes));
  if (const Json* s = Opt(j, "spent_loc_ms");
      s != nullptr && AsInt(*s, "spent_loc_ms") != ledger.spent_loc_ms()) {
    Fail(where, "spent_loc_ms disagrees with its entries");
  }
  if (const Json* s = Opt(j, "spent_cls_ms");
      s != nullptr && AsInt(*s, "spent_cls_ms") != ledger.spent_cls_ms()) {
    Fail(where, "spent_cls_ms disagrees with its entries");
  }
  return ledger;
}

// -------------------------------------------------------------- service io

Json TaskToJson(const VerificationTask& task) {
  return {{"task_id", task.task_id},
          {"kind", ToString(task.kind)},
          {"image_id", IdToJson(task.image_id)},
          {"annotation_id", task.annotation_id},
          {"region", BoxToJson(task.region)},
          {"pseudo_box", BoxToJson(task.pseudo_box)},
          {"pseudo_class", task.pseudo_class},
          {"issued_cycle", task.issued_cycle}};
}

Json VerdictToJson(const Verdict& v) {
  Json j = {{"task_id", v.task_id}, {"answer", ToString(v.answer)}};
  if (v.new_box) j["new_box"] = BoxToJson(*v.new_box);
  if (v.new_class) j["new_class"] = *v.new_class;
  return j;
}

Verdict VerdictFromJson(const Json& j, const std::string& task_id) {
  const std::string where = "verdict";
  if (!j.is_object()) Fail(where, "expected an object");
  Verdict v;
  v.task_id = task_id;
  v.answer = ParseAnswer(AsString(Req(j, "answer", where), "answer"));
  if (const Json* b = Opt(j, "new_box")) v.new_box = BoxFromJson(*b, "new_box");
  if (const Json* c = Opt(j, "new_class")) {
    v.new_class = static_cast<ClassId>(AsInt(*c, "new_class"));
  }
  if (v.answer == Answer::kBoxCorrect && !v.new_box) {
    Fail(where, "BoxCorrect needs new_box");
  }
  if (v.answer == Answer::kClassCorrect && !v.new_class) {
    Fail(where, "ClassCorrect needs new_class");
  }
  return v;
}

// ----------------------------------------------------------------- config

namespace {

Json CostTableToJson(const CostTable& t) {
  return {{"verify_box_ms", t.verify_box_ms},
          {"verify_class_ms", t.verify_class_ms},
          {"draw_box_ms", t.draw_box_ms},
          {"assign_class_ms", t.assign_class_ms},
          {"full_image_ms", t.full_image_ms}};
}

CostTable CostTableFromJson(const Json& j, const std::string& where) {
  CostTable t = CostTable::VocLike();
  auto read = [&](const char* key, Millis& field) {
    if (const Json* v = Opt(j, key)) field = AsInt(*v, where + "." + key);
  };
  read("verify_box_ms", t.verify_box_ms);
  read("verify_class_ms", t.verify_class_ms);
  read("draw_box_ms", t.draw_box_ms);
  read("assign_class_ms", t.assign_class_ms);
  read("full_image_ms", t.full_image_ms);
  t.Validate();
  return t;
}

Json ScenarioToJson(const ScenarioParams& s) {
  return {{"num_images", s.num_images},       {"num_classes", s.num_classes},
          {"min_objects", s.min_objects},     {"max_objects", s.max_objects},
          {"min_box_size", s.min_box_size},   {"max_box_size", s.max_box_size},
          {"image_width", s.image_width},     {"image_height", s.image_height},
          {"seed", s.seed}};
}

ScenarioParams ScenarioFromJson(const Json& j, std::uint64_t default_seed,
                                Diagnostics* diag) {
  const std::string where = "provider.scenario";
  WarnUnknown(j,
              {"num_images", "num_classes", "min_objects", "max_objects",
               "min_box_size", "max_box_size", "image_width", "image_height",
               "seed"},
              where, diag);
  ScenarioParams s;
  s.seed = default_seed;
  auto read = [&](const char* key, int& field) {
    if (const Json* v = Opt(j, key)) {
      field = static_cast<int>(AsInt(*v, where + "." + key));
    }
  };
  read("num_images", s.num_images);
  read("num_classes", s.num_classes);
  read("min_objects", s.min_objects);
  read("max_objects", s.max_objects);
  read("min_box_size", s.min_box_size);
  read("max_box_size", s.max_box_size);
  read("image_width", s.image_width);
  read("image_height", s.image_height);
  if (const Json* v = Opt(j, "seed")) {
    s.seed = static_cast<std::uint64_t>(AsInt(*v, where + ".seed"));
  }
  return s;
}

Json NoiseToJson(const NoiseParams& n) {
  return {{"jitter_frac", n.jitter_frac},
          {"class_confusion", n.class_confusion},
          {"miss_rate", n.miss_rate},
          {"spurious_rate", n.spurious_rate},
          {"confusion_penalty", n.confusion_penalty},
          {"spurious_conf_lo", n.spurious_conf_lo},
          {"spurious_conf_hi", n.spurious_conf_hi}};
}

NoiseParams NoiseFromJson(const Json& j, Diagnostics* diag) {
  const std::string where = "provider.noise";
  WarnUnknown(j,
              {"jitter_frac", "class_confusion", "miss_rate", "spurious_rate",
               "confusion_penalty", "spurious_conf_lo", "spurious_conf_hi"},
              where, diag);
  NoiseParams n = CalibratedNoise();
  auto read = [&](const char* key, double& field) {
    if (const Json* v = Opt(j, key)) field = AsNumber(*v, where + "." + key);
  };
  read("jitter_frac", n.jitter_frac);
  read("class_confusion", n.class_confusion);
  read("miss_rate", n.miss_rate);
  read("spurious_rate", n.spurious_rate);
  read("confusion_penalty", n.confusion_penalty);
  read("spurious_conf_lo", n.spurious_conf_lo);
  read("spurious_conf_hi", n.spurious_conf_hi);
  n.Validate();
  return n;
}

}  // namespace

Json ExperimentConfigToJson(const ExperimentConfig& cfg) {
  Json profile;
  switch (cfg.dataset_profile.kind) {
    case ProfileKind::kVocLike: profile = "VOC-like"; break;
    case ProfileKind::kCocoLike: profile = "COCO-like"; break;
    case ProfileKind::kCustom:
      profile = {{"kind", "Custom"},
                 {"costs", CostTableToJson(cfg.dataset_profile.custom)}};
      break;
  }
  return {{"tau_conf", cfg.tau_conf},
          {"iou_pos", cfg.iou_pos},
          {"iou_bg", cfg.iou_bg},
          {"delta_pos", cfg.delta_pos},
          {"delta_bg", cfg.delta_bg},
          {"enlarge_factor", cfg.enlarge_factor},
          {"conf_trust", cfg.conf_trust},
          {"loc_budget_fraction", cfg.loc_budget_fraction},
          {"cycle_budgets_ms", cfg.cycle_budgets_ms},
          {"dataset_profile", profile},
          {"seed", cfg.seed}};
}

ExperimentConfig ExperimentConfigFromJson(const Json& doc, Diagnostics* diag) {
  const std::string where = "config";
  if (!doc.is_object()) Fail(where, "expected an object");
  WarnUnknown(doc,
              {"tau_conf", "iou_pos", "iou_bg", "delta_pos", "delta_bg",
               "enlarge_factor", "conf_trust", "loc_budget_fraction",
               "cycle_budgets_ms", "dataset_profile", "seed", "provider"},
              where, diag);
  ExperimentConfig cfg;
  auto read = [&](const char* key, double& field) {
    if (const Json* v = Opt(doc, key)) field = AsNumber(*v, key);
  };
  read("tau_conf", cfg.tau_conf);
  read("iou_pos", cfg.iou_pos);
  read("iou_bg", cfg.iou_bg);
  read("delta_pos", cfg.delta_pos);
  read("delta_bg", cfg.delta_bg);
  read("enlarge_factor", cfg.enlarge_factor);
  read("conf_trust", cfg.conf_trust);
  read("loc_budget_fraction", cfg.loc_budget_fraction);
  for (const Json& b :
       AsArray(Req(doc, "cycle_budgets_ms", where), "cycle_budgets_ms")) {
    cfg.cycle_budgets_ms.push_back(AsInt(b, "cycle_budgets_ms"));
  }
  if (const Json* p = Opt(doc, "dataset_profile")) {
    if (p->is_string()) {
      const std::string s = p->get<std::string>();
      if (s == "VOC-like") {
        cfg.dataset_profile.kind = ProfileKind::kVocLike;
      } else if (s == "COCO-like") {
        cfg.dataset_profile.kind = ProfileKind::kCocoLike;
      } else {
        Fail("dataset_profile", "unknown profile \"" + s + "\"");
      }
    } else if (p->is_object()) {
      if (AsString(Req(*p, "kind", "dataset_profile"), "dataset_profile.kind") !=
          "Custom") {
        Fail("dataset_profile", "object form requires kind \"Custom\"");
      }
      cfg.dataset_profile.kind = ProfileKind::kCustom;
      cfg.dataset_profile.custom = CostTableFromJson(
          Req(*p, "costs", "dataset_profile"), "dataset_profile.costs");
    } else {
      Fail("dataset_profile", "expected a string or object");
    }
  }
  if (const Json* s = Opt(doc, "seed")) {
    if (s->is_number_unsigned()) {
      cfg.seed = s->get<std::uint64_t>();
    } else {
      const std::int64_t v = AsInt(*s, "seed");
      if (v < 0) Fail("seed", "must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(v);
    }
  }
  return cfg;
}

RunConfig RunConfigFromJson(const Json& doc, const fs::path& base_dir,
                            Diagnostics* diag) {
  RunConfig rc;
  rc.experiment = ExperimentConfigFromJson(doc, diag);
  rc.provider.scenario.seed = rc.experiment.seed;
  const Json* p = Opt(doc, "provider");
  if (p == nullptr) return rc;
  const std::string where = "provider";
  WarnUnknown(*p, {"mode", "scenario", "noise", "coupling", "dataset", "cycles"},
              where, diag);
  const std::string mode = AsString(Req(*p, "mode", where), "provider.mode");
  auto resolve = [&](const std::string& f) {
    const fs::path path(f);
    return path.is_absolute() ? path.string() : (base_dir / path).string();
  };
  if (mode == "mock") {
    rc.provider.mode = ProviderSpec::Mode::kMock;
    if (const Json* s = Opt(*p, "scenario")) {
      rc.provider.scenario = ScenarioFromJson(*s, rc.experiment.seed, diag);
    }
    if (const Json* n = Opt(*p, "noise")) {
      rc.provider.noise = NoiseFromJson(*n, diag);
    }
    if (const Json* c = Opt(*p, "coupling")) {
      if (const Json* a = Opt(*c, "alpha")) {
        rc.provider.coupling.alpha = AsNumber(*a, "provider.coupling.alpha");
      }
      if (const Json* f = Opt(*c, "floor")) {
        rc.provider.coupling.floor = AsNumber(*f, "provider.coupling.floor");
      }
    }
  } else if (mode == "files") {
    rc.provider.mode = ProviderSpec::Mode::kFiles;
    rc.provider.dataset_path =
        resolve(AsString(Req(*p, "dataset", where), "provider.dataset"));
    const Json& cycles = AsArray(Req(*p, "cycles", where), "provider.cycles");
    for (std::size_t i = 0; i < cycles.size(); ++i) {
      const std::string w = At("provider.cycles", i);
      rc.provider.cycle_predictions.emplace_back(
          resolve(AsString(Req(cycles[i], "pred1", w), w + ".pred1")),
          resolve(AsString(Req(cycles[i], "pred2", w), w + ".pred2")));
    }
    if (rc.provider.cycle_predictions.empty()) {
      Fail("provider.cycles", "needs at least one prediction pair");
    }
  } else {
    Fail("provider.mode", "must be \"mock\" or \"files\"");
  }
  return rc;
}

Json RunConfigToJson(const RunConfig& rc) {
  Json j = ExperimentConfigToJson(rc.experiment);
  if (rc.provider.mode == ProviderSpec::Mode::kMock) {
    j["provider"] = {{"mode", "mock"},
                     {"scenario", ScenarioToJson(rc.provider.scenario)},
                     {"noise", NoiseToJson(rc.provider.noise)},
                     {"coupling",
                      {{"alpha", rc.provider.coupling.alpha},
                       {"floor", rc.provider.coupling.floor}}}};
  } else {
    Json cycles = Json::array();
    for (const auto& [a, b] : rc.provider.cycle_predictions) {
      cycles.push_back({{"pred1", a}, {"pred2", b}});
    }
    j["provider"] = {{"mode", "files"},
                     {"dataset", rc.provider.dataset_path},
                     {"cycles", cycles}};
  }
  return j;
}

RunConfig LoadRunConfig(const fs::path& path, Diagnostics* diag) {
  Json doc = ReadJsonFile(path);
  if (const char* env = std::getenv("DELR_SEED"); env != nullptr && *env) {
    std::uint64_t seed = 0;
    try {
      std::size_t used = 0;
      seed = std::stoull(env, &used, 10);
      if (used != std::strlen(env)) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw ValidationError(std::string("DELR_SEED is not an integer: ") + env);
    }
    if (doc.is_object()) doc["seed"] = seed;
  }
  RunConfig rc = RunConfigFromJson(doc, path.parent_path(), diag);
  rc.experiment.Validate();
  return rc;
}

// ---------------------------------------------------------------- reports

Json PassReportToJson(const PassReport& r) {
  return {{"pass_kind", ToString(r.pass_kind)},
          {"tasks_issued", r.tasks_issued},
          {"keeps", r.keeps},
          {"drops", r.drops},
          {"corrections", r.corrections},
          {"trusted", r.trusted},
          {"merged", r.merged},
          {"spent_ms", r.spent_ms},
          {"stopped_reason", ToString(r.stopped_reason)},
          {"tau_cls", r.tau_cls}};
}

PassReport PassReportFromJson(const Json& j) {
  const std::string w = "pass";
  PassReport r;
  r.pass_kind = ParsePassKind(AsString(Req(j, "pass_kind", w), w));
  r.tasks_issued = static_cast<int>(AsInt(Req(j, "tasks_issued", w), w));
  r.keeps = static_cast<int>(AsInt(Req(j, "keeps", w), w));
  r.drops = static_cast<int>(AsInt(Req(j, "drops", w), w));
  r.corrections = static_cast<int>(AsInt(Req(j, "corrections", w), w));
  r.trusted = static_cast<int>(AsInt(Req(j, "trusted", w), w));
  r.merged = static_cast<int>(AsInt(Req(j, "merged", w), w));
  r.spent_ms = AsInt(Req(j, "spent_ms", w), w);
  r.stopped_reason =
      ParseStopReason(AsString(Req(j, "stopped_reason", w), w));
  r.tau_cls = AsNumber(Req(j, "tau_cls", w), w);
  return r;
}

Json MetricsToJson(const MetricsBundle& m) {
  Json buckets = nullptr;
  if (m.iou_buckets) {
    buckets = {{"incorrect", m.iou_buckets->incorrect},
               {"low", m.iou_buckets->low},
               {"correct", m.iou_buckets->correct},
               {"count", m.iou_buckets->count}};
  }
  Json rows = Json::array();
  for (int g = 0; g < m.confusion.num_classes; ++g) {
    Json row = Json::array();
    for (int p = 0; p < m.confusion.num_classes; ++p) {
      row.push_back(m.confusion(g, p));
    }
    rows.push_back(std::move(row));
  }
  const StateCounts& c = m.counts;
  return {
      {"iou_buckets", buckets},
      {"cls_acc_given_correct_loc",
       m.cls_acc_given_correct_loc ? Json(*m.cls_acc_given_correct_loc)
                                   : Json(nullptr)},
      {"confusion",
       {{"num_classes", m.confusion.num_classes},
        {"counts", rows},
        {"unmatched", m.confusion.unmatched}}},
      {"budget",
       {{"spent_loc_ms", m.budget.spent_loc_ms},
        {"spent_cls_ms", m.budget.spent_cls_ms},
        {"remaining_ms", m.budget.remaining_ms}}},
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
      {"acquired_objects", m.acquired_objects}};
}

MetricsBundle MetricsFromJson(const Json& j) {
  const std::string w = "metrics";
  MetricsBundle m;
  if (const Json* b = Opt(j, "iou_buckets")) {
    m.iou_buckets = IouBuckets{AsNumber(Req(*b, "incorrect", w), w),
                               AsNumber(Req(*b, "low", w), w),
                               AsNumber(Req(*b, "correct", w), w),
                               AsInt(Req(*b, "count", w), w)};
  }
  if (const Json* a = Opt(j, "cls_acc_given_correct_loc")) {
    m.cls_acc_given_correct_loc = AsNumber(*a, w);
  }
  const Json& conf = Req(j, "confusion", w);
  m.confusion.num_classes =
      static_cast<int>(AsInt(Req(conf, "num_classes", w), w));
  for (const Json& row : AsArray(Req(conf, "counts", w), w)) {
    for (const Json& v : AsArray(row, w)) m.confusion.counts.push_back(AsInt(v, w));
  }
  m.confusion.unmatched = AsInt(Req(conf, "unmatched", w), w);
  const Json& budget = Req(j, "budget", w);
  m.budget = {AsInt(Req(budget, "spent_loc_ms", w), w),
              AsInt(Req(budget, "spent_cls_ms", w), w),
              AsInt(Req(budget, "remaining_ms", w), w)};
  const Json& counts = Req(j, "counts", w);
  const Json& box = Req(counts, "box", w);
  const Json& cls = Req(counts, "class", w);
  StateCounts& c = m.counts;
  c.box_pseudo = AsInt(Req(box, "Pseudo", w), w);
  c.box_verified_kept = AsInt(Req(box, "VerifiedKept", w), w);
  c.box_corrected = AsInt(Req(box, "Corrected", w), w);
  c.box_dropped = AsInt(Req(box, "Dropped", w), w);
  c.cls_pseudo = AsInt(Req(cls, "Pseudo", w), w);
  c.cls_trusted = AsInt(Req(cls, "Trusted", w), w);
  c.cls_verified_kept = AsInt(Req(cls, "VerifiedKept", w), w);
  c.cls_corrected = AsInt(Req(cls, "Corrected", w), w);
  m.acquired_objects = AsInt(Req(j, "acquired_objects", w), w);
  return m;
}

Json CycleReportToJson(const CycleReport& r) {
  const LedgerSnapshot& s = r.ledger_snapshot;
  return {{"cycle_index", r.cycle_index},
          {"pool_snapshot_ref", r.pool_snapshot_ref},
          {"box_pass", PassReportToJson(r.box_pass)},
          {"class_pass", PassReportToJson(r.class_pass)},
          {"metrics_before", MetricsToJson(r.metrics_before)},
          {"metrics", MetricsToJson(r.metrics)},
          {"ledger_snapshot",
           {{"budget_loc_ms", s.budget_loc_ms},
            {"budget_cls_ms", s.budget_cls_ms},
            {"spent_loc_ms", s.spent_loc_ms},
            {"spent_cls_ms", s.spent_cls_ms},
            {"num_entries", s.num_entries}}},
          {"verified_fraction", r.verified_fraction},
          {"added", r.added},
          {"replaced", r.replaced},
          {"suppressed", r.suppressed}};
}

CycleReport CycleReportFromJson(const Json& j) {
  const std::string w = "cycle";
  CycleReport r;
  r.cycle_index = static_cast<int>(AsInt(Req(j, "cycle_index", w), w));
  r.pool_snapshot_ref = AsString(Req(j, "pool_snapshot_ref", w), w);
  r.box_pass = PassReportFromJson(Req(j, "box_pass", w));
  r.class_pass = PassReportFromJson(Req(j, "class_pass", w));
  r.metrics_before = MetricsFromJson(Req(j, "metrics_before", w));
  r.metrics = MetricsFromJson(Req(j, "metrics", w));
  const Json& s = Req(j, "ledger_snapshot", w);
  r.ledger_snapshot = {AsInt(Req(s, "budget_loc_ms", w), w),
                       AsInt(Req(s, "budget_cls_ms", w), w),
                       AsInt(Req(s, "spent_loc_ms", w), w),
                       AsInt(Req(s, "spent_cls_ms", w), w),
                       AsInt(Req(s, "num_entries", w), w)};
  r.verified_fraction = AsNumber(Req(j, "verified_fraction", w), w);
  r.added = AsInt(Req(j, "added", w), w);
  r.replaced = AsInt(Req(j, "replaced", w), w);
  r.suppressed = AsInt(Req(j, "suppressed", w), w);
  return r;
}

Json ReportsToJson(const std::vector<CycleReport>& reports,
                   const std::string& mode) {
  Json cycles = Json::array();
  for (const CycleReport& r : reports) cycles.push_back(CycleReportToJson(r));
  return {{"format", "delr.reports"},
          {"version", kReportFormatVersion},
          {"mode", mode},
          {"cycles", cycles}};
}

std::vector<CycleReport> ReportsFromJson(const Json& doc) {
  if (AsString(Req(doc, "format", "reports"), "format") != "delr.reports") {
    Fail("reports", "not a report document");
  }
  std::vector<CycleReport> out;
  for (const Json& c : AsArray(Req(doc, "cycles", "reports"), "cycles")) {
    out.push_back(CycleReportFromJson(c));
  }
  return out;
}

std::string ReportsCsv(const std::vector<CycleReport>& reports) {
  std::string csv =
      "cycle,box_tasks,box_keeps,box_drops,box_corrections,class_tasks,"
      "class_keeps,class_corrections,class_trusted,spent_loc_ms,spent_cls_ms,"
      "remaining_ms,before_incorrect,before_low,before_correct,incorrect,low,"
      "correct,cls_acc_given_correct_loc,acquired_objects\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? FormatDouble(*v) : std::string();
  };
  auto bucket = [&](const std::optional<IouBuckets>& b, int which) {
    if (!b) return std::string();
    return FormatDouble(which == 0 ? b->incorrect
                                   : which == 1 ? b->low : b->correct);
  };
  for (const CycleReport& r : reports) {
    const MetricsBundle& m = r.metrics;
    std::vector<std::string> cols = {
        std::to_string(r.cycle_index),
        std::to_string(r.box_pass.tasks_issued),
        std::to_string(r.box_pass.keeps),
        std::to_string(r.box_pass.drops),
        std::to_string(r.box_pass.corrections),
        std::to_string(r.class_pass.tasks_issued),
        std::to_string(r.class_pass.keeps),
        std::to_string(r.class_pass.corrections),
        std::to_string(r.class_pass.trusted),
        std::to_string(m.budget.spent_loc_ms),
        std::to_string(m.budget.spent_cls_ms),
        std::to_string(m.budget.remaining_ms),
        bucket(r.metrics_before.iou_buckets, 0),
        bucket(r.metrics_before.iou_buckets, 1),
        bucket(r.metrics_before.iou_buckets, 2),
        bucket(m.iou_buckets, 0),
        bucket(m.iou_buckets, 1),
        bucket(m.iou_buckets, 2),
        opt(m.cls_acc_given_correct_loc),
        std::to_string(m.acquired_objects)};
    for (std::size_t i = 0; i < cols.size(); ++i) {
      csv += cols[i];
      csv += i + 1 == cols.size() ? '\n' : ',';
    }
  }
  return csv;
}

namespace {

// Exclusive advisory lock on <dir>/.lock for the lifetime of the object.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) {
    const std::string lock = (dir / ".lock").string();
    fd_ = ::open(lock.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
      if (fd_ >= 0) ::close(fd_);
      throw ValidationError(dir.string() + ": cannot lock output directory");
    }
  }
  ~DirectoryLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

void WriteReports(const ExperimentResult& result, const std::string& mode,
                  const fs::path& dir) {
  fs::create_directories(dir);
  DirectoryLock lock(dir);
  WriteJsonFile(dir / "report.json", ReportsToJson(result.reports, mode));
  {
    std::ofstream csv(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    csv << ReportsCsv(result.reports);
  }
  WriteJsonFile(dir / "ledger.json", LedgerToJson(result.ledger));
  for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
    WriteJsonFile(dir / result.reports[i].pool_snapshot_ref,
                  PoolToJson(result.snapshots[i]));
  }
  WriteJsonFile(dir / "pool.json", PoolToJson(result.snapshots.empty()
                                                  ? PoolState()
                                                  : result.snapshots.back()));
}

BranchPair FileProvider::Predict(const Dataset& dataset, int cycle,
                                 double /*verified_fraction*/) {
  if (cycle_files_.empty()) {
    throw ValidationError("file provider has no prediction files");
  }
  const std::size_t i =
      std::min(static_cast<std::size_t>(cycle), cycle_files_.size() - 1);
  Diagnostics diag;
  BranchPair out{LoadPredictions(cycle_files_[i].first, dataset, &diag),
                 LoadPredictions(cycle_files_[i].second, dataset, &diag)};
  warnings_.insert(warnings_.end(), diag.warnings.begin(), diag.warnings.end());
  return out;
}

}  // namespace delr
