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

#include "delr/oracle.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "delr/error.h"
#include "delr/geometry.h"
#include "delr/rng.h"
#include "test_util.h"

namespace delr {
namespace {

using testing::Image;

VerificationTask BoxTask(const BoundingBox& pseudo, const ImageRecord& img,
                         double enlarge = 2.0) {
  VerificationTask t;
  t.task_id = "b0-0";
  t.kind = TaskKind::kBox;
  t.image_id = img.id;
  t.annotation_id = "a";
  t.pseudo_box = pseudo;
  t.region = EnlargeRegion(pseudo, enlarge, img);
  return t;
}

// A pseudo box at a chosen IoU with gt (10,10,100,100): same x, y, h and a
// width chosen so that IoU = w / 100 when w <= 100.
BoundingBox AtIou(double iou) { return {10, 10, 100 * iou, 100}; }

TEST(VerifyBoxTest, ThreeCases) {
  const ImageRecord img = Image("i", 500, 500, {{"g", {10, 10, 100, 100}, 0}});
  const Thresholds t;
  Verdict v = SimulatedVerifyBox(BoxTask(AtIou(0.8), img), img, t);
  EXPECT_EQ(v.answer, Answer::kBoxKeep);
  EXPECT_EQ(v.matched_gt_id, "g");
  EXPECT_EQ(SimulatedVerifyBox(BoxTask(AtIou(0.2), img), img, t).answer,
            Answer::kBoxDrop);
  v = SimulatedVerifyBox(BoxTask(AtIou(0.5), img), img, t);
  EXPECT_EQ(v.answer, Answer::kBoxCorrect);
  EXPECT_EQ(*v.new_box, (BoundingBox{10, 10, 100, 100}));
  // Boundaries: 0.7 keeps, 0.3 corrects.
  EXPECT_EQ(SimulatedVerifyBox(BoxTask(AtIou(0.7), img), img, t).answer,
            Answer::kBoxKeep);
  EXPECT_EQ(SimulatedVerifyBox(BoxTask(AtIou(0.3), img), img, t).answer,
            Answer::kBoxCorrect);
}

TEST(VerifyBoxTest, NothingInRegionDrops) {
  const ImageRecord img = Image("i", 500, 500, {{"g", {400, 400, 50, 50}, 0}});
  EXPECT_EQ(
      SimulatedVerifyBox(BoxTask({0, 0, 20, 20}, img), img, Thresholds{}).answer,
      Answer::kBoxDrop);
}

TEST(VerifyBoxTest, GtOutsideRegionIsNotCandidate) {
  // The gt overlaps the pseudo box only if the region were larger.
  const ImageRecord img = Image("i", 500, 500, {{"g", {100, 0, 10, 10}, 0}});
  const VerificationTask t = BoxTask({0, 0, 40, 10}, img, 1.0);
  EXPECT_EQ(SimulatedVerifyBox(t, img, Thresholds{}).answer, Answer::kBoxDrop);
}

TEST(VerifyBoxTest, CorrectionUsesBestGt) {
  const ImageRecord img = Image(
      "i", 500, 500, {{"g1", {0, 0, 100, 100}, 0}, {"g2", {40, 0, 100, 100}, 1}});
  // IoU 0.6 against g1, 0.45 against g2.
  Verdict v =
      SimulatedVerifyBox(BoxTask({30, 0, 60, 100}, img), img, Thresholds{});
  EXPECT_EQ(v.answer, Answer::kBoxCorrect);
  EXPECT_EQ(*v.matched_gt_id, "g1");
  EXPECT_EQ(*v.new_box, (BoundingBox{0, 0, 100, 100}));
  // 0.33 against g1, 0.6 against g2.
  v = SimulatedVerifyBox(BoxTask({60, 0, 60, 100}, img), img, Thresholds{});
  EXPECT_EQ(*v.matched_gt_id, "g2");
  EXPECT_EQ(*v.new_box, (BoundingBox{40, 0, 100, 100}));
}

// Independent three-case rule: enumerate gt boxes that overlap the region
// (strictly positive overlap area), take the maximum IoU and classify.
Answer BruteForce(const BoundingBox& pseudo, const BoundingBox& region,
                  const std::vector<BoundingBox>& gts, double pos, double bg) {
  double best = -1.0;
  for (const BoundingBox& g : gts) {
    const double ix = std::min(g.x + g.w, region.x + region.w) -
                      std::max(g.x, region.x);
    const double iy = std::min(g.y + g.h, region.y + region.h) -
                      std::max(g.y, region.y);
    if (ix <= 0 || iy <= 0) continue;
    const double px = std::max(0.0, std::min(g.x + g.w, pseudo.x + pseudo.w) -
                                        std::max(g.x, pseudo.x));
    const double py = std::max(0.0, std::min(g.y + g.h, pseudo.y + pseudo.h) -
                                        std::max(g.y, pseudo.y));
    const double inter = px * py;
    best = std::max(best, inter / (g.w * g.h + pseudo.w * pseudo.h - inter));
  }
  if (best < 0) return Answer::kBoxDrop;
  if (best >= pos) return Answer::kBoxKeep;
  if (best < bg) return Answer::kBoxDrop;
  return Answer::kBoxCorrect;
}

TEST(VerifyBoxTest, AgreesWithBruteForce) {
  RngStream rng(99);
  for (int i = 0; i < 5000; ++i) {
    std::vector<GroundTruthObject> objs;
    std::vector<BoundingBox> gts;
    const int n = static_cast<int>(rng.UniformInt(5));
    for (int k = 0; k < n; ++k) {
      const BoundingBox g{rng.Uniform(0, 150), rng.Uniform(0, 150),
                          rng.Uniform(5, 50), rng.Uniform(5, 50)};
      objs.push_back({"g" + std::to_string(k), g, 0});
      gts.push_back(g);
    }
    const ImageRecord img = Image("i", 200, 200, objs);
    BoundingBox p{rng.Uniform(0, 150), rng.Uniform(0, 150), rng.Uniform(5, 50),
                  rng.Uniform(5, 50)};
    if (rng.Bernoulli(0.5) && n > 0) {
      const BoundingBox& g = gts[rng.UniformInt(static_cast<std::uint64_t>(n))];
      p = {g.x + rng.Uniform(-10, 10), g.y + rng.Uniform(-10, 10), g.w, g.h};
      p = ClipToImage(p, 200, 200);
    }
    const VerificationTask t = BoxTask(p, img);
    ASSERT_EQ(SimulatedVerifyBox(t, img, Thresholds{}).answer,
              BruteForce(p, t.region, gts, 0.7, 0.3))
        << i;
  }
}

TEST(DisturbTest, ZeroDeltaIsExact) {
  ExperimentConfig cfg;
  RngStream rng(1);
  const Thresholds t = DisturbThresholds(cfg, rng);
  EXPECT_EQ(t.pos, 0.7);
  EXPECT_EQ(t.bg, 0.3);
}

TEST(DisturbTest, DrawsStayInRange) {
  ExperimentConfig cfg;
  cfg.delta_pos = 0.2;
  cfg.delta_bg = 0.6;
  cfg.Validate();
  RngStream rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Thresholds t = DisturbThresholds(cfg, rng);
    ASSERT_GE(t.pos, 0.7);
    ASSERT_LE(t.pos, 0.9);
    ASSERT_GE(t.bg, 0.3);
    ASSERT_LE(t.bg, t.pos);
  }
}

TEST(DisturbTest, DeltaPosIsClamped) {
  ExperimentConfig cfg;
  cfg.delta_pos = 0.5;
  cfg.Validate();
  EXPECT_DOUBLE_EQ(cfg.delta_pos, 0.3);
}

TEST(VerifyBoxTest, HigherPosThresholdNeverKeepsMore) {
  RngStream rng(6);
  for (int i = 0; i < 2000; ++i) {
    const BoundingBox g{rng.Uniform(0, 100), rng.Uniform(0, 100),
                        rng.Uniform(10, 60), rng.Uniform(10, 60)};
    const ImageRecord img = Image("i", 200, 200, {{"g", g, 0}});
    const BoundingBox p = ClipToImage(
        {g.x + rng.Uniform(-20, 20), g.y + rng.Uniform(-20, 20), g.w, g.h},
        200, 200);
    const VerificationTask t = BoxTask(p, img);
    const double pos = rng.Uniform(0.7, 1.0);
    if (SimulatedVerifyBox(t, img, Thresholds{pos, 0.3}).answer ==
        Answer::kBoxKeep) {
      ASSERT_EQ(SimulatedVerifyBox(t, img, Thresholds{}).answer,
                Answer::kBoxKeep);
    }
  }
}

TEST(VerifyClassTest, KeepOrCorrect) {
  VerificationTask t;
  t.task_id = "c0-0";
  t.kind = TaskKind::kClass;
  t.pseudo_class = 3;
  EXPECT_EQ(SimulatedVerifyClass(t, 3).answer, Answer::kClassKeep);
  const Verdict v = SimulatedVerifyClass(t, 5);
  EXPECT_EQ(v.answer, Answer::kClassCorrect);
  EXPECT_EQ(*v.new_class, 5);
  EXPECT_THROW(SimulatedVerifyClass(t, std::nullopt), PreconditionError);
}

TEST(ValidateVerdictTest, Rejections) {
  const ImageRecord img = Image("i", 100, 100);
  VerificationTask t;
  t.task_id = "b0-0";
  t.kind = TaskKind::kBox;
  EXPECT_NO_THROW(ValidateVerdict(Verdict::BoxKeep("b0-0"), t, img, 3));
  EXPECT_THROW(ValidateVerdict(Verdict::BoxKeep("b0-1"), t, img, 3),
               ValidationError);
  EXPECT_THROW(ValidateVerdict(Verdict::ClassKeep("b0-0"), t, img, 3),
               ValidationError);
  EXPECT_THROW(
      ValidateVerdict(Verdict::BoxCorrect("b0-0", {90, 90, 20, 20}), t, img, 3),
      ValidationError);
  EXPECT_THROW(
      ValidateVerdict(Verdict::BoxCorrect("b0-0", {0, 0, 0, 20}), t, img, 3),
      ValidationError);
  t.kind = TaskKind::kClass;
  EXPECT_THROW(ValidateVerdict(Verdict::ClassCorrect("b0-0", 3), t, img, 3),
               ValidationError);
  EXPECT_NO_THROW(ValidateVerdict(Verdict::ClassCorrect("b0-0", 2), t, img, 3));
}

TEST(AnswerTest, NamesRoundTrip) {
  for (Answer a : {Answer::kBoxKeep, Answer::kBoxDrop, Answer::kBoxCorrect,
                   Answer::kClassKeep, Answer::kClassCorrect}) {
    EXPECT_EQ(ParseAnswer(ToString(a)), a);
  }
  EXPECT_EQ(ToString(Answer::kBoxCorrect), "BoxCorrect");
  EXPECT_THROW(ParseAnswer("Maybe"), ValidationError);
}

}  // namespace
}  // namespace delr
