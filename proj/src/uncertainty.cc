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

#include "delr/uncertainty.h"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

#include "delr/error.h"
#include "delr/geometry.h"

namespace delr {

std::vector<PredictionPair> PairPredictions(
    std::span<const RawPrediction> primary,
    std::span<const RawPrediction> secondary_unflipped) {
  struct Candidate {
    double iou;
    std::size_t p;
    std::size_t s;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < primary.size(); ++i) {
    for (std::size_t j = 0; j < secondary_unflipped.size(); ++j) {
      const double v = Iou(primary[i].box, secondary_unflipped[j].box);
      if (v >= kPairingIou) candidates.push_back({v, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.iou != b.iou) return a.iou > b.iou;
              return std::tie(a.p, a.s) < std::tie(b.p, b.s);
            });

  std::vector<PredictionPair> pairs(primary.size());
  std::vector<bool> used(secondary_unflipped.size(), false);
  for (std::size_t i = 0; i < primary.size(); ++i) pairs[i].primary = primary[i];
  for (const Candidate& c : candidates) {
    if (pairs[c.p].secondary || used[c.s]) continue;
    pairs[c.p].secondary = secondary_unflipped[c.s];
    pairs[c.p].match_iou = c.iou;
    used[c.s] = true;
  }
  return pairs;
}

double LocUncertainty(const BoundingBox& b, const BoundingBox& b_hat) {
  return (std::abs(b.x - b_hat.x) + std::abs(b.y - b_hat.y) +
          std::abs(b.w - b_hat.w) + std::abs(b.h - b_hat.h)) /
         4.0;
}

double LocUncertainty(const PredictionPair& pair) {
  if (!pair.secondary) throw PreconditionError("unmatched prediction pair");
  return LocUncertainty(pair.primary.box, pair.secondary->box);
}

double ClsUncertainty(std::span<const double> c,
                      std::span<const double> c_hat) {
  if (c.size() != c_hat.size()) {
    throw PreconditionError("class distributions differ in length");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    kl += c[i] * std::log((c[i] + kKlSmoothing) / (c_hat[i] + kKlSmoothing));
  }
  return std::max(kl, 0.0);
}

double ClsUncertainty(const PredictionPair& pair) {
  if (!pair.secondary) throw PreconditionError("unmatched prediction pair");
  return ClsUncertainty(pair.primary.class_dist.probs(),
                        pair.secondary->class_dist.probs());
}

std::vector<PseudoAnnotation> ScoreAnnotations(
    const ImageRecord& image, int num_classes,
    std::span<const RawPrediction> primary,
    std::span<const RawPrediction> secondary_unflipped,
    const ScoringOptions& options) {
  const double max_loc = options.u_max_loc.value_or(
      std::hypot(image.width, image.height));
  const double max_cls = options.u_max_cls.value_or(
      std::log(static_cast<double>(std::max(num_classes, 1))));

  std::vector<PseudoAnnotation> out;
  out.reserve(primary.size());
  for (const PredictionPair& pair :
       PairPredictions(primary, secondary_unflipped)) {
    PseudoAnnotation a;
    a.id = pair.primary.id;
    a.image_id = image.id;
    a.box = pair.primary.box;
    a.class_dist = pair.primary.class_dist;
    a.confidence = a.class_dist.Max();
    a.paired = pair.secondary.has_value();
    if (a.paired) {
      a.u_loc = LocUncertainty(pair);
      a.u_cls = ClsUncertainty(pair);
    } else {
      a.u_loc = max_loc;
      a.u_cls = max_cls;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<RawPrediction> ToOriginalFrame(const BranchOutput& branch,
                                           const Dataset& dataset) {
  std::vector<RawPrediction> out = branch.detections;
  if (branch.frame == Frame::kFlipped) {
    for (RawPrediction& p : out) {
      p.box = HFlipBox(p.box, dataset.Image(p.image_id).width);
    }
  }
  return out;
}

std::vector<PseudoAnnotation> ScoreDataset(const Dataset& dataset,
                                           const BranchOutput& primary,
                                           const BranchOutput& secondary,
                                           const ScoringOptions& options) {
  std::unordered_map<std::string, std::vector<RawPrediction>> by_image1;
  std::unordered_map<std::string, std::vector<RawPrediction>> by_image2;
  for (RawPrediction& p : ToOriginalFrame(primary, dataset)) {
    by_image1[p.image_id].push_back(std::move(p));
  }
  for (RawPrediction& p : ToOriginalFrame(secondary, dataset)) {
    by_image2[p.image_id].push_back(std::move(p));
  }
  const std::vector<RawPrediction> none;
  std::vector<PseudoAnnotation> out;
  for (const ImageRecord& image : dataset.images()) {
    auto it1 = by_image1.find(image.id);
    if (it1 == by_image1.end()) continue;
    auto it2 = by_image2.find(image.id);
    const auto& sec = it2 == by_image2.end() ? none : it2->second;
    auto scored = ScoreAnnotations(image, dataset.num_classes(), it1->second,
                                   sec, options);
    out.insert(out.end(), std::make_move_iterator(scored.begin()),
               std::make_move_iterator(scored.end()));
  }
  return out;
}

}  // namespace delr
