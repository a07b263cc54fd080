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

#include "delr/synth.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "delr/error.h"
#include "delr/geometry.h"
#include "delr/rng.h"

namespace delr {
namespace {

constexpr int kMaxPlacementTries = 1000;
constexpr double kMaxGtPairIou = 0.5;
constexpr double kSpuriousMaxIou = 0.3;
constexpr int kSpuriousTries = 100;
constexpr double kSpuriousMinSide = 20.0;

int UniformIntIn(RngStream& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.UniformInt(
                  static_cast<std::uint64_t>(hi - lo + 1)));
}

void RequireRate(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [0, 1]");
  }
}

// Distribution whose argmax is `cls` with probability `conf`; the remaining
// mass is spread over the other classes with weights in [0.8, 1.2].
ClassDistribution MakeDistribution(int num_classes, ClassId cls, double conf,
                                   RngStream& rng) {
  if (num_classes == 1) return ClassDistribution::OneHot(1, 0);
  // Keeps every other class strictly below conf.
  const double floor = 1.5 / (num_classes + 0.5) + 1e-3;
  conf = std::clamp(conf, floor, 1.0);
  std::vector<double> w(static_cast<std::size_t>(num_classes), 0.0);
  double wsum = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    if (k == cls) continue;
    w[static_cast<std::size_t>(k)] = rng.Uniform(0.8, 1.2);
    wsum += w[static_cast<std::size_t>(k)];
  }
  std::vector<double> p(w.size(), 0.0);
  double sum = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    p[static_cast<std::size_t>(k)] =
        k == cls ? conf : (1.0 - conf) * w[static_cast<std::size_t>(k)] / wsum;
    sum += p[static_cast<std::size_t>(k)];
  }
  for (double& v : p) v /= sum;
  return ClassDistribution(std::move(p));
}

ClassId WrongClass(int num_classes, ClassId truth, RngStream& rng) {
  if (num_classes < 2) return truth;
  const auto k = static_cast<ClassId>(
      rng.UniformInt(static_cast<std::uint64_t>(num_classes - 1)));
  return k >= truth ? k + 1 : k;
}

BranchOutput DetectBranch(const Dataset& dataset, const NoiseParams& noise,
                          int branch, RngStream& rng) {
  BranchOutput out;
  out.branch = branch;
  out.frame = branch == 2 ? Frame::kFlipped : Frame::kOriginal;
  const int k = dataset.num_classes();
  const std::string prefix = "p" + std::to_string(branch) + "-";

  for (const ImageRecord& img : dataset.images()) {
    int n = 0;
    auto emit = [&](BoundingBox box, ClassDistribution dist) {
      if (branch == 2) box = HFlipBox(box, img.width);
      out.detections.push_back({prefix + img.id + "-" + std::to_string(n++),
                                img.id, box, std::move(dist)});
    };

    for (const GroundTruthObject& o : img.gt_objects) {
      // Draw order is fixed so every object consumes the same number of draws.
      const bool missed = rng.Bernoulli(noise.miss_rate);
      const double j = noise.jitter_frac;
      const double dx = rng.Uniform(-j, j) * o.box.w;
      const double dy = rng.Uniform(-j, j) * o.box.h;
      const double dw = rng.Uniform(-j, j) * o.box.w;
      const double dh = rng.Uniform(-j, j) * o.box.h;
      const bool confused = k > 1 && rng.Bernoulli(noise.class_confusion);
      const ClassId wrong = WrongClass(k, o.class_id, rng);
      if (missed) continue;

      BoundingBox b{o.box.x + dx, o.box.y + dy,
                    std::max(o.box.w + dw, 1.0), std::max(o.box.h + dh, 1.0)};
      b = ClipToImage(b, img.width, img.height);
      if (!b.HasPositiveArea()) continue;

      double magnitude = 0.0;
      if (j > 0.0) {
        magnitude = (std::abs(dx) / o.box.w + std::abs(dy) / o.box.h +
                     std::abs(dw) / o.box.w + std::abs(dh) / o.box.h) /
                    (4.0 * j);
      }
      double conf = 0.5 + 0.5 * (1.0 - magnitude);
      if (confused) conf -= noise.confusion_penalty;
      const ClassId cls = confused ? wrong : o.class_id;
      emit(b, MakeDistribution(k, cls, std::clamp(conf, 0.0, 1.0), rng));
    }

    const int spurious = rng.Poisson(noise.spurious_rate);
    for (int s = 0; s < spurious; ++s) {
      const double min_side =
          std::min({kSpuriousMinSide, img.width, img.height});
      bool placed = false;
      BoundingBox b;
      for (int t = 0; t < kSpuriousTries && !placed; ++t) {
        const double w = rng.Uniform(min_side, std::max(min_side, img.width / 3));
        const double h =
            rng.Uniform(min_side, std::max(min_side, img.height / 3));
        b = {rng.Uniform(0.0, img.width - w), rng.Uniform(0.0, img.height - h),
             w, h};
        placed = std::all_of(img.gt_objects.begin(), img.gt_objects.end(),
                             [&](const GroundTruthObject& o) {
                               return Iou(b, o.box) < kSpuriousMaxIou;
                             });
      }
      const auto cls = static_cast<ClassId>(
          rng.UniformInt(static_cast<std::uint64_t>(k)));
      const double conf =
          rng.Uniform(noise.spurious_conf_lo, noise.spurious_conf_hi);
      if (placed) emit(b, MakeDistribution(k, cls, conf, rng));
    }
  }
  return out;
}

}  // namespace

void NoiseParams::Validate() const {
  if (!(jitter_frac >= 0.0)) {
    throw ValidationError("jitter_frac must be non-negative");
  }
  RequireRate(class_confusion, "class_confusion");
  RequireRate(miss_rate, "miss_rate");
  if (!(spurious_rate >= 0.0)) {
    throw ValidationError("spurious_rate must be non-negative");
  }
  RequireRate(confusion_penalty, "confusion_penalty");
  RequireRate(spurious_conf_lo, "spurious_conf_lo");
  RequireRate(spurious_conf_hi, "spurious_conf_hi");
  if (spurious_conf_lo > spurious_conf_hi) {
    throw ValidationError("spurious_conf_lo exceeds spurious_conf_hi");
  }
}

NoiseParams CalibratedNoise() {
  NoiseParams n;
  n.jitter_frac = 0.155;
  n.class_confusion = 0.05;
  n.miss_rate = 0.05;
  n.spurious_rate = 1.0;
  n.confusion_penalty = 0.02;
  n.spurious_conf_lo = 0.5;
  n.spurious_conf_hi = 1.0;
  return n;
}

Dataset GenerateScenario(const ScenarioParams& p) {
  if (p.num_images < 0 || p.num_classes < 1 ||
      p.min_objects > p.max_objects || p.min_objects < 0 ||
      p.min_box_size > p.max_box_size || p.min_box_size < 1) {
    throw ValidationError("empty scenario parameter range");
  }
  if (p.max_box_size > p.image_width || p.max_box_size > p.image_height) {
    throw ValidationError("boxes do not fit in the image");
  }
  RngStream rng = RngStream::Derive(p.seed, "synth.scene");
  std::vector<ImageRecord> images;
  images.reserve(static_cast<std::size_t>(p.num_images));
  for (int i = 0; i < p.num_images; ++i) {
    ImageRecord img;
    img.id = std::to_string(i);
    img.width = p.image_width;
    img.height = p.image_height;
    const int n = UniformIntIn(rng, p.min_objects, p.max_objects);
    for (int k = 0; k < n; ++k) {
      bool placed = false;
      for (int t = 0; t < kMaxPlacementTries && !placed; ++t) {
        const int w = UniformIntIn(rng, p.min_box_size, p.max_box_size);
        const int h = UniformIntIn(rng, p.min_box_size, p.max_box_size);
        const int x = UniformIntIn(rng, 0, p.image_width - w);
        const int y = UniformIntIn(rng, 0, p.image_height - h);
        const BoundingBox b{static_cast<double>(x), static_cast<double>(y),
                            static_cast<double>(w), static_cast<double>(h)};
        placed = std::all_of(img.gt_objects.begin(), img.gt_objects.end(),
                             [&](const GroundTruthObject& o) {
                               return Iou(b, o.box) < kMaxGtPairIou;
                             });
        if (placed) {
          const auto cls = static_cast<ClassId>(
              rng.UniformInt(static_cast<std::uint64_t>(p.num_classes)));
          img.gt_objects.push_back({std::to_string(i) + "-" + std::to_string(k),
                                    b, cls});
        }
      }
      if (!placed) {
        throw InfeasibleError("could not place object " + std::to_string(k) +
                              " in image " + img.id);
      }
    }
    images.push_back(std::move(img));
  }
  std::vector<Category> cats;
  for (int c = 0; c < p.num_classes; ++c) {
    cats.push_back({c + 1, "class_" + std::to_string(c)});
  }
  Dataset d(std::move(images), std::move(cats));
  d.Validate();
  return d;
}

std::pair<BranchOutput, BranchOutput> MockDetect(const Dataset& dataset,
                                                 const NoiseParams& noise,
                                                 std::uint64_t seed) {
  noise.Validate();
  RngStream rng1 = RngStream::Derive(seed, "synth.detect", 1);
  RngStream rng2 = RngStream::Derive(seed, "synth.detect", 2);
  return {DetectBranch(dataset, noise, 1, rng1),
          DetectBranch(dataset, noise, 2, rng2)};
}

}  // namespace delr
