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

#ifndef DELR_TESTS_TEST_UTIL_H_
#define DELR_TESTS_TEST_UTIL_H_

#include <string>
#include <utility>
#include <vector>

#include "delr/pool.h"
#include "delr/types.h"

namespace delr::testing {

inline std::vector<Category> Categories(int k) {
  std::vector<Category> cats;
  for (int i = 0; i < k; ++i) cats.push_back({i + 1, "c" + std::to_string(i)});
  return cats;
}

inline ImageRecord Image(std::string id, double w, double h,
                         std::vector<GroundTruthObject> objects = {}) {
  ImageRecord img;
  img.id = std::move(id);
  img.width = w;
  img.height = h;
  img.gt_objects = std::move(objects);
  return img;
}

// Distribution with `conf` on `cls` and the rest spread evenly.
inline ClassDistribution Peaked(int k, ClassId cls, double conf) {
  if (k == 1) return ClassDistribution::OneHot(1, 0);
  std::vector<double> p(static_cast<std::size_t>(k), (1.0 - conf) / (k - 1));
  p[static_cast<std::size_t>(cls)] = conf;
  return ClassDistribution(std::move(p));
}

inline PseudoAnnotation Annotation(std::string id, std::string image_id,
                                   BoundingBox box, ClassDistribution dist,
                                   double u_loc = 0.0, double u_cls = 0.0) {
  PseudoAnnotation a;
  a.id = std::move(id);
  a.image_id = std::move(image_id);
  a.box = box;
  a.confidence = dist.Max();
  a.class_dist = std::move(dist);
  a.u_loc = u_loc;
  a.u_cls = u_cls;
  a.paired = true;
  return a;
}

inline PoolEntry Entry(PseudoAnnotation a) {
  PoolEntry e;
  e.annotation = std::move(a);
  return e;
}

}  // namespace delr::testing

#endif  // DELR_TESTS_TEST_UTIL_H_
