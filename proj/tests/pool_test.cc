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

#include "delr/pool.h"

#include <gtest/gtest.h>

#include "delr/error.h"
#include "test_util.h"

namespace delr {
namespace {

using testing::Annotation;
using testing::Image;
using testing::Peaked;

Dataset TwoImages() {
  return Dataset({Image("1", 100, 100, {{"o1", {0, 0, 10, 10}, 0}}),
                  Image("2", 100, 100, {{"o2", {5, 5, 10, 10}, 1}})},
                 testing::Categories(2));
}

TEST(NewPoolTest, AllPseudo) {
  const Dataset d = TwoImages();
  const std::vector<PseudoAnnotation> anns = {
      Annotation("a", "1", {0, 0, 10, 10}, Peaked(2, 0, 0.9)),
      Annotation("b", "1", {20, 0, 10, 10}, Peaked(2, 1, 0.9)),
      Annotation("c", "2", {5, 5, 10, 10}, Peaked(2, 1, 0.9))};
  const PoolState pool = NewPool(d, anns);
  EXPECT_EQ(pool.size(), 3u);
  EXPECT_EQ(pool.CountBoxState(BoxState::kPseudo), 3u);
  EXPECT_EQ(pool.CountClassState(ClassState::kPseudo), 3u);
  EXPECT_EQ(pool.At("b").annotation.image_id, "1");
  EXPECT_TRUE(NewPool(d, {}).empty());
}

TEST(NewPoolTest, UnknownImageNamesAnnotation) {
  const Dataset d = TwoImages();
  const std::vector<PseudoAnnotation> anns = {
      Annotation("a", "ghost", {0, 0, 10, 10}, Peaked(2, 0, 0.9))};
  try {
    NewPool(d, anns);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown image"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(NewPoolTest, DuplicateIdsRejected) {
  const Dataset d = TwoImages();
  const std::vector<PseudoAnnotation> anns = {
      Annotation("a", "1", {0, 0, 10, 10}, Peaked(2, 0, 0.9)),
      Annotation("a", "2", {0, 0, 10, 10}, Peaked(2, 0, 0.9))};
  EXPECT_THROW(NewPool(d, anns), ValidationError);
}

TEST(PoolTest, RemoveUntouchedKeepsLabeledAndReindexes) {
  PoolState pool;
  for (const char* id : {"a", "b", "c"}) {
    pool.Add(testing::Entry(
        Annotation(id, "1", {0, 0, 10, 10}, Peaked(2, 0, 0.9))));
  }
  pool.AtMutable("b").box_state = BoxState::kVerifiedKept;
  pool.AtMutable("c").box_state = BoxState::kDropped;
  EXPECT_EQ(pool.RemoveUntouched(), 1u);
  EXPECT_EQ(pool.Find("a"), nullptr);
  EXPECT_EQ(pool.At("c").box_state, BoxState::kDropped);
  EXPECT_EQ(pool.CountLabeled(), 1u);
  EXPECT_THROW(pool.At("a"), PreconditionError);
}

}  // namespace
}  // namespace delr
