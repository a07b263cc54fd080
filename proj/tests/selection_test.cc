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

#include "delr/selection.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "delr/error.h"
#include "delr/rng.h"
#include "test_util.h"

namespace delr {
namespace {

using testing::Annotation;
using testing::Peaked;

PseudoAnnotation WithConfidence(std::string id, double conf) {
  PseudoAnnotation a =
      Annotation(std::move(id), "1", {0, 0, 5, 5}, Peaked(2, 0, 0.99));
  a.confidence = conf;
  return a;
}

TEST(FilterTest, Threshold) {
  const std::vector<PseudoAnnotation> anns = {WithConfidence("a", 0.71),
                                              WithConfidence("b", 0.69),
                                              WithConfidence("c", 0.7)};
  const auto kept = FilterByConfidence(anns, 0.7);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].id, "a");
  EXPECT_EQ(kept[1].id, "c");
  EXPECT_EQ(FilterByConfidence(anns, 0.0).size(), 3u);
}

TEST(RankTest, DescendingByKey) {
  std::vector<PseudoAnnotation> anns;
  for (double u : {3.0, 9.0, 1.0}) {
    anns.push_back(Annotation("a" + std::to_string(static_cast<int>(u)), "1",
                              {0, 0, 5, 5}, Peaked(2, 0, 0.9), u, 0.0));
  }
  const auto ranked = RankDescending(anns, RankKey::kLoc);
  EXPECT_EQ(ranked[0].u_loc, 9.0);
  EXPECT_EQ(ranked[1].u_loc, 3.0);
  EXPECT_EQ(ranked[2].u_loc, 1.0);
}

TEST(RankTest, TiesBreakByImageThenId) {
  std::vector<PseudoAnnotation> anns = {
      Annotation("b", "10", {0, 0, 5, 5}, Peaked(2, 0, 0.9)),
      Annotation("a", "10", {0, 0, 5, 5}, Peaked(2, 0, 0.9)),
      Annotation("z", "9", {0, 0, 5, 5}, Peaked(2, 0, 0.9)),
      Annotation("10", "2", {0, 0, 5, 5}, Peaked(2, 0, 0.9)),
      Annotation("9", "2", {0, 0, 5, 5}, Peaked(2, 0, 0.9))};
  const auto ranked = RankDescending(anns, RankKey::kCls);
  std::vector<std::string> ids;
  for (const auto& a : ranked) ids.push_back(a.image_id + "/" + a.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"2/9", "2/10", "9/z", "10/a",
                                           "10/b"}));
}

TEST(RankTest, IsPermutation) {
  RngStream rng(1);
  std::vector<PseudoAnnotation> anns;
  std::vector<PoolEntry> entries;
  for (int i = 0; i < 200; ++i) {
    anns.push_back(Annotation(std::to_string(i), std::to_string(i % 7),
                              {0, 0, 5, 5}, Peaked(2, 0, 0.9),
                              std::floor(rng.Uniform(0, 5)), rng.Uniform()));
    entries.push_back(testing::Entry(anns.back()));
  }
  std::vector<const PoolEntry*> ptrs;
  for (const auto& e : entries) ptrs.push_back(&e);
  const auto ranked = RankDescending(anns, RankKey::kLoc);
  const auto ids = RankIds(ptrs, RankKey::kLoc);
  ASSERT_EQ(ranked.size(), anns.size());
  std::vector<std::string> a;
  std::vector<std::string> b;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    EXPECT_EQ(ranked[i].id, ids[i]);
    if (i > 0) EXPECT_GE(ranked[i - 1].u_loc, ranked[i].u_loc);
    a.push_back(ranked[i].id);
    b.push_back(anns[i].id);
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(MedianTest, Examples) {
  EXPECT_DOUBLE_EQ(Median({0.1, 0.5, 0.9}), 0.5);
  EXPECT_DOUBLE_EQ(Median({0.1, 0.3, 0.5, 0.9}), 0.4);
  EXPECT_DOUBLE_EQ(Median({0.7}), 0.7);
  EXPECT_THROW(Median({}), PreconditionError);
}

TEST(MedianTest, EntriesSkipDropped) {
  std::vector<PoolEntry> entries;
  for (double u : {0.1, 0.2, 5.0}) {
    entries.push_back(testing::Entry(
        Annotation("x" + std::to_string(u), "1", {0, 0, 5, 5},
                   Peaked(2, 0, 0.9), 0.0, u)));
  }
  entries[2].box_state = BoxState::kDropped;
  std::vector<const PoolEntry*> ptrs;
  for (const auto& e : entries) ptrs.push_back(&e);
  EXPECT_DOUBLE_EQ(MedianUCls(ptrs), 0.15);
}

}  // namespace
}  // namespace delr
