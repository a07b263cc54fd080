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

#include "delr/geometry.h"

#include <algorithm>

#include "delr/error.h"

namespace delr {

double IntersectionArea(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.Right(), b.Right()) - std::max(a.x, b.x);
  const double ih = std::min(a.Bottom(), b.Bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

bool Intersects(const BoundingBox& a, const BoundingBox& b) {
  return IntersectionArea(a, b) > 0.0;
}

double Iou(const BoundingBox& a, const BoundingBox& b) {
  if (!a.HasPositiveArea() || !b.HasPositiveArea()) {
    throw PreconditionError("IoU of a box with non-positive area");
  }
  const double inter = IntersectionArea(a, b);
  const double uni = a.Area() + b.Area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BoundingBox HFlipBox(const BoundingBox& b, double image_width) {
  if (b.x < 0.0 || b.w < 0.0 || b.Right() > image_width) {
    throw PreconditionError("box does not fit the image width");
  }
  return {image_width - b.x - b.w, b.y, b.w, b.h};
}

BoundingBox ClipToImage(const BoundingBox& b, double width, double height) {
  const double x0 = std::clamp(b.x, 0.0, width);
  const double y0 = std::clamp(b.y, 0.0, height);
  const double x1 = std::clamp(b.Right(), 0.0, width);
  const double y1 = std::clamp(b.Bottom(), 0.0, height);
  return {x0, y0, x1 - x0, y1 - y0};
}

BoundingBox EnlargeRegion(const BoundingBox& b, double factor,
                          const ImageRecord& image) {
  if (!(factor >= 1.0)) {
    throw PreconditionError("enlargement factor must be at least 1");
  }
  if (factor == 1.0) return ClipToImage(b, image.width, image.height);
  const double cx = b.x + b.w / 2.0;
  const double cy = b.y + b.h / 2.0;
  const double w = b.w * factor;
  const double h = b.h * factor;
  return ClipToImage({cx - w / 2.0, cy - h / 2.0, w, h}, image.width,
                     image.height);
}

}  // namespace delr
