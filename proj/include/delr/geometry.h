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

#ifndef DELR_GEOMETRY_H_
#define DELR_GEOMETRY_H_

#include "delr/types.h"

namespace delr {

// Intersection over union. Touching boxes have IoU 0. Throws
// PreconditionError if either box has non-positive area.
double Iou(const BoundingBox& a, const BoundingBox& b);

// Area of the open intersection, 0 when the boxes only touch.
double IntersectionArea(const BoundingBox& a, const BoundingBox& b);
bool Intersects(const BoundingBox& a, const BoundingBox& b);

// Mirrors a box about the vertical center line: x' = W - x - w.
// Throws PreconditionError if the box does not fit in [0, W].
BoundingBox HFlipBox(const BoundingBox& b, double image_width);

// Scales w and h by `factor` about the box center, then clips to the image.
// Throws PreconditionError if factor < 1.
BoundingBox EnlargeRegion(const BoundingBox& b, double factor,
                          const ImageRecord& image);

// Clips a box to [0, width] x [0, height].
BoundingBox ClipToImage(const BoundingBox& b, double width, double height);

}  // namespace delr

#endif  // DELR_GEOMETRY_H_
