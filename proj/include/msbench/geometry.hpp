/*
 Copyright 2026 the msbench authors
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace msbench {

/// Width/height aspect ratio used for person anchors.
inline constexpr double kAnchorAspectRatio = 0.41;

/// Axis-aligned pixel rectangle: top-left corner plus size. Coordinates are
/// continuous reals; rasterization happens only at image I/O. Width and
/// height must be strictly positive, so every box has positive area.
struct BoundingBox {
    double x;
    double y;
    double w;
    double h;

    BoundingBox(double x_, double y_, double w_, double h_) : x(x_), y(y_), w(w_), h(h_) {
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h))
            throw std::invalid_argument("BoundingBox: fields must be finite");
        if (!(w > 0.0) || !(h > 0.0))
            throw std::invalid_argument("BoundingBox: width and height must be positive");
    }

    double x2() const { return x + w; }
    double y2() const { return y + h; }
    double area() const { return w * h; }

    bool operator==(const BoundingBox& o) const {
        return x == o.x && y == o.y && w == o.w && h == o.h;
    }
};

/// Detector output: a box plus a finite confidence score.
struct ScoredBox {
    BoundingBox box;
    double score;

    ScoredBox(const BoundingBox& b, double s) : box(b), score(s) {
        if (!std::isfinite(score))
            throw std::invalid_argument("ScoredBox: score must be finite");
    }
};

/// Area of the intersection; 0 when the boxes are disjoint or touch only at
/// an edge (zero-measure overlap counts as none).
inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
    const double ih = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

/// Intersection over union, in [0,1]. Symmetric; 1 exactly iff the boxes
/// are identical.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

/// Intersection over the detection's own area. Used for matching detections
/// against ignore regions, which may be much larger than any detection.
inline double ioa(const BoundingBox& det, const BoundingBox& region) {
    return intersection_area(det, region) / det.area();
}

/// Greedy non-maximum suppression: boxes are visited in order of descending
/// score (ties keep input order) and kept unless they overlap an already
/// kept box with IoU >= iou_threshold. Output preserves the visit order.
inline std::vector<ScoredBox> nms(const std::vector<ScoredBox>& boxes, double iou_threshold = 0.7) {
    if (!(iou_threshold > 0.0) || !(iou_threshold <= 1.0))
        throw std::invalid_argument("nms: iou_threshold must be in (0,1]");
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return boxes[a].score > boxes[b].score;
    });
    std::vector<ScoredBox> kept;
    for (std::size_t idx : order) {
        bool suppressed = false;
        for (const ScoredBox& k : kept) {
            if (iou(boxes[idx].box, k.box) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(boxes[idx]);
    }
    return kept;
}

/// One box per requested height, centered at (center_x, center_y), with
/// width fixed to kAnchorAspectRatio times the height.
inline std::vector<BoundingBox> anchor_boxes(double center_x, double center_y,
                                             const std::vector<double>& heights) {
    std::vector<BoundingBox> out;
    out.reserve(heights.size());
    for (double h : heights) {
        if (!(h > 0.0)) throw std::invalid_argument("anchor_boxes: heights must be positive");
        const double w = kAnchorAspectRatio * h;
        out.emplace_back(center_x - w / 2.0, center_y - h / 2.0, w, h);
    }
    return out;
}

/// Horizontal mirror within an image of the given width. Involution.
inline BoundingBox flip_box(const BoundingBox& box, double image_width) {
    return BoundingBox(image_width - box.x - box.w, box.y, box.w, box.h);
}

/// Multiplies all four fields by factor (> 0).
inline BoundingBox scale_box(const BoundingBox& box, double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("scale_box: factor must be positive");
    return BoundingBox(box.x * factor, box.y * factor, box.w * factor, box.h * factor);
}

/// Clips a box to [0,width] x [0,height]. Empty when nothing remains.
inline std::optional<BoundingBox> clip_box(const BoundingBox& box, double width, double height) {
    const double x1 = std::max(box.x, 0.0);
    const double y1 = std::max(box.y, 0.0);
    const double x2 = std::min(box.x2(), width);
    const double y2 = std::min(box.y2(), height);
    if (!(x2 - x1 > 0.0) || !(y2 - y1 > 0.0)) return std::nullopt;
    return BoundingBox(x1, y1, x2 - x1, y2 - y1);
}

}  // namespace msbench
