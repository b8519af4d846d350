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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msbench/geometry.hpp"

namespace msbench {

/// Which spectra a dataset image covers (visual-optical, thermal infrared).
struct SpectraSet {
    bool vis = false;
    bool ir = false;

    bool operator==(const SpectraSet&) const = default;
};

/// Ground-truth region. Regular annotations carry an occlusion fraction
/// (occluded area over total area); ignore regions mark ambiguous image
/// areas and carry no occlusion semantics.
struct Annotation {
    BoundingBox box;
    double occlusion = 0.0;
    bool ignore = false;
    std::optional<BoundingBox> visible_box;
    std::string label = "person";
};

struct ImageRecord {
    std::string image_id;
    std::string sequence_id;
    long frame_index = 0;  // non-negative, unique within sequence_id
    SpectraSet spectra;
    double width = 0.0;
    double height = 0.0;
    std::vector<Annotation> annotations;
};

/// Subset rule: an annotation is evaluable when its box height is at least
/// min_height and its occlusion fraction is at most max_occlusion.
struct SubsetSpec {
    double min_height = 0.0;
    double max_occlusion = 1.0;

    static SubsetSpec reasonable() { return {50.0, 0.35}; }
    static SubsetSpec all() { return {20.0, 0.35}; }

    bool keeps(const Annotation& ann) const {
        return ann.box.h >= min_height && ann.occlusion <= max_occlusion;
    }

    bool operator==(const SubsetSpec&) const = default;
};

/// One dataset split: descriptive metadata plus the per-image records.
/// skip is the frame stride relative to the original sequence; subset_rules
/// records the rules already applied (permissive default: none).
struct DatasetManifest {
    std::string name;
    std::string root;
    std::string split;
    long skip = 1;
    double scale_factor = 1.0;
    SubsetSpec subset_rules;
    std::vector<ImageRecord> image_records;
};

/// Binary person-class raster from a semantic segmentation label image.
struct SegmentationMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> person_pixels;  // row-major, nonzero = person

    bool at(int x, int y) const {
        return person_pixels[static_cast<std::size_t>(y) * width + x] != 0;
    }
};

/// Number of evaluable (non-ignore) annotations in the manifest.
inline std::size_t count_annotations(const DatasetManifest& m) {
    std::size_t n = 0;
    for (const auto& rec : m.image_records)
        for (const auto& ann : rec.annotations)
            if (!ann.ignore) ++n;
    return n;
}

/// Number of ignore regions in the manifest.
inline std::size_t count_ignores(const DatasetManifest& m) {
    std::size_t n = 0;
    for (const auto& rec : m.image_records)
        for (const auto& ann : rec.annotations)
            if (ann.ignore) ++n;
    return n;
}

/// Occlusion fraction derived from a full and a visible box: the visible box
/// is clipped to the full box, and the uncovered fraction of the full box is
/// the occlusion. 0 when the visible box covers everything, 1 when disjoint.
inline double occlusion_from_visible(const BoundingBox& full, const BoundingBox& visible) {
    const double covered = intersection_area(full, visible) / full.area();
    return std::clamp(1.0 - covered, 0.0, 1.0);
}

/// One annotation per 8-connected component of person pixels, with the tight
/// bounding rectangle of the component. Components whose width/height ratio
/// falls below ratio_low or above ratio_high are flagged as ignore regions.
/// Components are emitted in order of their first pixel in row-major scan.
inline std::vector<Annotation> seg_to_boxes(const SegmentationMask& mask, double ratio_low = 0.2,
                                            double ratio_high = 0.6) {
    if (!(ratio_low < ratio_high))
        throw std::invalid_argument("seg_to_boxes: ratio_low must be below ratio_high");
    if (mask.width < 0 || mask.height < 0 ||
        mask.person_pixels.size() !=
            static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height))
        throw std::invalid_argument("seg_to_boxes: raster size does not match dimensions");

    const int w = mask.width;
    const int h = mask.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<int> parent;

    auto find = [&](int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    // First pass: provisional labels, merging across the four already-seen
    // 8-neighbours (W, NW, N, NE).
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            int lbl = -1;
            const int nx[4] = {x - 1, x - 1, x, x + 1};
            const int ny[4] = {y, y - 1, y - 1, y - 1};
            for (int k = 0; k < 4; ++k) {
                if (nx[k] < 0 || nx[k] >= w || ny[k] < 0) continue;
                const int nl = label[static_cast<std::size_t>(ny[k]) * w + nx[k]];
                if (nl < 0) continue;
                if (lbl < 0)
                    lbl = find(nl);
                else
                    unite(lbl, nl);
            }
            if (lbl < 0) {
                lbl = static_cast<int>(parent.size());
                parent.push_back(lbl);
            }
            label[idx] = find(lbl);
        }
    }

    // Second pass: component extents keyed by root, ordered by first pixel.
    struct Extent {
        int min_x, min_y, max_x, max_y;
    };
    std::vector<int> root_order;
    std::map<int, Extent> extents;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int lbl = label[static_cast<std::size_t>(y) * w + x];
            if (lbl < 0) continue;
            const int root = find(lbl);
            auto it = extents.find(root);
            if (it == extents.end()) {
                extents.emplace(root, Extent{x, y, x, y});
                root_order.push_back(root);
            } else {
                Extent& e = it->second;
                e.min_x = std::min(e.min_x, x);
                e.max_x = std::max(e.max_x, x);
                e.max_y = std::max(e.max_y, y);
            }
        }
    }

    std::vector<Annotation> out;
    out.reserve(root_order.size());
    for (int root : root_order) {
        const Extent& e = extents.at(root);
        const double bw = e.max_x - e.min_x + 1;
        const double bh = e.max_y - e.min_y + 1;
        const double ratio = bw / bh;
        out.push_back(Annotation{BoundingBox(e.min_x, e.min_y, bw, bh), 0.0,
                                 ratio < ratio_low || ratio > ratio_high, std::nullopt, "person"});
    }
    return out;
}

/// Keeps, per sequence, frames whose frame_index is divisible by skip.
/// Frame indices are preserved; the manifest's skip field is multiplied.
inline DatasetManifest skip_sample(const DatasetManifest& manifest, long skip) {
    if (skip < 1) throw std::invalid_argument("skip_sample: skip must be >= 1");
    DatasetManifest out = manifest;
    if (skip == 1) return out;
    out.image_records.clear();
    for (const auto& rec : manifest.image_records)
        if (rec.frame_index % skip == 0) out.image_records.push_back(rec);
    out.skip = manifest.skip * skip;
    return out;
}

/// Converts annotations failing the subset rule into ignore regions.
/// Nothing is deleted: detections on sub-threshold persons must not count
/// as false positives, so the regions stay as ignores. Idempotent.
inline DatasetManifest filter_subset(const DatasetManifest& manifest, const SubsetSpec& spec) {
    DatasetManifest out = manifest;
    for (auto& rec : out.image_records)
        for (auto& ann : rec.annotations)
            if (!ann.ignore && !spec.keeps(ann)) ann.ignore = true;
    out.subset_rules = spec;
    return out;
}

/// Counts of non-ignore annotation heights per half-open bin
/// [k*bin_width, (k+1)*bin_width), keyed by the bin's lower edge.
inline std::map<long long, std::size_t> height_histogram(const DatasetManifest& manifest,
                                                         int bin_width) {
    if (bin_width < 1) throw std::invalid_argument("height_histogram: bin_width must be >= 1");
    std::map<long long, std::size_t> bins;
    for (const auto& rec : manifest.image_records)
        for (const auto& ann : rec.annotations) {
            if (ann.ignore) continue;
            const long long edge =
                static_cast<long long>(std::floor(ann.box.h / bin_width)) * bin_width;
            ++bins[edge];
        }
    return bins;
}

/// Appends a horizontally mirrored copy of every image record. Mirrored
/// records get "_flip" appended to image_id and sequence_id, keeping frame
/// indices unique per sequence. Record count doubles.
inline DatasetManifest flip_augment(const DatasetManifest& manifest) {
    DatasetManifest out = manifest;
    out.image_records.reserve(manifest.image_records.size() * 2);
    for (const auto& rec : manifest.image_records) {
        ImageRecord mirrored = rec;
        mirrored.image_id += "_flip";
        mirrored.sequence_id += "_flip";
        for (auto& ann : mirrored.annotations) {
            ann.box = flip_box(ann.box, rec.width);
            if (ann.visible_box) ann.visible_box = flip_box(*ann.visible_box, rec.width);
        }
        out.image_records.push_back(std::move(mirrored));
    }
    return out;
}

}  // namespace msbench
