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
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace msbench {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("GrayImage: dimensions must be positive");
        data.assign(static_cast<std::size_t>(w) * h, fill);
    }

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }

    bool operator==(const GrayImage&) const = default;
};

/// Three aligned planes of equal size; written as RGB when saved as PPM.
struct PlanarImage {
    std::array<GrayImage, 3> planes;
};

/// 256-bin intensity histogram. Bins hold pixel counts, or non-negative
/// real weights for averaged matching references.
struct IntensityHistogram {
    std::array<double, 256> bins{};

    double total() const {
        double sum = 0.0;
        for (double b : bins) sum += b;
        return sum;
    }

    /// Same shape scaled to unit mass. Requires positive total.
    IntensityHistogram normalized() const {
        const double sum = total();
        if (!(sum > 0.0))
            throw std::invalid_argument("IntensityHistogram: total must be positive");
        IntensityHistogram out;
        for (int v = 0; v < 256; ++v) out.bins[v] = bins[v] / sum;
        return out;
    }

    /// Cumulative distribution: non-decreasing, ends at exactly 1.
    std::array<double, 256> cdf() const {
        const double sum = total();
        if (!(sum > 0.0))
            throw std::invalid_argument("IntensityHistogram: total must be positive");
        std::array<double, 256> out;
        double running = 0.0;
        for (int v = 0; v < 256; ++v) {
            running += bins[v];
            out[v] = running / sum;
        }
        return out;
    }

    bool operator==(const IntensityHistogram&) const = default;
};

/// Per-intensity pixel counts; the total equals width * height.
inline IntensityHistogram compute_histogram(const GrayImage& img) {
    IntensityHistogram h;
    for (std::uint8_t v : img.data) h.bins[v] += 1.0;
    return h;
}

/// Bin-wise arithmetic mean of the unit-normalized inputs, so differently
/// sized sample images contribute equally. Result has unit mass.
inline IntensityHistogram average_reference(const std::vector<IntensityHistogram>& histograms) {
    if (histograms.empty())
        throw std::invalid_argument("average_reference: need at least one histogram");
    IntensityHistogram out;
    for (const auto& h : histograms) {
        const IntensityHistogram n = h.normalized();
        for (int v = 0; v < 256; ++v) out.bins[v] += n.bins[v];
    }
    for (int v = 0; v < 256; ++v) out.bins[v] /= static_cast<double>(histograms.size());
    return out;
}

/// Histogram-specification lookup table: each source intensity v maps to
/// the smallest u whose reference CDF reaches the source CDF at v. The
/// mapping is monotone non-decreasing by construction.
inline std::array<std::uint8_t, 256> match_lut(const IntensityHistogram& source,
                                               const IntensityHistogram& reference) {
    const auto fs = source.cdf();
    const auto fr = reference.cdf();
    std::array<std::uint8_t, 256> lut;
    int u = 0;
    for (int v = 0; v < 256; ++v) {
        while (u < 255 && fr[u] < fs[v]) ++u;
        lut[v] = static_cast<std::uint8_t>(u);
    }
    return lut;
}

/// Remaps the image so its intensity distribution follows the reference.
inline GrayImage histogram_match(const GrayImage& img, const IntensityHistogram& reference) {
    const auto lut = match_lut(compute_histogram(img), reference);
    GrayImage out = img;
    for (auto& v : out.data) v = lut[v];
    return out;
}

/// Clones the single plane into a three-plane image, bit-exactly.
inline PlanarImage replicate_plane(const GrayImage& img) {
    return PlanarImage{{img, img, img}};
}

/// Doubles both dimensions via bilinear interpolation with half-pixel
/// centers and clamped edges. Constant images stay constant.
inline GrayImage upscale2x(const GrayImage& img) {
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument("upscale2x: empty image");
    GrayImage out(img.width * 2, img.height * 2);
    for (int oy = 0; oy < out.height; ++oy) {
        const double sy = 0.5 * (oy + 0.5) - 0.5;
        const double fy0 = std::floor(sy);
        const double fy = sy - fy0;
        const int y0 = std::clamp(static_cast<int>(fy0), 0, img.height - 1);
        const int y1 = std::clamp(static_cast<int>(fy0) + 1, 0, img.height - 1);
        for (int ox = 0; ox < out.width; ++ox) {
            const double sx = 0.5 * (ox + 0.5) - 0.5;
            const double fx0 = std::floor(sx);
            const double fx = sx - fx0;
            const int x0 = std::clamp(static_cast<int>(fx0), 0, img.width - 1);
            const int x1 = std::clamp(static_cast<int>(fx0) + 1, 0, img.width - 1);
            const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
            const double bottom = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
            const double value = (1.0 - fy) * top + fy * bottom;
            out.at(ox, oy) = static_cast<std::uint8_t>(std::lround(value));
        }
    }
    return out;
}

}  // namespace msbench
