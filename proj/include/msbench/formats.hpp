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

// Text formats. All files are line-oriented ASCII with '#' comment lines;
// reals are written in shortest round-trip form so that write(parse(f))
// reproduces f byte for byte on toolkit-written files.

#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "msbench/dataset.hpp"
#include "msbench/error.hpp"
#include "msbench/eval.hpp"
#include "msbench/imageproc.hpp"

namespace msbench {

/// Shortest decimal form that parses back to the same double.
inline std::string format_real(double value) {
    std::array<char, 64> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

/// Fixed two decimals, for percentage tables.
inline std::string format_fixed2(double value) {
    std::array<char, 64> buf;
    const int n = std::snprintf(buf.data(), buf.size(), "%.2f", value);
    return std::string(buf.data(), static_cast<std::size_t>(n));
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << text;
    if (!out) throw DataError(path + ": write failed");
}

namespace detail {

struct TextLine {
    std::size_t number;
    std::string text;
};

/// Splits into numbered lines, dropping blanks and '#' comments.
inline std::vector<TextLine> data_lines(const std::string& text) {
    std::vector<TextLine> out;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t i = line.find_first_not_of(" \t");
        if (i == std::string::npos || line[i] == '#') continue;
        out.push_back({number, line});
    }
    return out;
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline void check_header(const std::vector<TextLine>& lines, const std::string& expected,
                         const std::string& name) {
    if (lines.empty())
        throw ParseError(name, 0, "missing header '" + expected + "'");
    if (lines.front().text != expected)
        throw ParseError(name, lines.front().number, "expected header '" + expected + "'");
}

inline double parse_real(const std::string& tok, const std::string& name, std::size_t line,
                         const char* field) {
    double value{};
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(name, line, std::string("bad ") + field + " '" + tok + "'");
    return value;
}

inline long long parse_int(const std::string& tok, const std::string& name, std::size_t line,
                           const char* field) {
    long long value{};
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(name, line, std::string("bad ") + field + " '" + tok + "'");
    return value;
}

inline void check_identifier(const std::string& id, const char* field) {
    if (id.empty()) throw DataError(std::string(field) + " is empty");
    for (char c : id)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#')
            throw DataError(std::string(field) + " '" + id + "' contains reserved characters");
}

}  // namespace detail

inline SpectraSet spectra_from_string(const std::string& tok, const std::string& name,
                                      std::size_t line) {
    if (tok == "V") return {true, false};
    if (tok == "I") return {false, true};
    if (tok == "VI") return {true, true};
    throw ParseError(name, line, "bad spectra '" + tok + "' (expected V, I, or VI)");
}

inline std::string spectra_to_string(const SpectraSet& s) {
    if (s.vis && s.ir) return "VI";
    if (s.vis) return "V";
    if (s.ir) return "I";
    throw DataError("spectra set is empty");
}

inline constexpr const char* kGtHeader = "msbench-gt v1";
inline constexpr const char* kImagesHeader = "msbench-images v1";
inline constexpr const char* kDetHeader = "msbench-det v1";
inline constexpr const char* kHistHeader = "msbench-hist v1";
inline constexpr const char* kVisHeader = "msbench-vis v1";

namespace detail {

struct PendingImage {
    ImageRecord rec;
    std::optional<long> explicit_frame;
};

struct SidecarData {
    std::vector<PendingImage> images;  // sidecar order
    std::map<std::string, std::size_t> index_of;
};

inline SidecarData parse_sidecar(const std::string& text, const std::string& name) {
    const auto lines = data_lines(text);
    check_header(lines, kImagesHeader, name);
    SidecarData out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto& [number, raw] = lines[li];
        const auto f = split_fields(raw);
        if (f.size() != 5)
            throw ParseError(name, number, "expected 5 fields (image_id width height sequence_id spectra)");
        if (out.index_of.count(f[0]))
            throw ParseError(name, number, "duplicate image_id '" + f[0] + "'");
        ImageRecord rec;
        rec.image_id = f[0];
        rec.width = parse_real(f[1], name, number, "width");
        rec.height = parse_real(f[2], name, number, "height");
        if (!(rec.width > 0.0) || !(rec.height > 0.0))
            throw ParseError(name, number, "image dimensions must be positive");
        rec.sequence_id = f[3];
        rec.spectra = spectra_from_string(f[4], name, number);
        out.index_of[rec.image_id] = out.images.size();
        out.images.push_back({std::move(rec), std::nullopt});
    }
    return out;
}

// Claims explicit frame indices (checking per-sequence uniqueness), then
// gives each remaining image the smallest unused index in its sequence, in
// sidecar order. Deterministic, so write/parse cycles are stable.
inline void assign_frames(std::vector<PendingImage>& images, const std::string& name) {
    std::map<std::string, std::set<long>> used;
    for (const auto& img : images) {
        if (!img.explicit_frame) continue;
        if (!used[img.rec.sequence_id].insert(*img.explicit_frame).second)
            throw ParseError(name, 0,
                             "duplicate frame_index " + std::to_string(*img.explicit_frame) +
                                 " in sequence '" + img.rec.sequence_id + "'");
    }
    for (auto& img : images) {
        if (img.explicit_frame) {
            img.rec.frame_index = *img.explicit_frame;
            continue;
        }
        auto& taken = used[img.rec.sequence_id];
        long f = 0;
        while (taken.count(f)) ++f;
        taken.insert(f);
        img.rec.frame_index = f;
    }
}

inline DatasetManifest finish_manifest(SidecarData&& sidecar, const std::string& name) {
    assign_frames(sidecar.images, name);
    DatasetManifest m;
    m.image_records.reserve(sidecar.images.size());
    for (auto& img : sidecar.images) m.image_records.push_back(std::move(img.rec));
    return m;
}

// Shared by the canonical and visible-pair region parsers: locate the
// image, reconcile its frame_index, and return the clipped box.
inline BoundingBox region_prologue(SidecarData& sidecar, const std::string& name,
                                   std::size_t number, const std::string& image_id,
                                   long long frame, double x, double y, double w, double h) {
    const auto it = sidecar.index_of.find(image_id);
    if (it == sidecar.index_of.end())
        throw ParseError(name, number, "unknown image_id '" + image_id + "'");
    if (frame < 0) throw ParseError(name, number, "frame_index must be non-negative");
    auto& img = sidecar.images[it->second];
    if (img.explicit_frame && *img.explicit_frame != frame)
        throw ParseError(name, number,
                         "conflicting frame_index for image '" + image_id + "'");
    img.explicit_frame = static_cast<long>(frame);
    std::optional<BoundingBox> box;
    try {
        box = clip_box(BoundingBox(x, y, w, h), img.rec.width, img.rec.height);
    } catch (const std::invalid_argument& e) {
        throw ParseError(name, number, e.what());
    }
    if (!box) throw ParseError(name, number, "box lies outside the image bounds");
    return *box;
}

}  // namespace detail

/// Canonical ground truth from in-memory text. Annotation boxes are
/// clipped to their image at parse time; images without region lines get
/// the smallest unused frame_index in their sequence.
inline DatasetManifest parse_canonical_text(const std::string& gt_text,
                                            const std::string& images_text,
                                            const std::string& gt_name = "gt",
                                            const std::string& images_name = "images") {
    auto sidecar = detail::parse_sidecar(images_text, images_name);
    const auto lines = detail::data_lines(gt_text);
    detail::check_header(lines, kGtHeader, gt_name);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto& [number, raw] = lines[li];
        const auto f = detail::split_fields(raw);
        if (f.size() != 8)
            throw ParseError(gt_name, number,
                             "expected 8 fields (image_id frame_index x y w h occlusion ignore)");
        const long long frame = detail::parse_int(f[1], gt_name, number, "frame_index");
        const double x = detail::parse_real(f[2], gt_name, number, "x");
        const double y = detail::parse_real(f[3], gt_name, number, "y");
        const double w = detail::parse_real(f[4], gt_name, number, "w");
        const double h = detail::parse_real(f[5], gt_name, number, "h");
        const double occlusion = detail::parse_real(f[6], gt_name, number, "occlusion");
        if (!(occlusion >= 0.0) || !(occlusion <= 1.0))
            throw ParseError(gt_name, number, "occlusion out of range");
        bool ignore = false;
        if (f[7] == "1")
            ignore = true;
        else if (f[7] != "0")
            throw ParseError(gt_name, number, "bad ignore flag '" + f[7] + "' (expected 0 or 1)");
        const BoundingBox box =
            detail::region_prologue(sidecar, gt_name, number, f[0], frame, x, y, w, h);
        sidecar.images[sidecar.index_of[f[0]]].rec.annotations.push_back(
            Annotation{box, ignore ? 0.0 : occlusion, ignore, std::nullopt, "person"});
    }
    return detail::finish_manifest(std::move(sidecar), gt_name);
}

/// Visible-box pair ground truth: ten fields per line, the full box
/// followed by the visible box. Occlusion is derived from the pair.
inline DatasetManifest parse_visible_pairs_text(const std::string& vis_text,
                                                const std::string& images_text,
                                                const std::string& vis_name = "vis",
                                                const std::string& images_name = "images") {
    auto sidecar = detail::parse_sidecar(images_text, images_name);
    const auto lines = detail::data_lines(vis_text);
    detail::check_header(lines, kVisHeader, vis_name);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto& [number, raw] = lines[li];
        const auto f = detail::split_fields(raw);
        if (f.size() != 10)
            throw ParseError(vis_name, number,
                             "expected 10 fields (image_id frame_index x y w h vx vy vw vh)");
        const long long frame = detail::parse_int(f[1], vis_name, number, "frame_index");
        double v[8];
        static constexpr const char* kFields[8] = {"x", "y", "w", "h", "vx", "vy", "vw", "vh"};
        for (int k = 0; k < 8; ++k)
            v[k] = detail::parse_real(f[static_cast<std::size_t>(k) + 2], vis_name, number,
                                      kFields[k]);
        const BoundingBox box =
            detail::region_prologue(sidecar, vis_name, number, f[0], frame, v[0], v[1], v[2], v[3]);
        auto& img = sidecar.images[sidecar.index_of[f[0]]];
        std::optional<BoundingBox> visible;
        try {
            visible = clip_box(BoundingBox(v[4], v[5], v[6], v[7]), img.rec.width, img.rec.height);
        } catch (const std::invalid_argument& e) {
            throw ParseError(vis_name, number, e.what());
        }
        if (!visible) throw ParseError(vis_name, number, "visible box lies outside the image bounds");
        const double occlusion = occlusion_from_visible(box, *visible);
        img.rec.annotations.push_back(Annotation{box, occlusion, false, visible, "person"});
    }
    return detail::finish_manifest(std::move(sidecar), vis_name);
}

inline std::string canonical_gt_text(const DatasetManifest& m) {
    std::string out(kGtHeader);
    out += '\n';
    for (const auto& rec : m.image_records) {
        detail::check_identifier(rec.image_id, "image_id");
        for (const auto& ann : rec.annotations) {
            out += rec.image_id;
            out += ' ';
            out += std::to_string(rec.frame_index);
            out += ' ';
            out += format_real(ann.box.x);
            out += ' ';
            out += format_real(ann.box.y);
            out += ' ';
            out += format_real(ann.box.w);
            out += ' ';
            out += format_real(ann.box.h);
            out += ' ';
            out += format_real(ann.ignore ? 0.0 : ann.occlusion);
            out += ann.ignore ? " 1\n" : " 0\n";
        }
    }
    return out;
}

inline std::string canonical_images_text(const DatasetManifest& m) {
    std::string out(kImagesHeader);
    out += '\n';
    for (const auto& rec : m.image_records) {
        detail::check_identifier(rec.image_id, "image_id");
        detail::check_identifier(rec.sequence_id, "sequence_id");
        out += rec.image_id;
        out += ' ';
        out += format_real(rec.width);
        out += ' ';
        out += format_real(rec.height);
        out += ' ';
        out += rec.sequence_id;
        out += ' ';
        out += spectra_to_string(rec.spectra);
        out += '\n';
    }
    return out;
}

inline std::string default_sidecar_path(const std::string& gt_path) {
    return std::filesystem::path(gt_path).replace_extension(".images").string();
}

inline DatasetManifest parse_canonical(const std::string& gt_path,
                                       const std::string& images_path = "") {
    const std::string side = images_path.empty() ? default_sidecar_path(gt_path) : images_path;
    DatasetManifest m =
        parse_canonical_text(read_text_file(gt_path), read_text_file(side), gt_path, side);
    m.name = std::filesystem::path(gt_path).stem().string();
    m.root = std::filesystem::path(gt_path).parent_path().string();
    return m;
}

inline DatasetManifest parse_visible_pairs(const std::string& vis_path,
                                           const std::string& images_path = "") {
    const std::string side = images_path.empty() ? default_sidecar_path(vis_path) : images_path;
    DatasetManifest m =
        parse_visible_pairs_text(read_text_file(vis_path), read_text_file(side), vis_path, side);
    m.name = std::filesystem::path(vis_path).stem().string();
    m.root = std::filesystem::path(vis_path).parent_path().string();
    return m;
}

inline void write_canonical(const DatasetManifest& m, const std::string& gt_path,
                            const std::string& images_path = "") {
    const std::string side = images_path.empty() ? default_sidecar_path(gt_path) : images_path;
    write_text_file(gt_path, canonical_gt_text(m));
    write_text_file(side, canonical_images_text(m));
}

inline DetectionSet parse_detections_text(const std::string& text,
                                          const std::string& name = "det") {
    const auto lines = detail::data_lines(text);
    detail::check_header(lines, kDetHeader, name);
    DetectionSet out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto& [number, raw] = lines[li];
        const auto f = detail::split_fields(raw);
        if (f.size() != 6)
            throw ParseError(name, number, "expected 6 fields (image_id x y w h score)");
        const double x = detail::parse_real(f[1], name, number, "x");
        const double y = detail::parse_real(f[2], name, number, "y");
        const double w = detail::parse_real(f[3], name, number, "w");
        const double h = detail::parse_real(f[4], name, number, "h");
        const double score = detail::parse_real(f[5], name, number, "score");
        try {
            out.by_image[f[0]].emplace_back(BoundingBox(x, y, w, h), score);
        } catch (const std::invalid_argument& e) {
            throw ParseError(name, number, e.what());
        }
    }
    return out;
}

inline std::string detections_text(const DetectionSet& dets) {
    std::string out(kDetHeader);
    out += '\n';
    for (const auto& [id, boxes] : dets.by_image) {
        detail::check_identifier(id, "image_id");
        for (const auto& d : boxes) {
            out += id;
            out += ' ';
            out += format_real(d.box.x);
            out += ' ';
            out += format_real(d.box.y);
            out += ' ';
            out += format_real(d.box.w);
            out += ' ';
            out += format_real(d.box.h);
            out += ' ';
            out += format_real(d.score);
            out += '\n';
        }
    }
    return out;
}

inline DetectionSet parse_detections(const std::string& path) {
    DetectionSet out = parse_detections_text(read_text_file(path), path);
    out.dataset_name = std::filesystem::path(path).stem().string();
    return out;
}

inline void write_detections(const DetectionSet& dets, const std::string& path) {
    write_text_file(path, detections_text(dets));
}

inline IntensityHistogram parse_histogram_text(const std::string& text,
                                               const std::string& name = "hist") {
    const auto lines = detail::data_lines(text);
    detail::check_header(lines, kHistHeader, name);
    if (lines.size() != 257)
        throw ParseError(name, 0, "expected 256 bin lines, found " +
                                      std::to_string(lines.size() - 1));
    IntensityHistogram h;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto& [number, raw] = lines[li];
        const auto f = detail::split_fields(raw);
        if (f.size() != 2)
            throw ParseError(name, number, "expected 2 fields (bin_index weight)");
        const long long idx = detail::parse_int(f[0], name, number, "bin_index");
        if (idx != static_cast<long long>(li) - 1)
            throw ParseError(name, number, "bin_index out of order (expected " +
                                               std::to_string(li - 1) + ")");
        const double weight = detail::parse_real(f[1], name, number, "weight");
        if (!(weight >= 0.0))
            throw ParseError(name, number, "weight must be non-negative");
        h.bins[static_cast<std::size_t>(idx)] = weight;
    }
    if (!(h.total() > 0.0)) throw ParseError(name, 0, "histogram total must be positive");
    return h;
}

inline std::string histogram_text(const IntensityHistogram& h) {
    std::string out(kHistHeader);
    out += '\n';
    for (int v = 0; v < 256; ++v) {
        out += std::to_string(v);
        out += ' ';
        out += format_real(h.bins[static_cast<std::size_t>(v)]);
        out += '\n';
    }
    return out;
}

inline IntensityHistogram parse_histogram(const std::string& path) {
    return parse_histogram_text(read_text_file(path), path);
}

inline void write_histogram(const IntensityHistogram& h, const std::string& path) {
    write_text_file(path, histogram_text(h));
}

inline std::string curve_csv(const EvalCurve& curve) {
    std::string out = "threshold,fppi,miss_rate\n";
    for (const auto& p : curve.points) {
        out += format_real(p.threshold);
        out += ',';
        out += format_real(p.fppi);
        out += ',';
        out += format_real(p.miss_rate);
        out += '\n';
    }
    return out;
}

inline void write_curve_csv(const EvalCurve& curve, const std::string& path) {
    write_text_file(path, curve_csv(curve));
}

/// Rows are test sets, columns are train models, final data row holds the
/// column averages; the winning train column is flagged in a trailing
/// comment so the CSV body stays rectangular.
inline std::string matrix_csv(const GeneralizationMatrix& m) {
    std::string out = "test_set";
    for (const auto& train : m.train_models) {
        out += ',';
        out += train;
    }
    out += '\n';
    for (const auto& test : m.test_sets) {
        out += test;
        for (const auto& train : m.train_models) {
            out += ',';
            out += format_fixed2(m.cell(train, test));
        }
        out += '\n';
    }
    out += "average";
    for (const auto& train : m.train_models) {
        out += ',';
        out += format_fixed2(m.column_averages.at(train));
    }
    out += '\n';
    out += "# best: " + m.best_train + "\n";
    return out;
}

inline void write_matrix_csv(const GeneralizationMatrix& m, const std::string& path) {
    write_text_file(path, matrix_csv(m));
}

}  // namespace msbench
