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
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "msbench/dataset.hpp"
#include "msbench/error.hpp"
#include "msbench/geometry.hpp"
#include "msbench/parallel.hpp"

namespace msbench {

/// Detector output for one dataset split, keyed by image id. Every key must
/// name an image of the evaluated manifest; unknown ids are an error.
struct DetectionSet {
    std::string dataset_name;
    std::map<std::string, std::vector<ScoredBox>> by_image;
};

/// Outcome of matching one image's detections against its ground truth.
struct MatchResult {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (det index, ann index)
};

struct CurvePoint {
    double threshold;
    double fppi;
    double miss_rate;
};

/// FPPI/miss-rate operating points in order of descending score threshold
/// (FPPI non-decreasing, miss rate non-increasing), plus the scalar
/// log-average miss rate under the default sampling.
struct EvalCurve {
    std::vector<CurvePoint> points;
    double log_avg_mr = 1.0;
};

/// Log-spaced FPPI reference grid for miss-rate averaging.
struct FppiSampling {
    double low = 1e-2;
    double high = 1.0;
    int samples = 9;
};

/// Miss-rate floor applied before taking logarithms.
inline constexpr double kMissRateFloor = 1e-10;

namespace detail {

enum class DetOutcome { kMatched, kIgnored, kFalsePositive };

struct DetEvent {
    std::size_t det_index;
    double score;
    DetOutcome outcome;
    std::size_t ann_index;  // valid when outcome == kMatched
};

/// Greedy per-image matching over all detections, in order of descending
/// score (ties by input index). Each detection takes the unmatched
/// non-ignore annotation of highest IoU >= threshold (ties by annotation
/// index); failing that it is discarded if it lies on an ignore region
/// (ioa >= threshold), otherwise it is a false positive.
///
/// Because a detection's fate depends only on higher-scored detections, the
/// events are valid for every score cutoff at once: at threshold t, exactly
/// the events with score >= t apply.
inline std::vector<DetEvent> match_events(const std::vector<ScoredBox>& dets,
                                          const std::vector<Annotation>& annotations,
                                          double iou_threshold) {
    std::vector<std::size_t> order(dets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });

    std::vector<bool> ann_matched(annotations.size(), false);
    std::vector<DetEvent> events;
    events.reserve(dets.size());
    for (std::size_t di : order) {
        const BoundingBox& det = dets[di].box;
        double best_iou = 0.0;
        std::size_t best_ann = annotations.size();
        for (std::size_t ai = 0; ai < annotations.size(); ++ai) {
            if (annotations[ai].ignore || ann_matched[ai]) continue;
            const double v = iou(det, annotations[ai].box);
            if (v >= iou_threshold && (best_ann == annotations.size() || v > best_iou)) {
                best_iou = v;
                best_ann = ai;
            }
        }
        if (best_ann != annotations.size()) {
            ann_matched[best_ann] = true;
            events.push_back({di, dets[di].score, DetOutcome::kMatched, best_ann});
            continue;
        }
        bool on_ignore = false;
        for (const Annotation& ann : annotations) {
            if (ann.ignore && ioa(det, ann.box) >= iou_threshold) {
                on_ignore = true;
                break;
            }
        }
        events.push_back({di, dets[di].score,
                          on_ignore ? DetOutcome::kIgnored : DetOutcome::kFalsePositive, 0});
    }
    return events;
}

inline void check_iou_threshold(double t) {
    if (!(t > 0.0) || !(t <= 1.0))
        throw std::invalid_argument("iou_threshold must be in (0,1]");
}

}  // namespace detail

/// Matches one image's detections against its annotations at a single IoU
/// threshold. TP + FN always equals the number of non-ignore annotations;
/// detections discarded by ignore regions count as neither.
inline MatchResult match_image(const std::vector<ScoredBox>& dets,
                               const std::vector<Annotation>& annotations,
                               double iou_threshold = 0.5) {
    detail::check_iou_threshold(iou_threshold);
    const auto events = detail::match_events(dets, annotations, iou_threshold);
    MatchResult r;
    for (const auto& e : events) {
        if (e.outcome == detail::DetOutcome::kMatched)
            r.matches.emplace_back(e.det_index, e.ann_index);
        else if (e.outcome == detail::DetOutcome::kFalsePositive)
            ++r.false_positives;
    }
    std::sort(r.matches.begin(), r.matches.end());
    r.true_positives = r.matches.size();
    std::size_t non_ignore = 0;
    for (const auto& ann : annotations)
        if (!ann.ignore) ++non_ignore;
    r.false_negatives = non_ignore - r.true_positives;
    return r;
}

/// Reference FPPI values: `samples` points equidistant in log10 over
/// [low, high]. A single sample degenerates to the upper bound.
inline std::vector<double> fppi_references(const FppiSampling& s) {
    if (!(s.low > 0.0) || !(s.high >= s.low))
        throw std::invalid_argument("fppi_references: need 0 < low <= high");
    if (s.samples < 1) throw std::invalid_argument("fppi_references: need at least one sample");
    if (s.samples == 1) return {s.high};
    std::vector<double> refs(s.samples);
    const double lo = std::log10(s.low);
    const double step = (std::log10(s.high) - lo) / (s.samples - 1);
    for (int k = 0; k < s.samples; ++k) refs[k] = std::pow(10.0, lo + k * step);
    return refs;
}

/// Miss rate sampled at each reference FPPI: the miss rate of the curve
/// point with the largest FPPI <= reference, or 1.0 if the curve never
/// gets that low. Returns (reference, miss rate) pairs.
inline std::vector<std::pair<double, double>> mr_samples(const EvalCurve& curve,
                                                         const FppiSampling& sampling = {}) {
    if (curve.points.empty()) throw DataError("mr_samples: curve has no points");
    const auto refs = fppi_references(sampling);
    std::vector<std::pair<double, double>> out;
    out.reserve(refs.size());
    for (double ref : refs) {
        double mr = 1.0;
        // Points are ordered by ascending FPPI; take the last one <= ref.
        for (const auto& p : curve.points) {
            if (p.fppi <= ref)
                mr = p.miss_rate;
            else
                break;
        }
        out.emplace_back(ref, mr);
    }
    return out;
}

/// Log-average miss rate: the geometric mean of the sampled miss rates,
/// each floored at kMissRateFloor to keep the log finite. The result is
/// clamped back into [kMissRateFloor, 1] so rounding in the exp/log round
/// trip cannot push it past the mathematical bounds.
inline double log_average_mr(const EvalCurve& curve, const FppiSampling& sampling = {}) {
    const auto samples = mr_samples(curve, sampling);
    double log_sum = 0.0;
    double lowest = 1.0;
    double highest = kMissRateFloor;
    for (const auto& [ref, mr] : samples) {
        const double floored = std::max(mr, kMissRateFloor);
        log_sum += std::log(floored);
        lowest = std::min(lowest, floored);
        highest = std::max(highest, floored);
    }
    // A geometric mean lies between its smallest and largest input; clamping
    // there absorbs exp/log rounding so an all-floor curve lands exactly on
    // kMissRateFloor and an all-miss curve on exactly 1.
    return std::clamp(std::exp(log_sum / samples.size()), lowest, highest);
}

/// Sweeps score thresholds over all distinct detection scores (descending)
/// and records (FPPI, miss rate) at each. FPPI divides by the full image
/// count of the manifest, including images without annotations; the miss
/// rate divides by the number of non-ignore annotations. The manifest is
/// expected to be subset-filtered already.
inline EvalCurve sweep_curve(const DetectionSet& dets, const DatasetManifest& manifest,
                             double iou_threshold = 0.5, const FppiSampling& sampling = {},
                             unsigned jobs = 1) {
    detail::check_iou_threshold(iou_threshold);
    const std::size_t image_count = manifest.image_records.size();
    if (image_count == 0) throw DataError("sweep_curve: manifest has no images");

    std::set<std::string> known_ids;
    for (const auto& rec : manifest.image_records) known_ids.insert(rec.image_id);
    std::string unknown;
    for (const auto& [id, boxes] : dets.by_image) {
        (void)boxes;
        if (!known_ids.count(id)) unknown += (unknown.empty() ? "" : ", ") + id;
    }
    if (!unknown.empty())
        throw DataError("detections reference unknown image ids: " + unknown);

    const std::size_t total_annotations = count_annotations(manifest);
    if (total_annotations == 0) throw DataError("no evaluable ground truth");

    EvalCurve curve;
    std::size_t total_dets = 0;
    for (const auto& [id, boxes] : dets.by_image) {
        (void)id;
        total_dets += boxes.size();
    }
    if (total_dets == 0) {
        // No threshold admits any detection: one all-miss operating point.
        curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
        curve.log_avg_mr = log_average_mr(curve, sampling);
        return curve;
    }

    // Per-image matching fans out over images; only the two score lists
    // per image are kept and reduced in manifest order.
    static const std::vector<ScoredBox> kNoDets;
    struct ImageScores {
        std::vector<double> tp;
        std::vector<double> fp;
    };
    std::vector<ImageScores> per_image(image_count);
    parallel_for(image_count, jobs, [&](std::size_t i) {
        const auto& rec = manifest.image_records[i];
        auto it = dets.by_image.find(rec.image_id);
        const auto& boxes = it == dets.by_image.end() ? kNoDets : it->second;
        for (const auto& e : detail::match_events(boxes, rec.annotations, iou_threshold)) {
            if (e.outcome == detail::DetOutcome::kMatched)
                per_image[i].tp.push_back(e.score);
            else if (e.outcome == detail::DetOutcome::kFalsePositive)
                per_image[i].fp.push_back(e.score);
        }
    });

    std::vector<double> thresholds;
    thresholds.reserve(total_dets);
    for (const auto& [id, boxes] : dets.by_image) {
        (void)id;
        for (const auto& sb : boxes) thresholds.push_back(sb.score);
    }
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<double> tp_scores;
    std::vector<double> fp_scores;
    for (const auto& scores : per_image) {
        tp_scores.insert(tp_scores.end(), scores.tp.begin(), scores.tp.end());
        fp_scores.insert(fp_scores.end(), scores.fp.begin(), scores.fp.end());
    }
    std::sort(tp_scores.begin(), tp_scores.end(), std::greater<>());
    std::sort(fp_scores.begin(), fp_scores.end(), std::greater<>());

    std::size_t tp = 0;
    std::size_t fp = 0;
    for (double t : thresholds) {
        while (tp < tp_scores.size() && tp_scores[tp] >= t) ++tp;
        while (fp < fp_scores.size() && fp_scores[fp] >= t) ++fp;
        const double fppi = static_cast<double>(fp) / static_cast<double>(image_count);
        const double miss_rate = static_cast<double>(total_annotations - tp) /
                                 static_cast<double>(total_annotations);
        // Lower envelope: successive thresholds with the same FPPI collapse
        // to the lowest miss rate reached there.
        if (!curve.points.empty() && curve.points.back().fppi == fppi)
            curve.points.back() = {t, fppi, miss_rate};
        else
            curve.points.push_back({t, fppi, miss_rate});
    }
    curve.log_avg_mr = log_average_mr(curve, sampling);
    return curve;
}

/// One evaluated (train model, test set) pair.
struct MatrixRun {
    std::string train_model;
    std::string test_set;
    EvalCurve curve;
};

/// A matrix cell given directly as a miss-rate percentage.
struct MatrixCellValue {
    std::string train_model;
    std::string test_set;
    double mr_percent;
};

/// Cross-dataset generalization matrix: MR percentages per (train, test)
/// pair plus per-train-column arithmetic averages. Lower average = better
/// generalization; best_train names the winning column.
struct GeneralizationMatrix {
    std::vector<std::string> train_models;
    std::vector<std::string> test_sets;
    std::map<std::pair<std::string, std::string>, double> cells;
    std::map<std::string, double> column_averages;
    std::string best_train;

    double cell(const std::string& train, const std::string& test) const {
        auto it = cells.find({train, test});
        if (it == cells.end())
            throw DataError("missing matrix cell (train=" + train + ", test=" + test + ")");
        return it->second;
    }
};

/// Assembles the generalization matrix from per-cell MR percentages. Every
/// (train, test) pair must appear exactly once. Row/column order follows
/// the given orders when non-empty, else lexicographic order of the names
/// seen, making the result independent of input permutation.
inline GeneralizationMatrix build_matrix(const std::vector<MatrixCellValue>& values,
                                         std::vector<std::string> train_order = {},
                                         std::vector<std::string> test_order = {}) {
    GeneralizationMatrix m;
    std::set<std::string> trains_seen;
    std::set<std::string> tests_seen;
    for (const auto& v : values) {
        if (!std::isfinite(v.mr_percent) || v.mr_percent < 0.0 || v.mr_percent > 100.0)
            throw DataError("matrix cell (train=" + v.train_model + ", test=" + v.test_set +
                            ") has MR outside [0,100]");
        if (!m.cells.emplace(std::make_pair(v.train_model, v.test_set), v.mr_percent).second)
            throw DataError("duplicate matrix cell (train=" + v.train_model +
                            ", test=" + v.test_set + ")");
        trains_seen.insert(v.train_model);
        tests_seen.insert(v.test_set);
    }
    if (values.empty()) throw DataError("build_matrix: no cells given");

    auto resolve_order = [](std::vector<std::string> order, const std::set<std::string>& seen,
                            const char* what) {
        if (order.empty()) return std::vector<std::string>(seen.begin(), seen.end());
        std::set<std::string> declared(order.begin(), order.end());
        if (declared.size() != order.size())
            throw DataError(std::string("duplicate name in declared ") + what + " order");
        for (const auto& name : seen)
            if (!declared.count(name))
                throw DataError(std::string(what) + " '" + name + "' missing from declared order");
        for (const auto& name : order)
            if (!seen.count(name))
                throw DataError(std::string(what) + " '" + name + "' declared but has no cells");
        return order;
    };
    m.train_models = resolve_order(std::move(train_order), trains_seen, "train model");
    m.test_sets = resolve_order(std::move(test_order), tests_seen, "test set");

    for (const auto& train : m.train_models) {
        double sum = 0.0;
        for (const auto& test : m.test_sets) sum += m.cell(train, test);
        m.column_averages[train] = sum / static_cast<double>(m.test_sets.size());
    }
    m.best_train = m.train_models.front();
    for (const auto& train : m.train_models)
        if (m.column_averages[train] < m.column_averages[m.best_train]) m.best_train = train;
    return m;
}

/// Curve-based overload: each cell becomes 100 times the curve's
/// log-average miss rate.
inline GeneralizationMatrix build_matrix(const std::vector<MatrixRun>& runs,
                                         std::vector<std::string> train_order = {},
                                         std::vector<std::string> test_order = {}) {
    std::vector<MatrixCellValue> values;
    values.reserve(runs.size());
    for (const auto& r : runs)
        values.push_back({r.train_model, r.test_set, 100.0 * r.curve.log_avg_mr});
    return build_matrix(values, std::move(train_order), std::move(test_order));
}

}  // namespace msbench
