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

// End-to-end acceptance gate. Each criterion prints one pass/fail line;
// the process exits 0 only when every criterion holds.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "msbench/msbench.hpp"
#include "msbench/pnm.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

long ms_since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

struct CliResult {
    int code = -1;
    std::string out;
};

fs::path sandbox_for(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / "msbench_acceptance" / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const fs::path& sandbox) {
    const fs::path out_file = sandbox / "stdout.txt";
    const std::string cmd = std::string(MSBENCH_BIN) + " " + args + " > " + out_file.string() +
                            " 2> " + (sandbox / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (fs::exists(out_file)) r.out = msbench::read_text_file(out_file.string());
    return r;
}

/// Appends the first failure and reports it; later calls are no-ops so the
/// detail string stays readable.
bool expect(bool ok, const std::string& what, std::string& detail) {
    if (!ok && detail.empty()) detail = what;
    return ok;
}

msbench::Annotation plain_ann(double x, double y, double w, double h) {
    return msbench::Annotation{msbench::BoundingBox(x, y, w, h), 0.0, false, std::nullopt,
                               "person"};
}

// ------------------------------------------------------------ criterion 1

bool matrix_column_averages(std::string& detail) {
    const fs::path dir = sandbox_for("matrix");
    msbench::write_text_file((dir / "grid.cfg").string(),
                             "trains = kaist tokyo osu\n"
                             "tests = kaist tokyo osu\n"
                             "cell = kaist kaist 22.42\n"
                             "cell = tokyo kaist 71.04\n"
                             "cell = osu kaist 91.35\n"
                             "cell = kaist tokyo 34.97\n"
                             "cell = tokyo tokyo 11.54\n"
                             "cell = osu tokyo 78.93\n"
                             "cell = kaist osu 31.83\n"
                             "cell = tokyo osu 36.76\n"
                             "cell = osu osu 26.17\n");
    const auto start = Clock::now();
    const CliResult r = run_cli("--config " + (dir / "grid.cfg").string() + " --output " +
                                    (dir / "out").string() + " matrix",
                                dir);
    const long elapsed = ms_since(start);
    if (!expect(r.code == 0, "matrix command failed", detail)) return false;
    if (!expect(elapsed < 1000, "matrix took " + std::to_string(elapsed) + " ms", detail))
        return false;
    if (!expect(r.out == "best train model: kaist\n", "unexpected stdout: " + r.out, detail))
        return false;

    const std::string csv = msbench::read_text_file((dir / "out" / "matrix.csv").string());
    if (!expect(csv.find("# best: kaist") != std::string::npos, "best column not flagged",
                detail))
        return false;
    std::istringstream lines(csv);
    std::string line, average_line;
    while (std::getline(lines, line))
        if (line.rfind("average,", 0) == 0) average_line = line;
    if (!expect(!average_line.empty(), "no average row in matrix.csv", detail)) return false;

    std::vector<double> averages;
    std::istringstream cells(average_line.substr(8));
    std::string cell;
    while (std::getline(cells, cell, ',')) averages.push_back(std::stod(cell));
    const double expected[3] = {29.74, 39.78, 65.48};
    if (!expect(averages.size() == 3, "average row has wrong arity", detail)) return false;
    for (int i = 0; i < 3; ++i)
        if (!expect(std::abs(averages[i] - expected[i]) <= 0.005,
                    "column average " + std::to_string(averages[i]) + " != " +
                        std::to_string(expected[i]),
                    detail))
            return false;
    return true;
}

// ------------------------------------------------------------ criterion 2

bool oracle_equivalence(std::string& detail) {
    const auto start = Clock::now();
    std::mt19937 rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        msbench::DatasetManifest m = oracle::random_manifest(rng, 100, 10);
        if (msbench::count_annotations(m) == 0)
            m.image_records[0].annotations.push_back(plain_ann(0, 0, 20, 40));
        const msbench::DetectionSet dets = oracle::random_detections(rng, m, 10);

        for (const auto& rec : m.image_records) {
            const auto it = dets.by_image.find(rec.image_id);
            const std::vector<msbench::ScoredBox> empty;
            const auto& boxes = it == dets.by_image.end() ? empty : it->second;
            const auto mine = msbench::match_image(boxes, rec.annotations);
            const auto ref = oracle::ref_match(boxes, rec.annotations, 0.5);
            if (!expect(mine.true_positives == ref.tp && mine.false_positives == ref.fp &&
                            mine.false_negatives == ref.fn && mine.matches == ref.pairs,
                        "match_image disagrees with the oracle on trial " +
                            std::to_string(trial),
                        detail))
                return false;
        }

        const msbench::EvalCurve mine = msbench::sweep_curve(dets, m);
        const msbench::EvalCurve ref = oracle::ref_curve(dets, m, 0.5);
        bool same = mine.points.size() == ref.points.size();
        for (std::size_t i = 0; same && i < mine.points.size(); ++i)
            same = mine.points[i].threshold == ref.points[i].threshold &&
                   mine.points[i].fppi == ref.points[i].fppi &&
                   mine.points[i].miss_rate == ref.points[i].miss_rate;
        if (!expect(same, "sweep_curve disagrees with the oracle on trial " +
                              std::to_string(trial),
                    detail))
            return false;
        if (!expect(std::abs(mine.log_avg_mr - ref.log_avg_mr) <= 1e-12,
                    "log-average differs on trial " + std::to_string(trial), detail))
            return false;
    }
    const long elapsed = ms_since(start);
    return expect(elapsed < 60000, "took " + std::to_string(elapsed) + " ms", detail);
}

// ------------------------------------------------------------ criterion 3

bool metric_boundaries(std::string& detail) {
    msbench::DatasetManifest m;
    for (int i = 0; i < 3; ++i) {
        msbench::ImageRecord rec;
        rec.image_id = "img" + std::to_string(i);
        rec.sequence_id = "seq";
        rec.frame_index = i;
        rec.spectra = {true, true};
        rec.width = 200;
        rec.height = 200;
        rec.annotations.push_back(plain_ann(10.0 * i, 20, 25, 60));
        m.image_records.push_back(std::move(rec));
    }
    msbench::DetectionSet perfect;
    for (const auto& rec : m.image_records)
        perfect.by_image[rec.image_id] = {{rec.annotations[0].box, 1.0}};
    const auto perfect_curve = msbench::sweep_curve(perfect, m);
    if (!expect(perfect_curve.log_avg_mr <= 1e-10, "perfect detector not at the floor", detail))
        return false;

    const auto empty_curve = msbench::sweep_curve(msbench::DetectionSet{}, m);
    if (!expect(empty_curve.log_avg_mr == 1.0, "empty detector must score exactly 1", detail))
        return false;

    std::mt19937 rng(102);
    std::uniform_real_distribution<double> bump(0.0, 0.3);
    std::uniform_int_distribution<int> n_points(1, 6);
    for (int trial = 0; trial < 100; ++trial) {
        msbench::EvalCurve better;
        double fppi = 0.0, mr = 1.0;
        const int points = n_points(rng);
        for (int i = 0; i < points; ++i) {
            fppi += bump(rng);
            mr = std::max(0.0, mr - bump(rng));
            better.points.push_back({1.0 - 0.1 * i, fppi, mr});
        }
        msbench::EvalCurve worse = better;
        for (auto& p : worse.points) p.miss_rate = std::min(1.0, p.miss_rate + bump(rng));
        for (std::size_t i = 1; i < worse.points.size(); ++i)
            worse.points[i].miss_rate =
                std::min(worse.points[i].miss_rate, worse.points[i - 1].miss_rate);
        if (!expect(msbench::log_average_mr(better) <= msbench::log_average_mr(worse),
                    "dominated curve scored better on trial " + std::to_string(trial), detail))
            return false;
    }

    for (int trial = 0; trial < 100; ++trial) {
        msbench::DatasetManifest rm = oracle::random_manifest(rng, 10, 6);
        if (msbench::count_annotations(rm) == 0)
            rm.image_records[0].annotations.push_back(plain_ann(0, 0, 20, 40));
        const msbench::DetectionSet dets = oracle::random_detections(rng, rm, 6);
        msbench::DetectionSet rescaled;
        for (const auto& [id, boxes] : dets.by_image) {
            auto& out = rescaled.by_image[id];
            for (const auto& d : boxes) out.emplace_back(d.box, 0.5 + d.score / 4.0);
        }
        const auto a = msbench::sweep_curve(dets, rm);
        const auto b = msbench::sweep_curve(rescaled, rm);
        bool same = a.points.size() == b.points.size() && a.log_avg_mr == b.log_avg_mr;
        for (std::size_t i = 0; same && i < a.points.size(); ++i)
            same = a.points[i].fppi == b.points[i].fppi &&
                   a.points[i].miss_rate == b.points[i].miss_rate;
        if (!expect(same, "score rescaling changed the curve on trial " + std::to_string(trial),
                    detail))
            return false;
    }
    return true;
}

// ------------------------------------------------------------ criterion 4

bool subset_rules(std::string& detail) {
    const double heights[3] = {49.0, 50.0, 51.0};
    const double occlusions[3] = {0.34, 0.35, 0.36};
    msbench::ImageRecord rec;
    rec.image_id = "grid";
    rec.sequence_id = "seq";
    rec.spectra = {true, true};
    rec.width = 400;
    rec.height = 400;
    for (double h : heights)
        for (double occ : occlusions)
            rec.annotations.push_back(
                msbench::Annotation{msbench::BoundingBox(0, 0, 20, h), occ, false, std::nullopt,
                                    "person"});
    msbench::DatasetManifest m;
    m.image_records.push_back(rec);

    const auto reasonable = msbench::filter_subset(m, msbench::SubsetSpec::reasonable());
    const auto all = msbench::filter_subset(m, msbench::SubsetSpec::all());
    std::size_t idx = 0;
    for (double h : heights) {
        for (double occ : occlusions) {
            const bool keep_reasonable = h >= 50.0 && occ <= 0.35;
            const bool keep_all = h >= 20.0 && occ <= 0.35;
            if (!expect(reasonable.image_records[0].annotations[idx].ignore == !keep_reasonable,
                        "reasonable misclassified h=" + std::to_string(h) +
                            " occ=" + std::to_string(occ),
                        detail))
                return false;
            if (!expect(all.image_records[0].annotations[idx].ignore == !keep_all,
                        "all misclassified h=" + std::to_string(h) + " occ=" +
                            std::to_string(occ),
                        detail))
                return false;
            ++idx;
        }
    }

    std::mt19937 rng(103);
    for (int trial = 0; trial < 50; ++trial) {
        const msbench::DatasetManifest rm = oracle::random_manifest(rng, 10, 8);
        for (const auto spec :
             {msbench::SubsetSpec::reasonable(), msbench::SubsetSpec::all()}) {
            const auto once = msbench::filter_subset(rm, spec);
            const auto twice = msbench::filter_subset(once, spec);
            if (!expect(msbench::canonical_gt_text(once) == msbench::canonical_gt_text(twice),
                        "filter not idempotent on trial " + std::to_string(trial), detail))
                return false;
            if (!expect(once.image_records.size() == rm.image_records.size(),
                        "filter changed the image count", detail))
                return false;
            std::size_t before = 0, after = 0;
            for (const auto& r : rm.image_records) before += r.annotations.size();
            for (const auto& r : once.image_records) after += r.annotations.size();
            if (!expect(before == after, "filter changed the region count", detail))
                return false;
            if (!expect(msbench::count_annotations(once) + msbench::count_ignores(once) == after,
                        "kept plus ignored must cover every region", detail))
                return false;
        }
    }
    return true;
}

// ------------------------------------------------------------ criterion 5

bool seg_boxes_oracle(std::string& detail) {
    const auto start = Clock::now();
    std::mt19937 rng(104);
    std::uniform_real_distribution<double> density(0.05, 0.45);
    for (int trial = 0; trial < 500; ++trial) {
        msbench::SegmentationMask mask{64, 64, {}};
        mask.person_pixels.resize(64 * 64);
        std::bernoulli_distribution person(density(rng));
        for (auto& p : mask.person_pixels) p = person(rng) ? 1 : 0;

        const auto boxes = msbench::seg_to_boxes(mask);
        const auto refs = oracle::ref_components(mask);
        if (!expect(boxes.size() == refs.size(),
                    "component count differs on trial " + std::to_string(trial), detail))
            return false;
        for (std::size_t i = 0; i < refs.size(); ++i) {
            const double w = refs[i].max_x - refs[i].min_x + 1;
            const double h = refs[i].max_y - refs[i].min_y + 1;
            const msbench::BoundingBox expected(refs[i].min_x, refs[i].min_y, w, h);
            if (!expect(boxes[i].box == expected,
                        "component box differs on trial " + std::to_string(trial), detail))
                return false;
            const bool ignore = w / h < 0.2 || w / h > 0.6;
            if (!expect(boxes[i].ignore == ignore,
                        "ratio flag differs on trial " + std::to_string(trial), detail))
                return false;
        }
    }

    // aspect ratios exactly at the limits stay evaluable; just beyond flips
    auto column_mask = [](int w, int h) {
        msbench::SegmentationMask mask{32, 32, {}};
        mask.person_pixels.resize(32 * 32, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                mask.person_pixels[static_cast<std::size_t>(y + 1) * 32 + (x + 1)] = 1;
        return mask;
    };
    if (!expect(!msbench::seg_to_boxes(column_mask(1, 5))[0].ignore, "ratio 0.2 must be kept",
                detail))
        return false;
    if (!expect(!msbench::seg_to_boxes(column_mask(3, 5))[0].ignore, "ratio 0.6 must be kept",
                detail))
        return false;
    if (!expect(msbench::seg_to_boxes(column_mask(1, 6))[0].ignore,
                "ratio below 0.2 must be ignored", detail))
        return false;
    if (!expect(msbench::seg_to_boxes(column_mask(2, 3))[0].ignore,
                "ratio above 0.6 must be ignored", detail))
        return false;

    const long elapsed = ms_since(start);
    return expect(elapsed < 10000, "took " + std::to_string(elapsed) + " ms", detail);
}

// ------------------------------------------------------------ criterion 6

bool nms_oracle(std::string& detail) {
    std::mt19937 rng(105);
    std::uniform_int_distribution<int> n(0, 20);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<msbench::ScoredBox> boxes;
        const int count = n(rng);
        boxes.reserve(count);
        for (int i = 0; i < count; ++i)
            boxes.emplace_back(oracle::random_int_box(rng, 100, 40),
                               oracle::random_grid_score(rng));
        const auto mine = msbench::nms(boxes, 0.7);
        const auto ref = oracle::ref_nms(boxes, 0.7);
        bool same = mine.size() == ref.size();
        for (std::size_t i = 0; same && i < mine.size(); ++i)
            same = mine[i].box == ref[i].box && mine[i].score == ref[i].score;
        if (!expect(same, "nms disagrees with the oracle on trial " + std::to_string(trial),
                    detail))
            return false;
    }
    return true;
}

// ------------------------------------------------------------ criterion 7

bool histogram_matching(std::string& detail) {
    std::mt19937 rng(106);
    std::uniform_int_distribution<int> value(0, 255);
    for (int trial = 0; trial < 50; ++trial) {
        msbench::GrayImage img(32, 24);
        for (auto& p : img.data) p = static_cast<std::uint8_t>(value(rng));
        msbench::GrayImage ref_img(40, 20);
        for (auto& p : ref_img.data) p = static_cast<std::uint8_t>(value(rng));
        const auto src = msbench::compute_histogram(img);
        const auto ref = msbench::compute_histogram(ref_img);
        const auto matched = msbench::histogram_match(img, ref);

        if (!expect(msbench::compute_histogram(matched).total() ==
                        static_cast<double>(img.pixel_count()),
                    "pixel count not conserved on trial " + std::to_string(trial), detail))
            return false;

        const auto out_cdf = msbench::compute_histogram(matched).cdf();
        const auto ref_cdf = ref.cdf();
        double max_mass = 0.0;
        for (double b : src.bins) max_mass = std::max(max_mass, b);
        max_mass /= src.total();
        double max_dev = 0.0;
        for (int v = 0; v < 256; ++v)
            max_dev = std::max(max_dev, std::abs(out_cdf[v] - ref_cdf[v]));
        if (!expect(max_dev <= max_mass + 1.0 / 256.0,
                    "CDF deviation " + std::to_string(max_dev) + " over the bound on trial " +
                        std::to_string(trial),
                    detail))
            return false;

        // strictly increasing source CDF: self-matching is the identity
        msbench::GrayImage full(16, 16);
        for (int i = 0; i < 256; ++i) full.data[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(i);
        std::shuffle(full.data.begin(), full.data.end(), rng);
        const auto self = msbench::histogram_match(full, msbench::compute_histogram(full));
        if (!expect(self == full, "self-match changed a pixel on trial " + std::to_string(trial),
                    detail))
            return false;
    }
    return true;
}

// ------------------------------------------------------------ criterion 8

bool round_trips(std::string& detail) {
    std::mt19937 rng(107);
    for (int trial = 0; trial < 20; ++trial) {
        const msbench::DatasetManifest m = oracle::random_manifest(rng, 8, 5);
        const std::string gt = msbench::canonical_gt_text(m);
        const std::string images = msbench::canonical_images_text(m);
        const msbench::DatasetManifest back = msbench::parse_canonical_text(gt, images);
        if (!expect(msbench::canonical_gt_text(back) == gt &&
                        msbench::canonical_images_text(back) == images,
                    "ground truth round trip differs on trial " + std::to_string(trial), detail))
            return false;

        const msbench::DetectionSet dets = oracle::random_detections(rng, m, 5);
        const std::string det_text = msbench::detections_text(dets);
        if (!expect(msbench::detections_text(msbench::parse_detections_text(det_text)) ==
                        det_text,
                    "detection round trip differs on trial " + std::to_string(trial), detail))
            return false;

        msbench::IntensityHistogram h;
        std::uniform_real_distribution<double> weight(0.0, 9.0);
        for (auto& b : h.bins) b = weight(rng);
        const std::string hist_text = msbench::histogram_text(h);
        const msbench::IntensityHistogram hb = msbench::parse_histogram_text(hist_text);
        if (!expect(hb == h && msbench::histogram_text(hb) == hist_text,
                    "histogram round trip differs on trial " + std::to_string(trial), detail))
            return false;
    }

    // worker count must never change any emitted byte
    const fs::path dir = sandbox_for("jobs");
    msbench::DatasetManifest m = oracle::random_manifest(rng, 12, 5);
    m.image_records[0].annotations.push_back(plain_ann(10, 10, 25, 60));
    msbench::DetectionSet dets = oracle::random_detections(rng, m, 5);
    dets.by_image[m.image_records[0].image_id].emplace_back(
        msbench::BoundingBox(10, 10, 25, 60), 0.875);
    msbench::write_canonical(m, (dir / "random.gt").string());
    msbench::write_detections(dets, (dir / "random.det").string());
    const std::string eval_tail = " evaluate --subset all --gt " + (dir / "random.gt").string() +
                                  " --det " + (dir / "random.det").string();
    if (!expect(run_cli("--jobs 1 --output " + (dir / "a").string() + eval_tail, dir).code == 0,
                "serial evaluate failed", detail))
        return false;
    if (!expect(run_cli("--jobs 4 --output " + (dir / "b").string() + eval_tail, dir).code == 0,
                "parallel evaluate failed", detail))
        return false;
    for (const char* name : {"curve.csv", "summary.json"})
        if (!expect(msbench::read_text_file((dir / "a" / name).string()) ==
                        msbench::read_text_file((dir / "b" / name).string()),
                    std::string(name) + " differs across job counts", detail))
            return false;

    const fs::path imgs = dir / "imgs";
    fs::create_directories(imgs);
    std::uniform_int_distribution<int> value(0, 255);
    for (int i = 0; i < 3; ++i) {
        msbench::GrayImage img(20, 15);
        for (auto& p : img.data) p = static_cast<std::uint8_t>(value(rng));
        msbench::write_pgm((imgs / ("im" + std::to_string(i) + ".pgm")).string(), img);
    }
    const std::string hm_tail = " histmatch --input " + imgs.string() + " --reference-dir " +
                                imgs.string();
    if (!expect(run_cli("--jobs 1 --output " + (dir / "h1").string() + hm_tail, dir).code == 0,
                "serial histmatch failed", detail))
        return false;
    if (!expect(run_cli("--jobs 3 --output " + (dir / "h2").string() + hm_tail, dir).code == 0,
                "parallel histmatch failed", detail))
        return false;
    for (const char* name : {"im0.pgm", "im1.pgm", "im2.pgm", "reference.hist"})
        if (!expect(msbench::read_text_file((dir / "h1" / name).string()) ==
                        msbench::read_text_file((dir / "h2" / name).string()),
                    std::string(name) + " differs across job counts", detail))
            return false;
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*fn)(std::string&);
    };
    const Criterion criteria[] = {
        {"matrix column averages match the reference grid", matrix_column_averages},
        {"matcher and curve equal the brute-force oracle on 1000 instances", oracle_equivalence},
        {"metric boundary values, dominance, and rescaling invariance", metric_boundaries},
        {"subset boundary grid, idempotence, and conservation", subset_rules},
        {"segmentation boxes equal the flood-fill oracle on 500 masks", seg_boxes_oracle},
        {"nms equals the selection oracle on 500 box sets", nms_oracle},
        {"histogram matching bound, identity, and conservation", histogram_matching},
        {"byte-exact round trips and job-count independence", round_trips},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        std::string detail;
        const auto start = Clock::now();
        const bool ok = c.fn(detail);
        const long elapsed = ms_since(start);
        std::cout << (ok ? "PASS" : "FAIL") << "  " << c.name << " (" << elapsed << " ms)\n";
        if (!ok) {
            std::cout << "      " << (detail.empty() ? "unspecified failure" : detail) << "\n";
            ++failed;
        }
    }
    const int total = static_cast<int>(std::size(criteria));
    std::cout << (total - failed) << "/" << total << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
