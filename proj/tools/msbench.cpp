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

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msbench/msbench.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct GlobalOpts {
    std::string config;
    std::string output = ".";
    unsigned jobs = 1;
};

int usage_error(const std::string& msg) {
    std::cerr << "msbench: " << msg << "\n";
    return 1;
}

fs::path ensure_output_dir(const std::string& dir) {
    const fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    return p;
}

std::string resolve_path(const std::string& dir, const std::string& p) {
    const fs::path q(p);
    if (q.is_absolute() || dir.empty()) return p;
    return (fs::path(dir) / q).string();
}

/// Strips trailing slashes before taking the stem, so directory inputs
/// get a usable base name.
std::string base_name_of(std::string p) {
    while (p.size() > 1 && p.back() == '/') p.pop_back();
    const std::string s = fs::path(p).stem().string();
    return s.empty() ? std::string("out") : s;
}

// ---------------------------------------------------------------- config

/// One `key = value` line; dir locates the file it came from so relative
/// paths in values can be resolved against it.
struct ConfigEntry {
    std::string key;
    std::string value;
    std::string dir;
};

void load_config_into(const std::string& path, std::vector<ConfigEntry>& out, int depth) {
    if (depth > 8) throw msbench::DataError(path + ": config include depth exceeded");
    const std::string text = msbench::read_text_file(path);
    const std::string dir = fs::path(path).parent_path().string();
    auto trim = [](const std::string& s) {
        const auto a = s.find_first_not_of(" \t");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t");
        return s.substr(a, b - a + 1);
    };
    for (const auto& [number, raw] : msbench::detail::data_lines(text)) {
        const auto eq = raw.find('=');
        if (eq == std::string::npos)
            throw msbench::ParseError(path, number, "expected key = value");
        const std::string key = trim(raw.substr(0, eq));
        const std::string value = trim(raw.substr(eq + 1));
        if (key.empty()) throw msbench::ParseError(path, number, "empty key");
        if (key == "include") {
            load_config_into(resolve_path(dir, value), out, depth + 1);
            continue;
        }
        out.push_back({key, value, dir});
    }
}

std::vector<ConfigEntry> load_config(const std::string& path) {
    std::vector<ConfigEntry> out;
    load_config_into(path, out, 0);
    return out;
}

void reject_unknown_keys(const std::vector<ConfigEntry>& entries,
                         const std::set<std::string>& known, const std::string& path) {
    for (const auto& e : entries)
        if (!known.count(e.key))
            throw msbench::DataError(path + ": unknown config key '" + e.key + "'");
}

std::optional<ConfigEntry> last_entry(const std::vector<ConfigEntry>& entries,
                                      const std::string& key) {
    std::optional<ConfigEntry> out;
    for (const auto& e : entries)
        if (e.key == key) out = e;
    return out;
}

// ------------------------------------------------------------- validators

bool parse_full_real(const std::string& s, double& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool try_parse_fppi_range(const std::string& s, double& lo, double& hi) {
    const auto c = s.find(':');
    if (c == std::string::npos) return false;
    if (!parse_full_real(s.substr(0, c), lo)) return false;
    if (!parse_full_real(s.substr(c + 1), hi)) return false;
    return lo > 0.0 && hi >= lo;
}

const CLI::Validator IouValidator(
    [](std::string& s) -> std::string {
        double v{};
        if (!parse_full_real(s, v) || !(v > 0.0) || !(v <= 1.0))
            return "must be a real in (0,1]";
        return {};
    },
    "FLOAT in (0,1]");

const CLI::Validator FppiRangeValidator(
    [](std::string& s) -> std::string {
        double lo{}, hi{};
        if (!try_parse_fppi_range(s, lo, hi)) return "expected lo:hi with 0 < lo <= hi";
        return {};
    },
    "LO:HI");

msbench::FppiSampling make_sampling(const std::string& range, int samples) {
    msbench::FppiSampling s;
    if (!try_parse_fppi_range(range, s.low, s.high))
        throw msbench::DataError("bad fppi range '" + range +
                                 "' (expected lo:hi with 0 < lo <= hi)");
    s.samples = samples;
    return s;
}

msbench::SubsetSpec resolve_subset(const std::string& subset, double min_height,
                                   double max_occlusion) {
    if (subset == "reasonable") return msbench::SubsetSpec::reasonable();
    if (subset == "all") return msbench::SubsetSpec::all();
    if (subset == "custom") return {min_height, max_occlusion};
    throw msbench::DataError("unknown subset '" + subset +
                             "' (expected reasonable, all, or custom)");
}

std::vector<std::string> list_pgms(const std::string& dir) {
    if (!fs::is_directory(dir)) throw msbench::DataError(dir + ": not a directory");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw msbench::DataError(dir + ": no .pgm images found");
    return files;
}

// -------------------------------------------------------------- evaluate

struct EvalOpts {
    std::string gt;
    std::string det;
    std::string images;
    std::string subset = "reasonable";
    double min_height = 0.0;
    double max_occlusion = 1.0;
    double iou = 0.5;
    std::string fppi_range = "0.01:1";
    int fppi_samples = 9;
};

void apply_eval_config(const GlobalOpts& g, const CLI::App* sub, EvalOpts& o) {
    if (g.config.empty()) return;
    const auto entries = load_config(g.config);
    reject_unknown_keys(entries,
                        {"gt", "det", "images", "subset", "min_height", "max_occlusion", "iou",
                         "fppi_range", "fppi_samples"},
                        g.config);
    auto real_value = [&](const ConfigEntry& e, const char* field) {
        return msbench::detail::parse_real(e.value, g.config, 0, field);
    };
    if (!sub->count("--gt"))
        if (auto e = last_entry(entries, "gt")) o.gt = resolve_path(e->dir, e->value);
    if (!sub->count("--det"))
        if (auto e = last_entry(entries, "det")) o.det = resolve_path(e->dir, e->value);
    if (!sub->count("--images"))
        if (auto e = last_entry(entries, "images")) o.images = resolve_path(e->dir, e->value);
    if (!sub->count("--subset"))
        if (auto e = last_entry(entries, "subset")) o.subset = e->value;
    if (!sub->count("--min-height"))
        if (auto e = last_entry(entries, "min_height"))
            o.min_height = real_value(*e, "min_height");
    if (!sub->count("--max-occlusion"))
        if (auto e = last_entry(entries, "max_occlusion"))
            o.max_occlusion = real_value(*e, "max_occlusion");
    if (!sub->count("--iou"))
        if (auto e = last_entry(entries, "iou")) o.iou = real_value(*e, "iou");
    if (!sub->count("--fppi-range"))
        if (auto e = last_entry(entries, "fppi_range")) o.fppi_range = e->value;
    if (!sub->count("--fppi-samples"))
        if (auto e = last_entry(entries, "fppi_samples"))
            o.fppi_samples = static_cast<int>(
                msbench::detail::parse_int(e->value, g.config, 0, "fppi_samples"));
}

int run_evaluate(const GlobalOpts& g, EvalOpts o, const CLI::App* sub) {
    apply_eval_config(g, sub, o);
    const bool custom_flags = sub->count("--min-height") || sub->count("--max-occlusion");
    if (custom_flags) {
        if (sub->count("--subset") && o.subset != "custom")
            return usage_error("--min-height and --max-occlusion require --subset custom");
        o.subset = "custom";
    }
    if (o.gt.empty()) return usage_error("evaluate: missing --gt (or config key gt)");
    if (o.det.empty()) return usage_error("evaluate: missing --det (or config key det)");

    const msbench::DatasetManifest manifest = msbench::parse_canonical(o.gt, o.images);
    const msbench::SubsetSpec spec = resolve_subset(o.subset, o.min_height, o.max_occlusion);
    const msbench::DatasetManifest filtered = msbench::filter_subset(manifest, spec);
    const msbench::DetectionSet dets = msbench::parse_detections(o.det);
    const msbench::FppiSampling sampling = make_sampling(o.fppi_range, o.fppi_samples);
    const msbench::EvalCurve curve =
        msbench::sweep_curve(dets, filtered, o.iou, sampling, g.jobs);

    const fs::path out = ensure_output_dir(g.output);
    msbench::write_curve_csv(curve, (out / "curve.csv").string());

    ordered_json summary;
    summary["log_avg_mr"] = curve.log_avg_mr;
    ordered_json samples = ordered_json::array();
    for (const auto& [ref, mr] : msbench::mr_samples(curve, sampling))
        samples.push_back(ordered_json{{"fppi", ref}, {"miss_rate", mr}});
    summary["samples"] = samples;
    summary["subset"] = ordered_json{{"name", o.subset},
                                     {"min_height", spec.min_height},
                                     {"max_occlusion", spec.max_occlusion}};
    summary["iou_threshold"] = o.iou;
    summary["fppi_range"] =
        ordered_json{{"low", sampling.low}, {"high", sampling.high}, {"samples", sampling.samples}};
    summary["dataset"] = manifest.name;
    summary["detections"] = dets.dataset_name;
    summary["images"] = manifest.image_records.size();
    summary["annotations"] = msbench::count_annotations(filtered);
    summary["ignore_regions"] = msbench::count_ignores(filtered);
    msbench::write_text_file((out / "summary.json").string(), summary.dump(2) + "\n");

    std::cout << "log-average miss rate: " << msbench::format_real(curve.log_avg_mr) << "\n";
    return 0;
}

// ---------------------------------------------------------------- matrix

msbench::MatrixCellValue parse_cell(const ConfigEntry& e, unsigned jobs) {
    const auto f = msbench::detail::split_fields(e.value);
    if (f.size() < 3)
        throw msbench::DataError("config cell '" + e.value +
                                 "': expected 'train test <mr>' or 'train test gt=... det=...'");
    msbench::MatrixCellValue v{f[0], f[1], 0.0};
    const std::string where = "cell " + f[0] + "/" + f[1];
    if (f.size() == 3 && f[2].find('=') == std::string::npos) {
        v.mr_percent = msbench::detail::parse_real(f[2], where, 0, "mr");
        return v;
    }
    std::string gt, det, images, subset = "reasonable";
    double min_height = 0.0, max_occlusion = 1.0, iou = 0.5;
    for (std::size_t i = 2; i < f.size(); ++i) {
        const auto eq = f[i].find('=');
        if (eq == std::string::npos)
            throw msbench::DataError(where + ": expected key=value, got '" + f[i] + "'");
        const std::string key = f[i].substr(0, eq);
        const std::string val = f[i].substr(eq + 1);
        if (key == "gt")
            gt = resolve_path(e.dir, val);
        else if (key == "det")
            det = resolve_path(e.dir, val);
        else if (key == "images")
            images = resolve_path(e.dir, val);
        else if (key == "subset")
            subset = val;
        else if (key == "min_height")
            min_height = msbench::detail::parse_real(val, where, 0, "min_height");
        else if (key == "max_occlusion")
            max_occlusion = msbench::detail::parse_real(val, where, 0, "max_occlusion");
        else if (key == "iou")
            iou = msbench::detail::parse_real(val, where, 0, "iou");
        else
            throw msbench::DataError(where + ": unknown key '" + key + "'");
    }
    if (gt.empty() || det.empty())
        throw msbench::DataError(where + ": needs both gt= and det=");
    const msbench::DatasetManifest manifest = msbench::parse_canonical(gt, images);
    const msbench::DatasetManifest filtered =
        msbench::filter_subset(manifest, resolve_subset(subset, min_height, max_occlusion));
    const msbench::DetectionSet dets = msbench::parse_detections(det);
    const msbench::EvalCurve curve = msbench::sweep_curve(dets, filtered, iou, {}, jobs);
    v.mr_percent = 100.0 * curve.log_avg_mr;
    return v;
}

int run_matrix(const GlobalOpts& g) {
    if (g.config.empty()) return usage_error("matrix: missing --config with the run grid");
    const auto entries = load_config(g.config);
    reject_unknown_keys(entries, {"trains", "tests", "cell"}, g.config);
    std::vector<std::string> trains, tests;
    std::vector<msbench::MatrixCellValue> values;
    for (const auto& e : entries) {
        if (e.key == "trains")
            trains = msbench::detail::split_fields(e.value);
        else if (e.key == "tests")
            tests = msbench::detail::split_fields(e.value);
        else
            values.push_back(parse_cell(e, g.jobs));
    }
    if (values.empty()) throw msbench::DataError(g.config + ": no cell entries");
    const msbench::GeneralizationMatrix matrix = msbench::build_matrix(values, trains, tests);

    const fs::path out = ensure_output_dir(g.output);
    msbench::write_matrix_csv(matrix, (out / "matrix.csv").string());

    ordered_json j;
    j["train_models"] = matrix.train_models;
    j["test_sets"] = matrix.test_sets;
    ordered_json cells = ordered_json::object();
    for (const auto& train : matrix.train_models) {
        ordered_json col = ordered_json::object();
        for (const auto& test : matrix.test_sets) col[test] = matrix.cell(train, test);
        cells[train] = col;
    }
    j["cells"] = cells;
    ordered_json avgs = ordered_json::object();
    for (const auto& train : matrix.train_models) avgs[train] = matrix.column_averages.at(train);
    j["column_averages"] = avgs;
    j["best_train"] = matrix.best_train;
    msbench::write_text_file((out / "matrix.json").string(), j.dump(2) + "\n");

    std::cout << "best train model: " << matrix.best_train << "\n";
    return 0;
}

// --------------------------------------------------------------- convert

struct ConvertOpts {
    std::string kind;
    std::string input;
    std::string images;
    std::string name;
    int person_label = 255;
    double ratio_low = 0.2;
    double ratio_high = 0.6;
    std::string spectra = "VI";
    std::string sequence;
};

msbench::DatasetManifest convert_seg_masks(const ConvertOpts& o) {
    const auto files = list_pgms(o.input);
    msbench::DatasetManifest m;
    m.name = base_name_of(o.input);
    m.root = o.input;
    const std::string seq = o.sequence.empty() ? base_name_of(o.input) : o.sequence;
    const msbench::SpectraSet spectra = msbench::spectra_from_string(o.spectra, "--spectra", 0);
    long frame = 0;
    for (const auto& path : files) {
        const msbench::GrayImage img = msbench::read_pgm(path);
        msbench::SegmentationMask mask{img.width, img.height, {}};
        mask.person_pixels.resize(img.data.size());
        for (std::size_t i = 0; i < img.data.size(); ++i)
            mask.person_pixels[i] = img.data[i] == o.person_label ? 1 : 0;
        msbench::ImageRecord rec;
        rec.image_id = fs::path(path).stem().string();
        rec.sequence_id = seq;
        rec.frame_index = frame++;
        rec.spectra = spectra;
        rec.width = img.width;
        rec.height = img.height;
        rec.annotations = msbench::seg_to_boxes(mask, o.ratio_low, o.ratio_high);
        m.image_records.push_back(std::move(rec));
    }
    return m;
}

int run_convert(const GlobalOpts& g, const ConvertOpts& o) {
    if (!(o.ratio_low < o.ratio_high))
        return usage_error("--ratio-low must be below --ratio-high");
    msbench::DatasetManifest m;
    if (o.kind == "canonical")
        m = msbench::parse_canonical(o.input, o.images);
    else if (o.kind == "visible-box-pairs")
        m = msbench::parse_visible_pairs(o.input, o.images);
    else
        m = convert_seg_masks(o);
    const std::string base = o.name.empty() ? base_name_of(o.input) : o.name;
    const fs::path out = ensure_output_dir(g.output);
    msbench::write_canonical(m, (out / (base + ".gt")).string());
    std::cout << "images: " << m.image_records.size()
              << " annotations: " << msbench::count_annotations(m)
              << " ignore regions: " << msbench::count_ignores(m) << "\n";
    return 0;
}

// -------------------------------------------------------------- histmatch

struct HistmatchOpts {
    std::string input;
    std::string reference_dir;
    std::string reference_file;
    bool upscale = false;
    bool emit_rgb = false;
};

int run_histmatch(const GlobalOpts& g, const HistmatchOpts& o) {
    if (o.reference_dir.empty() == o.reference_file.empty())
        return usage_error("histmatch: exactly one of --reference-dir or --reference is required");
    const auto inputs = list_pgms(o.input);

    msbench::IntensityHistogram ref;
    if (!o.reference_file.empty()) {
        ref = msbench::parse_histogram(o.reference_file);
    } else {
        const auto samples = list_pgms(o.reference_dir);
        std::vector<msbench::IntensityHistogram> hists(samples.size());
        msbench::parallel_for(samples.size(), g.jobs, [&](std::size_t i) {
            hists[i] = msbench::compute_histogram(msbench::read_pgm(samples[i]));
        });
        ref = msbench::average_reference(hists);
    }

    const fs::path out = ensure_output_dir(g.output);
    msbench::write_histogram(ref, (out / "reference.hist").string());

    msbench::parallel_for(inputs.size(), g.jobs, [&](std::size_t i) {
        msbench::GrayImage img = msbench::read_pgm(inputs[i]);
        if (o.upscale) img = msbench::upscale2x(img);
        const msbench::GrayImage matched = msbench::histogram_match(img, ref);
        const std::string stem = fs::path(inputs[i]).stem().string();
        if (o.emit_rgb)
            msbench::write_ppm((out / (stem + ".ppm")).string(),
                               msbench::replicate_plane(matched));
        else
            msbench::write_pgm((out / (stem + ".pgm")).string(), matched);
    });
    std::cout << "matched " << inputs.size() << " images\n";
    return 0;
}

// ------------------------------------------------------------------ stats

struct StatsOpts {
    std::string gt;
    std::string images;
    int bin_width = 10;
};

int run_stats(const GlobalOpts& g, const StatsOpts& o) {
    const msbench::DatasetManifest manifest = msbench::parse_canonical(o.gt, o.images);
    const auto all = msbench::height_histogram(
        msbench::filter_subset(manifest, msbench::SubsetSpec::all()), o.bin_width);
    const auto reasonable = msbench::height_histogram(
        msbench::filter_subset(manifest, msbench::SubsetSpec::reasonable()), o.bin_width);
    std::string csv = "bin,count_all,count_reasonable\n";
    for (const auto& [bin, count] : all) {
        const auto it = reasonable.find(bin);
        const std::size_t reas = it == reasonable.end() ? 0 : it->second;
        csv += std::to_string(bin) + "," + std::to_string(count) + "," + std::to_string(reas) + "\n";
    }
    const fs::path out = ensure_output_dir(g.output);
    const std::string path = (out / (manifest.name + "_heights.csv")).string();
    msbench::write_text_file(path, csv);
    std::cout << "wrote " << path << "\n";
    return 0;
}

// ------------------------------------------------------------------- nms

struct NmsOpts {
    std::string det;
    double iou = 0.7;
    std::string name;
};

int run_nms(const GlobalOpts& g, const NmsOpts& o) {
    const msbench::DetectionSet dets = msbench::parse_detections(o.det);
    msbench::DetectionSet kept;
    kept.dataset_name = dets.dataset_name;
    std::size_t in_count = 0, out_count = 0;
    for (const auto& [id, boxes] : dets.by_image) {
        in_count += boxes.size();
        auto filtered = msbench::nms(boxes, o.iou);
        out_count += filtered.size();
        kept.by_image.emplace(id, std::move(filtered));
    }
    const std::string base = o.name.empty() ? dets.dataset_name + "_nms" : o.name;
    const fs::path out = ensure_output_dir(g.output);
    msbench::write_detections(kept, (out / (base + ".det")).string());
    std::cout << "kept " << out_count << " of " << in_count << " detections\n";
    return 0;
}

// ----------------------------------------------------------------- filter

struct FilterOpts {
    std::string gt;
    std::string images;
    std::string subset;
    double min_height = 0.0;
    double max_occlusion = 1.0;
    long skip = 1;
    double scale = 1.0;
    bool flip = false;
    std::string name;
};

msbench::DatasetManifest scale_manifest(msbench::DatasetManifest m, double factor) {
    m.scale_factor *= factor;
    for (auto& rec : m.image_records) {
        rec.width *= factor;
        rec.height *= factor;
        for (auto& ann : rec.annotations) {
            ann.box = msbench::scale_box(ann.box, factor);
            if (ann.visible_box) ann.visible_box = msbench::scale_box(*ann.visible_box, factor);
        }
    }
    return m;
}

int run_filter(const GlobalOpts& g, const FilterOpts& o, const CLI::App* sub) {
    msbench::DatasetManifest m = msbench::parse_canonical(o.gt, o.images);
    if (o.skip > 1) m = msbench::skip_sample(m, o.skip);
    std::string subset = o.subset;
    const bool custom_flags = sub->count("--min-height") || sub->count("--max-occlusion");
    if (custom_flags) {
        if (!subset.empty() && subset != "custom")
            return usage_error("--min-height and --max-occlusion require --subset custom");
        subset = "custom";
    }
    if (!subset.empty())
        m = msbench::filter_subset(m, resolve_subset(subset, o.min_height, o.max_occlusion));
    if (o.scale != 1.0) m = scale_manifest(std::move(m), o.scale);
    if (o.flip) m = msbench::flip_augment(m);
    const std::string base = o.name.empty() ? m.name + ".filtered" : o.name;
    const fs::path out = ensure_output_dir(g.output);
    msbench::write_canonical(m, (out / (base + ".gt")).string());
    std::cout << "images: " << m.image_records.size()
              << " annotations: " << msbench::count_annotations(m)
              << " ignore regions: " << msbench::count_ignores(m) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multispectral person detection benchmark toolkit"};
    app.fallthrough();
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config, "config file with key = value lines");
    app.add_option("--output", g.output, "output directory")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* ev = app.add_subcommand("evaluate", "score a detection file against ground truth");
    EvalOpts eo;
    ev->add_option("--gt", eo.gt, "canonical ground-truth file");
    ev->add_option("--images", eo.images,
                   "image sidecar file (default: ground-truth path with .images extension)");
    ev->add_option("--det", eo.det, "detection file");
    ev->add_option("--subset", eo.subset, "annotation subset")
        ->check(CLI::IsMember({"reasonable", "all", "custom"}))
        ->capture_default_str();
    ev->add_option("--min-height", eo.min_height, "custom subset: minimum box height")
        ->check(CLI::NonNegativeNumber);
    ev->add_option("--max-occlusion", eo.max_occlusion, "custom subset: maximum occlusion")
        ->check(CLI::Range(0.0, 1.0));
    ev->add_option("--iou", eo.iou, "IoU match threshold")
        ->check(IouValidator)
        ->capture_default_str();
    ev->add_option("--fppi-range", eo.fppi_range, "FPPI sampling range")
        ->check(FppiRangeValidator)
        ->capture_default_str();
    ev->add_option("--fppi-samples", eo.fppi_samples, "number of FPPI reference points")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* mx = app.add_subcommand("matrix", "cross-dataset generalization matrix from a config grid");

    auto* cv = app.add_subcommand("convert", "convert annotations to the canonical format");
    ConvertOpts co;
    cv->add_option("--kind", co.kind, "input kind")
        ->required()
        ->check(CLI::IsMember({"canonical", "seg-masks", "visible-box-pairs"}));
    cv->add_option("--input", co.input, "input file or mask directory")->required();
    cv->add_option("--images", co.images, "image sidecar file for text inputs");
    cv->add_option("--name", co.name, "output base name (default: input stem)");
    cv->add_option("--person-label", co.person_label, "mask value marking person pixels")
        ->check(CLI::Range(0, 255))
        ->capture_default_str();
    cv->add_option("--ratio-low", co.ratio_low, "ignore boxes with w/h below this")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cv->add_option("--ratio-high", co.ratio_high, "ignore boxes with w/h above this")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cv->add_option("--spectra", co.spectra, "spectra tag for mask-derived images")
        ->check(CLI::IsMember({"V", "I", "VI"}))
        ->capture_default_str();
    cv->add_option("--sequence", co.sequence,
                   "sequence id for mask-derived images (default: input directory name)");

    auto* hm = app.add_subcommand("histmatch", "match grayscale images to a reference histogram");
    HistmatchOpts ho;
    hm->add_option("--input", ho.input, "directory of .pgm images to match")->required();
    hm->add_option("--reference-dir", ho.reference_dir,
                   "directory of .pgm samples defining the reference histogram");
    hm->add_option("--reference", ho.reference_file, "reference histogram file");
    hm->add_flag("--upscale2x", ho.upscale, "bilinearly double the resolution before matching");
    hm->add_flag("--emit-rgb", ho.emit_rgb, "write three-plane .ppm copies of the matched images");

    auto* st = app.add_subcommand("stats", "height histogram of the all/reasonable subsets");
    StatsOpts so;
    st->add_option("--gt", so.gt, "canonical ground-truth file")->required();
    st->add_option("--images", so.images, "image sidecar file");
    st->add_option("--bin-width", so.bin_width, "histogram bin width in pixels")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* nm = app.add_subcommand("nms", "non-maximum suppression over a detection file");
    NmsOpts no;
    nm->add_option("--det", no.det, "detection file")->required();
    nm->add_option("--iou", no.iou, "suppression IoU threshold")
        ->check(IouValidator)
        ->capture_default_str();
    nm->add_option("--name", no.name, "output base name (default: input stem + _nms)");

    auto* fl = app.add_subcommand("filter", "rewrite ground truth with sampling and subset rules");
    FilterOpts fo;
    fl->add_option("--gt", fo.gt, "canonical ground-truth file")->required();
    fl->add_option("--images", fo.images, "image sidecar file");
    fl->add_option("--subset", fo.subset, "annotation subset")
        ->check(CLI::IsMember({"reasonable", "all", "custom"}));
    fl->add_option("--min-height", fo.min_height, "custom subset: minimum box height")
        ->check(CLI::NonNegativeNumber);
    fl->add_option("--max-occlusion", fo.max_occlusion, "custom subset: maximum occlusion")
        ->check(CLI::Range(0.0, 1.0));
    fl->add_option("--skip", fo.skip, "keep frames with frame_index divisible by this")
        ->check(CLI::PositiveNumber);
    fl->add_option("--scale", fo.scale, "scale boxes and image dimensions by this factor")
        ->check(CLI::PositiveNumber);
    fl->add_flag("--flip-augment", fo.flip, "append mirrored copies of all records");
    fl->add_option("--name", fo.name, "output base name (default: input stem + .filtered)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (ev->parsed()) return run_evaluate(g, eo, ev);
        if (mx->parsed()) return run_matrix(g);
        if (cv->parsed()) return run_convert(g, co);
        if (hm->parsed()) return run_histmatch(g, ho);
        if (st->parsed()) return run_stats(g, so);
        if (nm->parsed()) return run_nms(g, no);
        if (fl->parsed()) return run_filter(g, fo, fl);
    } catch (const msbench::DataError& e) {
        std::cerr << "msbench: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "msbench: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
