#include "lnet/synthgen.hpp"

#include "lnet/parallel.hpp"
#include "lnet/pngio.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lnet {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(SegmentKind kind)
{
    switch (kind) {
    case SegmentKind::dense: return "dense";
    case SegmentKind::dotted: return "dotted";
    default: return "complex";
    }
}

SegmentKind segment_kind_from_string(const std::string& name)
{
    if (name == "dense") {
        return SegmentKind::dense;
    }
    if (name == "dotted") {
        return SegmentKind::dotted;
    }
    if (name == "complex") {
        return SegmentKind::complex;
    }
    throw std::invalid_argument("unknown segment kind '" + name + "'");
}

std::vector<const ManifestEntry*> DatasetManifest::split(const std::string& tag) const
{
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries) {
        if (tag.empty() || tag == "all" || e.split == tag) {
            out.push_back(&e);
        }
    }
    return out;
}

void render_segment(GrayImage& image, const Segment& segment)
{
    const Index h = image.rows();
    const Index w = image.cols();
    const Point dir = segment.b - segment.a;
    for (const auto& [t0, t1] : segment.pieces) {
        const Point p = segment.a + t0 * dir;
        const Point q = segment.a + t1 * dir;
        const Point d = q - p;
        const double len2 = d.squaredNorm();
        const Index x_lo = std::max<Index>(0, static_cast<Index>(std::floor(std::min(p.x(), q.x()))) - 1);
        const Index x_hi = std::min<Index>(w - 1, static_cast<Index>(std::ceil(std::max(p.x(), q.x()))) + 1);
        const Index y_lo = std::max<Index>(0, static_cast<Index>(std::floor(std::min(p.y(), q.y()))) - 1);
        const Index y_hi = std::min<Index>(h - 1, static_cast<Index>(std::ceil(std::max(p.y(), q.y()))) + 1);
        for (Index y = y_lo; y <= y_hi; ++y) {
            for (Index x = x_lo; x <= x_hi; ++x) {
                const Point c(static_cast<double>(x), static_cast<double>(y));
                const double t = len2 > 0.0 ? std::clamp((c - p).dot(d) / len2, 0.0, 1.0) : 0.0;
                const double dist = (c - (p + t * d)).norm();
                // Coverage of a unit-width stroke: linear falloff to zero at one pixel.
                const double coverage = std::clamp(1.0 - dist, 0.0, 1.0);
                image(y, x) = std::max(image(y, x), coverage);
            }
        }
    }
}

namespace {

bool intervals_overlap(const std::pair<double, double>& a, const std::pair<double, double>& b)
{
    return a.first <= b.second && b.first <= a.second;
}

Segment draw_segment(Rng& rng, const SynthConfig& cfg, const std::vector<BoundaryLine>& taken,
                     BoundaryLine& line_out)
{
    const double hi = static_cast<double>(cfg.n - 1);
    const double min_len = cfg.min_length_fraction * static_cast<double>(cfg.n);
    Segment seg;
    int attempts = 0;
    for (;; ++attempts) {
        if (attempts >= cfg.max_attempts) {
            throw std::runtime_error("generate_sample: could not place a segment within "
                                     + std::to_string(cfg.max_attempts) + " attempts");
        }
        seg.a = Point(rng.uniform(0.0, hi), rng.uniform(0.0, hi));
        seg.b = Point(rng.uniform(0.0, hi), rng.uniform(0.0, hi));
        if (seg.length() < min_len) {
            continue;
        }
        auto line = BoundaryLine::through(seg.a, seg.b, cfg.n);
        if (!line) {
            continue;
        }
        bool separated = true;
        for (const auto& other : taken) {
            if (line_distance(*line, other) <= cfg.min_line_separation) {
                separated = false;
                break;
            }
        }
        if (separated) {
            line_out = *line;
            break;
        }
    }

    seg.kind = cfg.forced_kind ? *cfg.forced_kind : static_cast<SegmentKind>(rng.uniform_int(0, 2));
    switch (seg.kind) {
    case SegmentKind::dense:
        seg.pieces = {{0.0, 1.0}};
        break;
    case SegmentKind::dotted: {
        seg.period_fraction = rng.uniform(cfg.period_lo, cfg.period_hi);
        seg.duty = rng.uniform(cfg.duty_lo, cfg.duty_hi);
        for (double start = 0.0; start < 1.0; start += seg.period_fraction) {
            seg.pieces.emplace_back(start, std::min(1.0, start + seg.duty * seg.period_fraction));
        }
        break;
    }
    case SegmentKind::complex: {
        const int m = static_cast<int>(rng.uniform_int(cfg.complex_min, cfg.complex_max));
        for (int tries = 0;; ++tries) {
            if (tries >= cfg.max_attempts) {
                throw std::runtime_error("generate_sample: complex segment resampling exceeded "
                                         + std::to_string(cfg.max_attempts) + " attempts");
            }
            seg.pieces.clear();
            for (int i = 0; i < m; ++i) {
                double t0 = rng.uniform01();
                double t1 = rng.uniform01();
                if (t0 > t1) {
                    std::swap(t0, t1);
                }
                seg.pieces.emplace_back(t0, t1);
            }
            bool disjoint_pair = false;
            for (int i = 0; i < m && !disjoint_pair; ++i) {
                for (int j = i + 1; j < m; ++j) {
                    if (!intervals_overlap(seg.pieces[i], seg.pieces[j])) {
                        disjoint_pair = true;
                        break;
                    }
                }
            }
            if (disjoint_pair) {
                break;
            }
        }
        break;
    }
    }
    return seg;
}

json line_to_json(const BoundaryLine& l)
{
    return json::array({l.p0.x(), l.p0.y(), l.p1.x(), l.p1.y()});
}

BoundaryLine line_from_json(const json& j, Index n)
{
    if (!j.is_array() || j.size() != 4) {
        throw std::runtime_error("ground-truth line must be [x0, y0, x1, y1]");
    }
    BoundaryLine l{Point(j[0].get<double>(), j[1].get<double>()), Point(j[2].get<double>(), j[3].get<double>()), n};
    l.validate();
    return l;
}

json entry_to_json(const ManifestEntry& e)
{
    json lines = json::array();
    for (const auto& l : e.lines) {
        lines.push_back(line_to_json(l));
    }
    return json{{"id", e.id},
                {"split", e.split},
                {"image", e.image},
                {"gt", e.gt},
                {"lines", lines},
                {"noise_amplitude", e.noise_amplitude},
                {"blur_sigma", e.blur_sigma},
                {"sample_seed", e.sample_seed}};
}

ManifestEntry entry_from_json(const json& j, Index n)
{
    ManifestEntry e;
    e.id = j.at("id").get<std::string>();
    e.split = j.at("split").get<std::string>();
    e.image = j.at("image").get<std::string>();
    e.gt = j.at("gt").get<std::string>();
    for (const auto& l : j.at("lines")) {
        e.lines.push_back(line_from_json(l, n));
    }
    e.noise_amplitude = j.at("noise_amplitude").get<double>();
    e.blur_sigma = j.at("blur_sigma").get<double>();
    e.sample_seed = j.at("sample_seed").get<std::uint64_t>();
    return e;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

json read_json(const fs::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open " + path.string());
    }
    try {
        return json::parse(is);
    }
    catch (const json::exception& ex) {
        throw std::runtime_error("malformed JSON in " + path.string() + ": " + ex.what());
    }
}

std::string sample_id(std::size_t index)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05zu", index);
    return buf;
}

} // namespace

Sample generate_sample(Rng& rng, const SynthConfig& cfg)
{
    Sample s;
    s.image = GrayImage::Zero(cfg.n, cfg.n);
    const int k = cfg.forced_segment_count ? *cfg.forced_segment_count
                                           : static_cast<int>(rng.uniform_int(cfg.min_segments, cfg.max_segments));
    for (int i = 0; i < k; ++i) {
        BoundaryLine line;
        s.segments.push_back(draw_segment(rng, cfg, s.gt_lines, line));
        s.gt_lines.push_back(line);
    }
    for (const auto& seg : s.segments) {
        render_segment(s.image, seg);
    }
    s.noise_amplitude = cfg.forced_noise ? *cfg.forced_noise : rng.uniform(0.0, cfg.noise_max);
    s.blur_sigma = cfg.forced_blur ? *cfg.forced_blur : rng.uniform(0.0, cfg.blur_max);
    if (s.noise_amplitude > 0.0) {
        for (Index y = 0; y < cfg.n; ++y) {
            for (Index x = 0; x < cfg.n; ++x) {
                s.image(y, x) += rng.uniform(0.0, s.noise_amplitude);
            }
        }
    }
    s.image = gaussian_blur(s.image, s.blur_sigma, BlurMode::normalized_replicate);
    s.image = s.image.cwiseMax(0.0).cwiseMin(1.0);
    return s;
}

Sample generate_sample(std::uint64_t seed, const SynthConfig& config)
{
    Rng rng(seed);
    Sample s = generate_sample(rng, config);
    s.seed = seed;
    return s;
}

DatasetManifest generate_dataset(const DatasetOptions& options, const fs::path& out_dir)
{
    if (options.train_count > options.count) {
        throw std::invalid_argument("generate_dataset: train_count exceeds count");
    }
    std::error_code ec;
    fs::create_directories(out_dir / "images", ec);
    fs::create_directories(out_dir / "gt", ec);
    if (ec) {
        throw std::runtime_error("cannot create dataset directory " + out_dir.string() + ": " + ec.message());
    }

    DatasetManifest manifest;
    manifest.root = out_dir;
    manifest.master_seed = options.master_seed;
    manifest.n = options.config.n;
    manifest.entries.resize(options.count);

    parallel_for(options.count, options.threads, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(options.master_seed, i);
        Sample s = generate_sample(seed, options.config);
        ManifestEntry& e = manifest.entries[i];
        e.id = sample_id(i);
        e.split = i < options.train_count ? "train" : "test";
        e.image = "images/" + e.id + ".png";
        e.gt = "gt/" + e.id + ".json";
        e.lines = s.gt_lines;
        e.noise_amplitude = s.noise_amplitude;
        e.blur_sigma = s.blur_sigma;
        e.sample_seed = seed;
        write_gray_png(out_dir / e.image, s.image);
        write_text(out_dir / e.gt, entry_to_json(e).dump(2) + "\n");
    });
    save_manifest(manifest);
    return manifest;
}

void save_manifest(const DatasetManifest& manifest)
{
    json samples = json::array();
    for (const auto& e : manifest.entries) {
        samples.push_back(entry_to_json(e));
    }
    const json j{{"schema_version", kManifestSchemaVersion},
                 {"generator_version", manifest.generator_version},
                 {"master_seed", manifest.master_seed},
                 {"n", manifest.n},
                 {"samples", samples}};
    write_text(manifest.root / "manifest.json", j.dump(2) + "\n");
}

DatasetManifest load_manifest(const fs::path& manifest_path)
{
    const json j = read_json(manifest_path);
    DatasetManifest m;
    try {
        if (j.at("schema_version").get<int>() != kManifestSchemaVersion) {
            throw std::runtime_error("unsupported manifest schema_version");
        }
        m.root = manifest_path.parent_path();
        m.generator_version = j.at("generator_version").get<std::string>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.n = j.at("n").get<Index>();
        for (const auto& e : j.at("samples")) {
            m.entries.push_back(entry_from_json(e, m.n));
        }
    }
    catch (const std::exception& ex) {
        throw std::runtime_error("invalid manifest " + manifest_path.string() + ": " + ex.what());
    }
    return m;
}

Sample load_sample(const DatasetManifest& manifest, const ManifestEntry& entry)
{
    const fs::path gt_path = manifest.root / entry.gt;
    const json gt = read_json(gt_path);
    ManifestEntry rec;
    try {
        rec = entry_from_json(gt, manifest.n);
    }
    catch (const std::exception& ex) {
        throw std::runtime_error("invalid ground truth " + gt_path.string() + ": " + ex.what());
    }
    Sample s;
    s.id = rec.id;
    s.image = read_gray_png(manifest.root / entry.image);
    if (s.image.rows() != manifest.n || s.image.cols() != manifest.n) {
        throw std::runtime_error("image " + (manifest.root / entry.image).string() + " is "
                                 + std::to_string(s.image.rows()) + "x" + std::to_string(s.image.cols())
                                 + ", ground truth expects " + std::to_string(manifest.n));
    }
    s.gt_lines = rec.lines;
    s.noise_amplitude = rec.noise_amplitude;
    s.blur_sigma = rec.blur_sigma;
    s.seed = rec.sample_seed;
    return s;
}

} // namespace lnet
