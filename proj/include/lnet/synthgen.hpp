#ifndef LNET_SYNTHGEN_HPP
#define LNET_SYNTHGEN_HPP

#include "lnet/fht.hpp"
#include "lnet/geometry.hpp"
#include "lnet/random.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lnet {

inline constexpr const char* kGeneratorVersion = "lnet-synth-1";
inline constexpr int kManifestSchemaVersion = 1;

enum class SegmentKind { dense, dotted, complex };

std::string to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(const std::string& name);

/// A painted segment: the parent a-b plus the painted parameter intervals
/// [t0, t1] along it (fractions of the parent length).
struct Segment {
    Point a = Point::Zero();
    Point b = Point::Zero();
    SegmentKind kind = SegmentKind::dense;
    double period_fraction = 0.0; // dotted only
    double duty = 0.0;            // dotted only
    std::vector<std::pair<double, double>> pieces;

    double length() const { return (b - a).norm(); }
};

struct SynthConfig {
    Index n = 256;
    int min_segments = 1;
    int max_segments = 5;
    double min_length_fraction = 0.25;
    double period_lo = 0.07;
    double period_hi = 0.25;
    double duty_lo = 0.6;
    double duty_hi = 0.9;
    int complex_min = 2;
    int complex_max = 5;
    double noise_max = 0.25;
    double blur_max = 1.5;
    double min_line_separation = 3.0;
    int max_attempts = 1000;

    // Test hooks pinning otherwise random choices.
    std::optional<int> forced_segment_count;
    std::optional<SegmentKind> forced_kind;
    std::optional<double> forced_noise;
    std::optional<double> forced_blur;
};

struct Sample {
    std::string id;
    GrayImage image;
    std::vector<BoundaryLine> gt_lines;
    std::vector<Segment> segments;
    double noise_amplitude = 0.0;
    double blur_sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Paints one segment's pieces with a 1-pixel anti-aliased stroke (max-combined).
void render_segment(GrayImage& image, const Segment& segment);

/// Draws one sample: segments, noise, blur, clamp. Throws std::runtime_error
/// when a resampling loop exceeds config.max_attempts.
Sample generate_sample(Rng& rng, const SynthConfig& config);
Sample generate_sample(std::uint64_t seed, const SynthConfig& config);

struct ManifestEntry {
    std::string id;
    std::string split; // "train" or "test"
    std::string image;  // relative to the manifest root
    std::string gt;     // relative to the manifest root
    std::vector<BoundaryLine> lines;
    double noise_amplitude = 0.0;
    double blur_sigma = 0.0;
    std::uint64_t sample_seed = 0;
};

struct DatasetManifest {
    std::filesystem::path root;
    std::string generator_version = kGeneratorVersion;
    std::uint64_t master_seed = 0;
    Index n = 256;
    std::vector<ManifestEntry> entries;

    std::vector<const ManifestEntry*> split(const std::string& tag) const;
};

struct DatasetOptions {
    std::uint64_t master_seed = 2021;
    std::size_t count = 1000;
    std::size_t train_count = 800;
    unsigned threads = 1;
    SynthConfig config;
};

/// Generates, writes (images/, gt/, manifest.json) and returns the manifest.
DatasetManifest generate_dataset(const DatasetOptions& options, const std::filesystem::path& out_dir);

void save_manifest(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& manifest_path);

/// Reads the image and the ground-truth record of one entry.
Sample load_sample(const DatasetManifest& manifest, const ManifestEntry& entry);

} // namespace lnet

#endif // LNET_SYNTHGEN_HPP
