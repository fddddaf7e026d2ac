#include "lnet/cli.hpp"

#include "lnet/detect.hpp"
#include "lnet/eval.hpp"
#include "lnet/network.hpp"
#include "lnet/parallel.hpp"
#include "lnet/synthgen.hpp"
#include "lnet/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace lnet {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct CommonOptions {
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool json_out = false;
    std::string config;
};

std::string default_data_dir()
{
    const char* env = std::getenv("LNET_DATA_DIR");
    return env && *env ? env : "data";
}

fs::path manifest_path(const std::string& data)
{
    const fs::path p(data);
    return fs::is_directory(p) ? p / "manifest.json" : p;
}

void add_common(CLI::App* cmd, CommonOptions& c, std::uint64_t default_seed)
{
    c.seed = default_seed;
    cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores); results do not depend on it")
        ->capture_default_str();
    cmd->add_flag("--json", c.json_out, "Print a machine-readable summary on stdout");
    cmd->add_option("--config", c.config, "JSON file of option values; command-line flags win");
}

/// Fills options absent from the command line with values from the JSON config file.
void apply_config(CLI::App* cmd, const CommonOptions& c)
{
    if (c.config.empty()) {
        return;
    }
    std::ifstream is(c.config);
    if (!is) {
        throw std::runtime_error("cannot open config " + c.config);
    }
    json j;
    try {
        j = json::parse(is);
    }
    catch (const json::exception& ex) {
        throw std::runtime_error("malformed config " + c.config + ": " + ex.what());
    }
    for (const auto& [key, value] : j.items()) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        CLI::Option* opt = nullptr;
        try {
            opt = cmd->get_option("--" + flag);
        }
        catch (const CLI::OptionNotFound&) {
            throw std::runtime_error("config " + c.config + ": unknown option '" + key + "'");
        }
        if (opt->count() > 0) {
            continue;
        }
        opt->clear();
        if (value.is_boolean()) {
            opt->add_result(value.get<bool>() ? "true" : "false");
        }
        else if (value.is_string()) {
            opt->add_result(value.get<std::string>());
        }
        else {
            opt->add_result(value.dump());
        }
        opt->run_callback();
    }
}

void write_json_file(const fs::path& path, const json& j)
{
    std::ofstream os(path, std::ios::binary);
    os << j.dump(2) << '\n';
    if (!os) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

void write_run_manifest(const fs::path& dir, const std::string& command, const json& config,
                        const CommonOptions& c, const json& inputs, const json& outputs, double seconds)
{
    const json j{{"command", command},
                 {"config", config},
                 {"tool_version", kToolVersion},
                 {"master_seed", c.seed},
                 {"threads", c.threads},
                 {"inputs", inputs},
                 {"outputs", outputs},
                 {"timings", {{"wall_seconds", seconds}}}};
    write_json_file(dir / (command + "_run.json"), j);
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// --- gen -------------------------------------------------------------------

struct GenOptions {
    CommonOptions common;
    std::string out;
    std::size_t count = 1000;
    long train_count = -1;
};

int cmd_gen(const GenOptions& o, std::ostream& out)
{
    const auto t0 = Clock::now();
    DatasetOptions d;
    d.master_seed = o.common.seed;
    d.count = o.count;
    d.train_count = o.train_count >= 0 ? static_cast<std::size_t>(o.train_count) : o.count * 4 / 5;
    d.threads = o.common.threads;
    const DatasetManifest m = generate_dataset(d, o.out);
    const json config{{"count", d.count}, {"train_count", d.train_count}, {"n", d.config.n}};
    const json outputs{{"manifest", (fs::path(o.out) / "manifest.json").string()}};
    write_run_manifest(o.out, "gen", config, o.common, json::object(), outputs, seconds_since(t0));
    const std::size_t train = m.split("train").size();
    const std::size_t test = m.split("test").size();
    if (o.common.json_out) {
        out << json{{"manifest", outputs["manifest"]}, {"count", m.entries.size()}, {"train", train}, {"test", test}}
                   .dump()
            << '\n';
    }
    else {
        out << "generated " << m.entries.size() << " samples (" << train << " train, " << test << " test) in "
            << o.out << '\n';
    }
    return 0;
}

// --- eval helpers shared by train/detect/eval -------------------------------

std::vector<SampleResult> detect_split(const DatasetManifest& manifest, const std::string& split,
                                       const std::function<std::vector<Detection>(const GrayImage&)>& detector,
                                       unsigned threads)
{
    const auto entries = manifest.split(split);
    std::vector<SampleResult> results(entries.size());
    parallel_for(entries.size(), threads, [&](std::size_t i) {
        Sample s = load_sample(manifest, *entries[i]);
        results[i] = SampleResult{entries[i]->id, s.gt_lines, detector(s.image)};
    });
    return results;
}

// --- train -------------------------------------------------------------------

struct TrainOptions {
    CommonOptions common;
    TrainConfig cfg;
    std::string data;
    std::string out = "run";
    bool eval_test = false;
    double distance_threshold = 5.0;
    LNetDetectOptions detect;
};

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err)
{
    const auto t0 = Clock::now();
    TrainConfig cfg = o.cfg;
    cfg.seed = o.common.seed;
    cfg.threads = o.common.threads;
    cfg.manifest = manifest_path(o.data);
    cfg.validate();
    const DatasetManifest manifest = load_manifest(cfg.manifest);
    const auto data = load_split(manifest, "train", cfg.threads);
    if (data.empty()) {
        throw std::runtime_error("dataset " + cfg.manifest.string() + " has no train samples");
    }
    fs::create_directories(o.out);

    EpochHook hook;
    if (o.eval_test) {
        hook = [&](const LNetModel& model, int) -> std::optional<double> {
            auto results = detect_split(
                manifest, "test",
                [&](const GrayImage& img) { return lnet_detect(model, img, o.detect); },
                cfg.threads);
            return summarize(pr_curve(results, MatchConfig{o.distance_threshold})).ap;
        };
    }
    const auto logger = [&](const EpochMetrics& m) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "epoch %d/%d  lr %.3g  train loss %.6g", m.epoch + 1, cfg.epochs, m.lr,
                      m.train_loss);
        err << buf;
        if (m.test_ap) {
            std::snprintf(buf, sizeof(buf), "  test AP %.2f", *m.test_ap);
            err << buf;
        }
        err << '\n' << std::flush;
    };
    const TrainResult r = train(cfg, data, hook, logger);
    const fs::path ckpt = fs::path(o.out) / "model.ckpt";
    const fs::path csv = fs::path(o.out) / "metrics.csv";
    save_checkpoint(r.model, ckpt);
    write_metrics_csv(r.log, csv);

    const json config{{"variant", cfg.variant},         {"epochs", cfg.epochs},
                      {"batch_size", cfg.batch_size},   {"lr0", cfg.lr0},
                      {"lr_halving_period", cfg.lr_halving_period}, {"weight_decay", cfg.weight_decay},
                      {"target_sigma", cfg.target_sigma}, {"loss_weight_coeff", cfg.loss_weight_coeff},
                      {"init_noise_scale", cfg.init_noise_scale}};
    const json outputs{{"checkpoint", ckpt.string()}, {"metrics", csv.string()}};
    write_run_manifest(o.out, "train", config, o.common, json{{"manifest", cfg.manifest.string()}}, outputs,
                       seconds_since(t0));
    if (o.common.json_out) {
        out << json{{"checkpoint", ckpt.string()},
                    {"params", r.model.param_count()},
                    {"steps", r.steps},
                    {"final_train_loss", r.log.back().train_loss}}
                   .dump()
            << '\n';
    }
    else {
        out << "trained LNet-" << cfg.variant << " (" << r.model.param_count() << " parameters, " << r.steps
            << " steps), final train loss " << r.log.back().train_loss << "\ncheckpoint: " << ckpt.string() << '\n';
    }
    return 0;
}

// --- detect ------------------------------------------------------------------

struct DetectOptions {
    CommonOptions common;
    std::string data;
    std::string split = "test";
    std::string method = "baseline";
    std::string checkpoint;
    std::string out = "detections";
    // Unset values take the defaults of the chosen method.
    std::optional<int> window;
    std::optional<double> min_conf;
    bool no_normalize = false;
    std::optional<Index> min_pattern_pixels;
    std::optional<double> duplicate_radius;
    std::optional<std::size_t> max_detections;
};

int cmd_detect(const DetectOptions& o, std::ostream& out)
{
    const auto t0 = Clock::now();
    if (o.method != "baseline" && o.method != "lnet") {
        throw CLI::ValidationError("--method", "must be baseline or lnet");
    }
    BaselineOptions bopts;
    LNetDetectOptions lopts;
    bopts.window = o.window.value_or(bopts.window);
    bopts.min_conf = o.min_conf.value_or(bopts.min_conf);
    bopts.normalize_length = !o.no_normalize;
    bopts.min_pattern_pixels = o.min_pattern_pixels.value_or(bopts.min_pattern_pixels);
    bopts.duplicate_radius = o.duplicate_radius.value_or(bopts.duplicate_radius);
    bopts.max_detections = o.max_detections.value_or(bopts.max_detections);
    lopts.window = o.window.value_or(lopts.window);
    lopts.min_conf = o.min_conf.value_or(lopts.min_conf);
    lopts.duplicate_radius = o.duplicate_radius.value_or(lopts.duplicate_radius);
    lopts.max_detections = o.max_detections.value_or(lopts.max_detections);
    const int window = o.method == "lnet" ? lopts.window : bopts.window;
    if (window < 3 || window % 2 == 0) {
        throw CLI::ValidationError("--window", "must be odd and >= 3");
    }
    std::optional<LNetModel> model;
    if (o.method == "lnet") {
        if (o.checkpoint.empty()) {
            throw std::runtime_error("--method lnet requires --checkpoint");
        }
        if (!fs::exists(o.checkpoint)) {
            throw std::runtime_error("checkpoint not found: " + o.checkpoint);
        }
        model = load_checkpoint(o.checkpoint);
    }
    const fs::path mpath = manifest_path(o.data);
    const DatasetManifest manifest = load_manifest(mpath);
    auto detector = [&](const GrayImage& img) {
        return model ? lnet_detect(*model, img, lopts) : baseline_detect(img, bopts);
    };
    const auto results = detect_split(manifest, o.split, detector, o.common.threads);

    fs::create_directories(o.out);
    json files = json::array();
    std::size_t total = 0;
    for (const auto& r : results) {
        const std::string name = r.id + ".json";
        write_detections(r.dets, fs::path(o.out) / name);
        files.push_back(json{{"id", r.id}, {"file", name}, {"count", r.dets.size()}});
        total += r.dets.size();
    }
    json config{{"method", o.method}, {"split", o.split}, {"window", window}};
    if (model) {
        config["min_conf"] = lopts.min_conf;
        config["duplicate_radius"] = lopts.duplicate_radius;
        config["max_detections"] = lopts.max_detections;
        config["checkpoint"] = o.checkpoint;
    }
    else {
        config["min_conf"] = bopts.min_conf;
        config["duplicate_radius"] = bopts.duplicate_radius;
        config["max_detections"] = bopts.max_detections;
        config["normalize_length"] = bopts.normalize_length;
        config["min_pattern_pixels"] = bopts.min_pattern_pixels;
    }
    write_json_file(fs::path(o.out) / "detections.json",
                    json{{"schema_version", 1}, {"config", config}, {"n", manifest.n}, {"samples", files}});
    write_run_manifest(o.out, "detect", config, o.common, json{{"manifest", mpath.string()}},
                       json{{"detections", (fs::path(o.out) / "detections.json").string()}}, seconds_since(t0));
    if (o.common.json_out) {
        out << json{{"samples", results.size()}, {"detections", total}, {"out", o.out}}.dump() << '\n';
    }
    else {
        out << "wrote " << total << " detections for " << results.size() << " images to " << o.out << '\n';
    }
    return 0;
}

// --- eval --------------------------------------------------------------------

struct EvalOptions {
    CommonOptions common;
    std::string data;
    std::string detections = "detections";
    std::string out;
    std::string plot;
    double distance_threshold = 5.0;
};

int cmd_eval(const EvalOptions& o, std::ostream& out)
{
    const auto t0 = Clock::now();
    const fs::path mpath = manifest_path(o.data);
    const DatasetManifest manifest = load_manifest(mpath);
    const fs::path det_dir(o.detections);
    json det_manifest;
    {
        std::ifstream is(det_dir / "detections.json");
        if (!is) {
            throw std::runtime_error("missing detections manifest " + (det_dir / "detections.json").string());
        }
        det_manifest = json::parse(is);
    }
    const std::string split = det_manifest.at("config").at("split").get<std::string>();
    std::map<std::string, std::string> det_files;
    for (const auto& s : det_manifest.at("samples")) {
        det_files[s.at("id").get<std::string>()] = s.at("file").get<std::string>();
    }
    std::set<std::string> gt_ids;
    for (const auto* e : manifest.split(split)) {
        gt_ids.insert(e->id);
    }
    std::vector<std::string> missing;
    std::vector<std::string> extra;
    for (const auto& id : gt_ids) {
        if (!det_files.count(id)) {
            missing.push_back(id);
        }
    }
    for (const auto& [id, file] : det_files) {
        if (!gt_ids.count(id)) {
            extra.push_back(id);
        }
    }
    if (!missing.empty() || !extra.empty()) {
        std::string msg = "detections do not match the '" + split + "' split:";
        for (const auto& id : missing) {
            msg += " missing " + id;
        }
        for (const auto& id : extra) {
            msg += " unexpected " + id;
        }
        throw std::runtime_error(msg);
    }

    std::vector<SampleResult> results;
    for (const auto* e : manifest.split(split)) {
        results.push_back(SampleResult{e->id, e->lines, read_detections(det_dir / det_files[e->id], manifest.n)});
    }
    const MatchConfig cfg{o.distance_threshold};
    const PRCurve curve = pr_curve(results, cfg);
    const Summary s = summarize(curve);

    const fs::path out_dir = o.out.empty() ? det_dir : fs::path(o.out);
    fs::create_directories(out_dir);
    const int window = det_manifest.at("config").value("window", 0);
    const json metrics{{"AP", s.ap},
                       {"p_at_90r", s.p_at_90r},
                       {"r_at_90p", s.r_at_90p},
                       {"distance_threshold", o.distance_threshold},
                       {"nms_window", window},
                       {"n_samples", results.size()}};
    write_json_file(out_dir / "metrics.json", metrics);
    write_pr_csv(curve, out_dir / "pr_curve.csv");
    json outputs{{"metrics", (out_dir / "metrics.json").string()}, {"pr_curve", (out_dir / "pr_curve.csv").string()}};
    if (!o.plot.empty()) {
        write_pr_plot(curve, o.plot);
        outputs["plot"] = o.plot;
    }
    write_run_manifest(out_dir, "eval", json{{"distance_threshold", o.distance_threshold}, {"split", split}},
                       o.common, json{{"manifest", mpath.string()}, {"detections", o.detections}}, outputs,
                       seconds_since(t0));
    if (o.common.json_out) {
        out << metrics.dump() << '\n';
    }
    else {
        out << "AP " << s.ap << "  precision@90recall " << s.p_at_90r << "  recall@90precision " << s.r_at_90p
            << "  (" << results.size() << " samples, distance threshold " << o.distance_threshold << " px)\n";
    }
    return 0;
}

// --- bench -------------------------------------------------------------------

struct BenchOptions {
    CommonOptions common;
    std::vector<Index> sizes{256, 512, 1024};
    int repeats = 3;
};

int cmd_bench(const BenchOptions& o, std::ostream& out)
{
    json timings = json::array();
    std::map<Index, double> best;
    Rng rng(o.common.seed);
    for (Index n : o.sizes) {
        if (!is_power_of_two(n)) {
            throw CLI::ValidationError("--sizes", "sizes must be powers of two");
        }
        GrayImage img(n, n);
        for (Index i = 0; i < img.size(); ++i) {
            img.data()[i] = rng.uniform01();
        }
        double fastest = std::numeric_limits<double>::infinity();
        double checksum = 0.0;
        for (int r = 0; r < std::max(1, o.repeats); ++r) {
            const auto t0 = Clock::now();
            const auto map = fht_forward(img);
            fastest = std::min(fastest, seconds_since(t0));
            checksum += map.planes[0](n - 1, n - 1);
        }
        best[n] = fastest;
        timings.push_back(json{{"n", n}, {"seconds", fastest}, {"checksum", checksum}});
    }
    json analytic = json::object();
    for (Variant v : {Variant::fast, Variant::acc}) {
        const FlopReport rep = flop_count(build(v), 256);
        json rows = json::array();
        for (const auto& row : rep.rows) {
            rows.push_back(json{{"block", row.block}, {"layer", row.layer}, {"params", row.params}, {"mflop", row.mflop}});
        }
        analytic[to_string(v)] = json{{"rows", rows}, {"total_mflop", rep.total_mflop},
                                      {"executed_total_mflop", rep.executed_total_mflop}};
    }
    json report{{"fht_timings", timings}, {"analytic_mflop_256", analytic}};
    if (best.count(256) && best.count(1024)) {
        report["ratio_1024_over_256"] = best[1024] / best[256];
    }
    if (o.common.json_out) {
        out << report.dump() << '\n';
        return 0;
    }
    out << "FHT wall time (best of " << o.repeats << "):\n";
    for (const auto& t : timings) {
        out << "  N=" << t["n"].get<Index>() << "  " << t["seconds"].get<double>() * 1e3 << " ms\n";
    }
    if (report.contains("ratio_1024_over_256")) {
        out << "  ratio N=1024 / N=256: " << report["ratio_1024_over_256"].get<double>() << '\n';
    }
    out << "Analytic MFLOP for 256x256 input:\n";
    for (Variant v : {Variant::fast, Variant::acc}) {
        const FlopReport rep = flop_count(build(v), 256);
        out << "  LNet-" << to_string(v) << ":\n";
        for (const auto& row : rep.rows) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "    %-6s %-9s %5lld params %8.1f MFLOP\n", row.block.c_str(),
                          row.layer.c_str(), static_cast<long long>(row.params), row.mflop);
            out << buf;
        }
        char buf[96];
        std::snprintf(buf, sizeof(buf), "    total %.1f MFLOP (%.1f over full Hough planes)\n", rep.total_mflop,
                      rep.executed_total_mflop);
        out << buf;
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Line detection with a Hough layer: dataset generation, training, detection, evaluation"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    GenOptions gen;
    gen.out = default_data_dir();
    auto* gen_cmd = app.add_subcommand("gen", "Generate the synthetic line dataset");
    add_common(gen_cmd, gen.common, 2021);
    gen_cmd->add_option("--out", gen.out, "Output directory (default $LNET_DATA_DIR or ./data)")->capture_default_str();
    gen_cmd->add_option("--count", gen.count, "Number of samples")->capture_default_str();
    gen_cmd->add_option("--train-count", gen.train_count, "Train samples (default 80% of count)");

    TrainOptions tr;
    tr.data = default_data_dir();
    auto* train_cmd = app.add_subcommand("train", "Train LNet on the train split");
    add_common(train_cmd, tr.common, 0);
    train_cmd->add_option("--data", tr.data, "Dataset directory or manifest")->capture_default_str();
    train_cmd->add_option("--out", tr.out, "Output directory for checkpoint and metrics")->capture_default_str();
    train_cmd->add_option("--variant", tr.cfg.variant, "fast or acc")
        ->check(CLI::IsMember({"fast", "acc"}))
        ->capture_default_str();
    train_cmd->add_option("--epochs", tr.cfg.epochs)->capture_default_str();
    train_cmd->add_option("--batch-size", tr.cfg.batch_size)->capture_default_str();
    train_cmd->add_option("--lr", tr.cfg.lr0)->capture_default_str();
    train_cmd->add_option("--lr-halving-period", tr.cfg.lr_halving_period)->capture_default_str();
    train_cmd->add_option("--weight-decay", tr.cfg.weight_decay)->capture_default_str();
    train_cmd->add_option("--target-sigma", tr.cfg.target_sigma)->capture_default_str();
    train_cmd->add_option("--loss-weight", tr.cfg.loss_weight_coeff)->capture_default_str();
    train_cmd->add_option("--init-noise", tr.cfg.init_noise_scale)->capture_default_str();
    train_cmd->add_flag("--eval-test", tr.eval_test, "Log test-split AP after every epoch");
    train_cmd->add_option("--distance-threshold", tr.distance_threshold)->capture_default_str();
    train_cmd->add_option("--window", tr.detect.window, "NMS window for --eval-test")->capture_default_str();
    train_cmd->add_option("--duplicate-radius", tr.detect.duplicate_radius, "Duplicate radius for --eval-test")
        ->capture_default_str();

    DetectOptions det;
    det.data = default_data_dir();
    auto* detect_cmd = app.add_subcommand("detect", "Detect lines with the Hough baseline or a trained LNet");
    add_common(detect_cmd, det.common, 0);
    detect_cmd->add_option("--data", det.data, "Dataset directory or manifest")->capture_default_str();
    detect_cmd->add_option("--split", det.split, "train, test or all")->capture_default_str();
    detect_cmd->add_option("--method", det.method, "baseline or lnet")->capture_default_str();
    detect_cmd->add_option("--checkpoint", det.checkpoint, "LNet checkpoint (lnet method)");
    detect_cmd->add_option("--out", det.out, "Output directory")->capture_default_str();
    detect_cmd->add_option("--window", det.window, "NMS window (odd; default depends on --method)");
    detect_cmd->add_option("--min-conf", det.min_conf, "Minimum confidence (default depends on --method)");
    detect_cmd->add_flag("--no-normalize", det.no_normalize, "Baseline: raw votes instead of length-normalized");
    detect_cmd->add_option("--min-pattern-pixels", det.min_pattern_pixels,
                           "Baseline: drop cells with fewer in-image pattern pixels");
    detect_cmd->add_option("--duplicate-radius", det.duplicate_radius,
                           "Drop detections within this line distance of a stronger one (0 = off)");
    detect_cmd->add_option("--max-detections", det.max_detections, "Keep the most confident K per image (0 = all)");

    EvalOptions ev;
    ev.data = default_data_dir();
    auto* eval_cmd = app.add_subcommand("eval", "Score detections against ground truth");
    add_common(eval_cmd, ev.common, 0);
    eval_cmd->add_option("--data", ev.data, "Dataset directory or manifest")->capture_default_str();
    eval_cmd->add_option("--detections", ev.detections, "Directory written by detect")->capture_default_str();
    eval_cmd->add_option("--out", ev.out, "Output directory (default: the detections directory)");
    eval_cmd->add_option("--distance-threshold", ev.distance_threshold)->capture_default_str();
    eval_cmd->add_option("--plot", ev.plot, "Write the PR curve as a PNG plot");

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time the Hough layer and print analytic FLOP counts");
    add_common(bench_cmd, bench.common, 0);
    bench_cmd->add_option("--sizes", bench.sizes, "Image sizes")->capture_default_str();
    bench_cmd->add_option("--repeats", bench.repeats)->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
        if (gen_cmd->parsed()) {
            apply_config(gen_cmd, gen.common);
            return cmd_gen(gen, out);
        }
        if (train_cmd->parsed()) {
            apply_config(train_cmd, tr.common);
            return cmd_train(tr, out, err);
        }
        if (detect_cmd->parsed()) {
            apply_config(detect_cmd, det.common);
            return cmd_detect(det, out);
        }
        if (eval_cmd->parsed()) {
            apply_config(eval_cmd, ev.common);
            return cmd_eval(ev, out);
        }
        if (bench_cmd->parsed()) {
            apply_config(bench_cmd, bench.common);
            return cmd_bench(bench, out);
        }
    }
    catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace lnet
