#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swarmtrack/io.hpp"
#include "swarmtrack/pipeline.hpp"

namespace fs = std::filesystem;
using namespace swarmtrack;

namespace {

// Exit codes: 0 success, 1 usage, 2 missing/invalid input,
// 3 runtime numerical failure.
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            out.push_back(std::stoi(token));
        } catch (const std::exception&) {
            throw ConfigError("bad N list entry '" + token + "'");
        }
        if (out.back() < 1) throw ConfigError("N must be >= 1");
    }
    if (out.empty()) throw ConfigError("empty N list");
    return out;
}

struct SimulateArgs {
    std::string config;
    std::string out_dir;
    std::optional<int> n_objects;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    std::optional<double> dt;
    std::optional<double> noise;

    SimConfig resolve() const {
        SimConfig cfg;
        if (!config.empty()) cfg = load_sim_config(config);
        if (n_objects) cfg.n_objects = *n_objects;
        if (seed) cfg.seed = *seed;
        if (duration) cfg.duration = *duration;
        if (dt) cfg.dt = *dt;
        if (noise) cfg.pixel_noise_sigma = *noise;
        return cfg;
    }
};

struct TrackArgs {
    std::string measurements;
    std::string calibration;
    std::string out_csv = "tracks.csv";
    std::string manifest;
    std::string config;
    std::optional<std::string> method;
    std::optional<std::uint64_t> seed;
    std::optional<int> np;
    std::optional<double> sigma2;
    std::optional<double> alpha;
    std::optional<double> a_max;
    std::optional<int> t_h;
    std::optional<double> r_var;
    std::optional<double> dt;
    std::optional<double> object_radius;
    std::optional<int> workers;

    RunConfig resolve() const {
        RunConfig rc;
        if (!config.empty()) rc = load_run_config(config);
        if (method) rc.method = method_from_name(*method);
        if (seed) rc.seed = *seed;
        if (np) rc.n_particles = *np;
        if (sigma2) rc.sigma2 = *sigma2;
        if (alpha) rc.alpha = {*alpha, *alpha, *alpha};
        if (a_max) rc.a_max = {*a_max, *a_max, *a_max};
        if (t_h) rc.warmup_frames = *t_h;
        if (r_var) rc.r_var = *r_var;
        if (dt) rc.dt = *dt;
        if (object_radius) rc.object_radius = *object_radius;
        if (workers) rc.workers = *workers;
        return rc;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "swarmtrack: multi-view 3D multi-object tracking "
        "(simulate | track | eval | sweep | reproject)"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Generate a synthetic swarm dataset");
    sim_cmd->add_option("--config", sim_args.config, "Sim config JSON");
    sim_cmd->add_option("--out", sim_args.out_dir, "Output directory")
        ->required();
    sim_cmd->add_option("--n-objects", sim_args.n_objects, "Number of objects");
    sim_cmd->add_option("--seed", sim_args.seed, "Random seed");
    sim_cmd->add_option("--duration", sim_args.duration, "Duration, seconds");
    sim_cmd->add_option("--dt", sim_args.dt, "Frame interval, seconds");
    sim_cmd->add_option("--pixel-noise", sim_args.noise,
                        "Centroid noise sigma, pixels");

    TrackArgs track_args;
    auto* track_cmd =
        app.add_subcommand("track", "Reconstruct 3D trajectories");
    track_cmd
        ->add_option("--measurements", track_args.measurements,
                     "Measurement JSON")
        ->required();
    track_cmd
        ->add_option("--calibration", track_args.calibration,
                     "Calibration JSON")
        ->required();
    track_cmd->add_option("--out", track_args.out_csv, "Output track CSV");
    track_cmd->add_option("--manifest", track_args.manifest,
                          "Run manifest path (default: <out>.manifest.json)");
    track_cmd->add_option("--config", track_args.config, "Run config JSON");
    track_cmd->add_option("--method", track_args.method, "cvpf | cskpf");
    track_cmd->add_option("--seed", track_args.seed, "Random seed");
    track_cmd->add_option("--np", track_args.np, "Particles per tracker");
    track_cmd->add_option("--sigma2", track_args.sigma2,
                          "CVPF particle variance");
    track_cmd->add_option("--alpha", track_args.alpha,
                          "CSKPF maneuver rate (all axes)");
    track_cmd->add_option("--a-max", track_args.a_max,
                          "CSKPF max acceleration (all axes)");
    track_cmd->add_option("--t-h", track_args.t_h, "Warm-up frames");
    track_cmd->add_option("--r-var", track_args.r_var,
                          "Observation noise variance per axis");
    track_cmd->add_option("--dt", track_args.dt, "Frame interval, seconds");
    track_cmd->add_option("--object-radius", track_args.object_radius,
                          "Assumed object radius");
    track_cmd->add_option("--workers", track_args.workers,
                          "Tracker-stepping threads");

    std::string eval_truth, eval_tracks, eval_out;
    double eval_d0 = 1.5;
    int eval_start = 3;
    auto* eval_cmd =
        app.add_subcommand("eval", "Score tracks against ground truth");
    eval_cmd->add_option("--truth", eval_truth, "Ground-truth CSV")
        ->required();
    eval_cmd->add_option("--tracks", eval_tracks, "Track CSV")->required();
    eval_cmd->add_option("--d0", eval_d0, "Match threshold distance");
    eval_cmd->add_option("--start-frame", eval_start,
                         "First scored frame (tracking starts at frame 3)");
    eval_cmd->add_option("--out", eval_out, "Metrics JSON path");

    std::string sweep_run_config, sweep_sim_config, sweep_out = "sweep.csv";
    std::string sweep_n_list = "1,20,40,60";
    int sweep_repeats = 10;
    double sweep_d0 = 1.5;
    int sweep_start = 3;
    int sweep_workers = 0;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Method comparison over object counts");
    sweep_cmd->add_option("--config", sweep_run_config, "Run config JSON");
    sweep_cmd->add_option("--sim-config", sweep_sim_config, "Sim config JSON");
    sweep_cmd->add_option("--n-list", sweep_n_list, "Comma-separated N values");
    sweep_cmd->add_option("--repeats", sweep_repeats, "Repeats per N");
    sweep_cmd->add_option("--d0", sweep_d0, "Match threshold distance");
    sweep_cmd->add_option("--start-frame", sweep_start, "First scored frame");
    sweep_cmd->add_option("--out", sweep_out, "Output CSV");
    sweep_cmd->add_option("--workers", sweep_workers, "Worker threads");

    std::string rp_tracks, rp_calibration, rp_measurements, rp_out;
    int rp_from = 1, rp_to = 0;
    auto* rp_cmd = app.add_subcommand(
        "reproject", "Blob outlines + reprojected track points per view");
    rp_cmd->add_option("--tracks", rp_tracks, "Track CSV")->required();
    rp_cmd->add_option("--calibration", rp_calibration, "Calibration JSON")
        ->required();
    rp_cmd->add_option("--measurements", rp_measurements, "Measurement JSON")
        ->required();
    rp_cmd->add_option("--from", rp_from, "First frame (inclusive)");
    rp_cmd->add_option("--to", rp_to, "Last frame (inclusive)");
    rp_cmd->add_option("--out", rp_out, "Output JSON (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (sim_cmd->parsed()) {
            cmd_simulate(sim_args.resolve(), sim_args.out_dir);
        } else if (track_cmd->parsed()) {
            const std::string manifest =
                track_args.manifest.empty()
                    ? track_args.out_csv + ".manifest.json"
                    : track_args.manifest;
            cmd_track(track_args.measurements, track_args.calibration,
                      track_args.resolve(), track_args.out_csv, manifest);
        } else if (eval_cmd->parsed()) {
            const Metrics m =
                cmd_eval(eval_truth, eval_tracks, eval_d0, eval_start, eval_out);
            std::cout << io::metrics_to_json(m);
        } else if (sweep_cmd->parsed()) {
            SimConfig sim_cfg;
            if (!sweep_sim_config.empty())
                sim_cfg = load_sim_config(sweep_sim_config);
            RunConfig run_cfg;
            if (!sweep_run_config.empty())
                run_cfg = load_run_config(sweep_run_config);
            const auto rows =
                run_sweep(sim_cfg, run_cfg, parse_n_list(sweep_n_list),
                          sweep_repeats, sweep_d0, sweep_start, sweep_workers);
            save_sweep_csv(sweep_out, rows);
        } else if (rp_cmd->parsed()) {
            const TrackSet tracks = io::load_tracks_csv(rp_tracks);
            const auto cameras = io::load_cameras(rp_calibration);
            const auto frames = io::load_measurements(rp_measurements);
            const int last = rp_to > 0 ? rp_to : static_cast<int>(frames.size());
            const std::string json_text =
                cmd_reproject(tracks, cameras, frames, rp_from, last);
            if (rp_out.empty()) {
                std::cout << json_text;
            } else {
                std::ofstream out(rp_out, std::ios::binary);
                if (!out) throw InputError("cannot write " + rp_out);
                out << json_text;
            }
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
