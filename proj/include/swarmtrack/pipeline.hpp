#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swarmtrack/eval.hpp"
#include "swarmtrack/manager.hpp"
#include "swarmtrack/sim.hpp"

namespace swarmtrack {

/// Tracking run configuration shared by the CLI and the batch pipeline.
struct RunConfig {
    Method method = Method::Cskpf;
    int n_particles = 100;
    double sigma2 = 0.09;                        // CVPF particle variance
    std::array<double, 3> alpha{5.0, 5.0, 5.0};  // CSKPF maneuver rate
    std::array<double, 3> a_max{5.0, 5.0, 5.0};  // CSKPF max acceleration
    int warmup_frames = 10;                      // T_h
    double r_var = 0.006;        // observation noise variance per axis
    double dt = 0.1;             // s
    double object_radius = 0.5;  // rendered/assumed ball radius
    Gates gates;
    int min_track_length = 3;
    std::uint64_t seed = 1;
    int workers = 0;  // 0: hardware concurrency

    ManagerParams manager_params() const;
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Parses a RunConfig from JSON text (exposed for flag-override layering).
RunConfig run_config_from_json(const std::string& text);

SimConfig load_sim_config(const std::filesystem::path& path);
SimConfig sim_config_from_json(const std::string& text);

/// simulate: ground truth + rendered measurements + calibration, written to
/// out_dir as measurements.json, truth.csv, calibration.json.
void cmd_simulate(const SimConfig& cfg, const std::filesystem::path& out_dir);

/// track: measurement + calibration files -> tracks CSV + manifest JSON.
void cmd_track(const std::filesystem::path& measurements,
               const std::filesystem::path& calibration,
               const RunConfig& config, const std::filesystem::path& out_csv,
               const std::filesystem::path& manifest_path);

/// eval: truth CSV + tracks CSV -> metrics (also written as JSON when
/// out_json is non-empty). Truth is restricted to frames >= start_frame.
Metrics cmd_eval(const std::filesystem::path& truth_csv,
                 const std::filesystem::path& tracks_csv, double d0,
                 int start_frame, const std::filesystem::path& out_json);

struct SweepRow {
    int n_objects = 0;
    Method method = Method::Cvpf;
    int repeats = 0;
    double integrity_mean = 0.0, integrity_std = 0.0;
    double continuity_mean = 0.0, continuity_std = 0.0;
    double precision_mean = 0.0, precision_std = 0.0;
};

/// sweep: for each N and repeat, simulate one dataset (seed = base seed +
/// run index) and track it with both methods; per-(N, method) mean and
/// sample standard deviation of the metrics. Repeats run on a worker pool.
std::vector<SweepRow> run_sweep(const SimConfig& base_sim,
                                const RunConfig& base_run,
                                const std::vector<int>& n_list, int repeats,
                                double d0, int eval_start_frame, int workers);

void save_sweep_csv(const std::filesystem::path& path,
                    const std::vector<SweepRow>& rows);

/// reproject: blob outlines and reprojected track points per view for a
/// frame range, as JSON text.
std::string cmd_reproject(const TrackSet& tracks,
                          const std::vector<CameraModel>& cameras,
                          const std::vector<FrameData>& frames, int frame_from,
                          int frame_to);

}  // namespace swarmtrack
