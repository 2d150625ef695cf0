#include "swarmtrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "swarmtrack/io.hpp"
#include "swarmtrack/parallel.hpp"

namespace swarmtrack {

using nlohmann::json;
using nlohmann::ordered_json;

int resolve_workers(int requested) {
    if (const char* env = std::getenv("SWARMTRACK_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    if (requested >= 1) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ManagerParams RunConfig::manager_params() const {
    if (n_particles < 1) throw ConfigError("np must be >= 1");
    if (sigma2 < 0.0) throw ConfigError("sigma2 must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (r_var < 0.0) throw ConfigError("r_var must be >= 0");
    if (!(object_radius >= 0.0))
        throw ConfigError("object_radius must be >= 0");

    ManagerParams params;
    params.method = method;
    params.filter.n_particles = n_particles;
    params.filter.sigma2 = sigma2;
    params.filter.csm.alpha = alpha;
    params.filter.csm.a_max = a_max;
    params.filter.csm.dt = dt;
    params.filter.csm.validate();
    params.filter.obs =
        ObservationModel::position(r_var * Mat3::Identity());
    params.filter.object_radius = object_radius;
    params.gates = gates;
    params.warmup_frames = warmup_frames;
    params.min_track_length = min_track_length;
    params.workers = resolve_workers(workers);
    return params;
}

namespace {

std::array<double, 3> axis_triple(const json& value, const char* key) {
    std::array<double, 3> out;
    if (value.is_number()) {
        out.fill(value.get<double>());
        return out;
    }
    if (value.is_array() && value.size() == 3) {
        for (int i = 0; i < 3; ++i)
            out[static_cast<std::size_t>(i)] =
                value[static_cast<std::size_t>(i)].get<double>();
        return out;
    }
    throw ConfigError(std::string(key) + " must be a number or a 3-array");
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    RunConfig rc;
    try {
        if (doc.contains("method"))
            rc.method = method_from_name(doc["method"].get<std::string>());
        if (doc.contains("np")) rc.n_particles = doc["np"].get<int>();
        if (doc.contains("sigma2")) rc.sigma2 = doc["sigma2"].get<double>();
        if (doc.contains("alpha")) rc.alpha = axis_triple(doc["alpha"], "alpha");
        if (doc.contains("a_max")) rc.a_max = axis_triple(doc["a_max"], "a_max");
        if (doc.contains("t_h")) rc.warmup_frames = doc["t_h"].get<int>();
        if (doc.contains("r_var")) rc.r_var = doc["r_var"].get<double>();
        if (doc.contains("dt")) rc.dt = doc["dt"].get<double>();
        if (doc.contains("object_radius"))
            rc.object_radius = doc["object_radius"].get<double>();
        if (doc.contains("gates")) {
            const json& g = doc["gates"];
            if (g.contains("epipolar_px"))
                rc.gates.epipolar_px = g["epipolar_px"].get<double>();
            if (g.contains("v_max")) rc.gates.v_max = g["v_max"].get<double>();
        }
        if (doc.contains("min_track_length"))
            rc.min_track_length = doc["min_track_length"].get<int>();
        if (doc.contains("seed")) rc.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("workers")) rc.workers = doc["workers"].get<int>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return run_config_from_json(text.str());
}

SimConfig sim_config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("sim config: ") + e.what());
    }
    SimConfig cfg;
    try {
        auto num = [&doc](const char* key, double& target) {
            if (doc.contains(key)) target = doc[key].get<double>();
        };
        if (doc.contains("n_objects"))
            cfg.n_objects = doc["n_objects"].get<int>();
        num("box_half", cfg.box_half);
        num("speed_base", cfg.speed_base);
        num("speed_amp", cfg.speed_amp);
        num("speed_period", cfg.speed_period);
        num("direction_period", cfg.direction_period);
        num("heading_scale", cfg.heading_scale);
        num("climb_scale", cfg.climb_scale);
        num("ball_radius", cfg.ball_radius);
        num("dt", cfg.dt);
        num("duration", cfg.duration);
        num("pixel_noise_sigma", cfg.pixel_noise_sigma);
        num("focal_px", cfg.focal_px);
        num("camera_distance", cfg.camera_distance);
        if (doc.contains("image_size"))
            cfg.image_size = doc["image_size"].get<int>();
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("out_of_view")) {
            const std::string policy = doc["out_of_view"].get<std::string>();
            if (policy == "error")
                cfg.out_of_view = OutOfViewPolicy::Error;
            else if (policy == "clamp")
                cfg.out_of_view = OutOfViewPolicy::Clamp;
            else
                throw ConfigError("out_of_view must be 'error' or 'clamp'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("sim config: ") + e.what());
    }
    return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return sim_config_from_json(text.str());
}

void cmd_simulate(const SimConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    const GroundTruth truth = generate_truth(cfg);
    const std::vector<CameraModel> cameras = default_cameras(cfg);
    const Dataset dataset = simulate_dataset(truth, cfg, cameras);
    io::save_cameras(out_dir / "calibration.json", cameras);
    io::save_measurements(out_dir / "measurements.json", dataset.frames);
    io::save_truth_csv(out_dir / "truth.csv", truth);
}

namespace {

ordered_json run_config_to_json(const RunConfig& rc) {
    ordered_json params;
    params["np"] = rc.n_particles;
    params["sigma2"] = rc.sigma2;
    params["alpha"] = rc.alpha;
    params["a_max"] = rc.a_max;
    params["t_h"] = rc.warmup_frames;
    params["r_var"] = rc.r_var;
    params["dt"] = rc.dt;
    params["object_radius"] = rc.object_radius;
    params["gates"] = {{"epipolar_px", rc.gates.epipolar_px},
                       {"v_max", rc.gates.v_max}};
    params["min_track_length"] = rc.min_track_length;
    return params;
}

}  // namespace

void cmd_track(const std::filesystem::path& measurements,
               const std::filesystem::path& calibration,
               const RunConfig& config, const std::filesystem::path& out_csv,
               const std::filesystem::path& manifest_path) {
    Dataset dataset;
    dataset.cameras = io::load_cameras(calibration);
    dataset.frames = io::load_measurements(measurements);
    const TrackSet tracks = run(dataset, config.manager_params(), config.seed);
    io::save_tracks_csv(out_csv, tracks);

    ordered_json manifest;
    manifest["method"] = method_name(config.method);
    manifest["params"] = run_config_to_json(config);
    manifest["seed"] = config.seed;
    manifest["inputs"] = {{"measurements", measurements.string()},
                          {"calibration", calibration.string()}};
    manifest["output"] = out_csv.string();
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw InputError("cannot write " + manifest_path.string());
    out << manifest.dump(2) << "\n";
}

Metrics cmd_eval(const std::filesystem::path& truth_csv,
                 const std::filesystem::path& tracks_csv, double d0,
                 int start_frame, const std::filesystem::path& out_json) {
    if (!(d0 > 0.0)) throw ConfigError("d0 must be positive");
    std::vector<PointSeries> gt = io::load_truth_csv(truth_csv);
    const TrackSet tracks = io::load_tracks_csv(tracks_csv);
    if (start_frame > 1)
        gt = restrict_series(gt, start_frame,
                             std::numeric_limits<int>::max());
    const Metrics m =
        evaluate(gt, series_from_tracks(tracks), EvalConfig{d0});
    if (!out_json.empty()) io::save_metrics_json(out_json, m);
    return m;
}

namespace {

struct RunMetrics {
    Metrics cvpf;
    Metrics cskpf;
};

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
};

Moments moments(const std::vector<double>& values) {
    Moments m;
    std::vector<double> usable;
    for (const double v : values)
        if (!std::isnan(v)) usable.push_back(v);
    if (usable.empty()) {
        m.mean = std::numeric_limits<double>::quiet_NaN();
        m.stddev = std::numeric_limits<double>::quiet_NaN();
        return m;
    }
    for (const double v : usable) m.mean += v;
    m.mean /= static_cast<double>(usable.size());
    if (usable.size() > 1) {
        double ss = 0.0;
        for (const double v : usable) ss += (v - m.mean) * (v - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(usable.size() - 1));
    }
    return m;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SimConfig& base_sim,
                                const RunConfig& base_run,
                                const std::vector<int>& n_list, int repeats,
                                double d0, int eval_start_frame, int workers) {
    if (repeats < 1) throw ConfigError("sweep repeats must be >= 1");
    if (n_list.empty()) throw ConfigError("sweep needs a non-empty N list");
    base_sim.validate();

    const std::size_t n_jobs = n_list.size() * static_cast<std::size_t>(repeats);
    std::vector<RunMetrics> results(n_jobs);
    const int pool = resolve_workers(workers);

    parallel_for(n_jobs, pool, [&](std::size_t job) {
        const std::size_t n_index = job / static_cast<std::size_t>(repeats);
        SimConfig sim = base_sim;
        sim.n_objects = n_list[n_index];
        sim.seed = base_sim.seed + job;  // every repeat owns its seed

        const GroundTruth truth = generate_truth(sim);
        const std::vector<CameraModel> cameras = default_cameras(sim);
        const Dataset dataset = simulate_dataset(truth, sim, cameras);
        const std::vector<PointSeries> gt = restrict_series(
            series_from_truth(truth), eval_start_frame,
            std::numeric_limits<int>::max());

        for (const Method method : {Method::Cvpf, Method::Cskpf}) {
            RunConfig rc = base_run;
            rc.method = method;
            rc.seed = sim.seed;
            rc.workers = 1;  // repeats already fill the pool
            const TrackSet tracks =
                run(dataset, rc.manager_params(), rc.seed);
            const Metrics m =
                evaluate(gt, series_from_tracks(tracks), EvalConfig{d0});
            (method == Method::Cvpf ? results[job].cvpf
                                    : results[job].cskpf) = m;
        }
    });

    std::vector<SweepRow> rows;
    for (std::size_t n_index = 0; n_index < n_list.size(); ++n_index) {
        for (const Method method : {Method::Cvpf, Method::Cskpf}) {
            std::vector<double> integ, cont, prec;
            for (int r = 0; r < repeats; ++r) {
                const std::size_t job =
                    n_index * static_cast<std::size_t>(repeats) +
                    static_cast<std::size_t>(r);
                const Metrics& m = method == Method::Cvpf
                                       ? results[job].cvpf
                                       : results[job].cskpf;
                integ.push_back(m.integrity);
                cont.push_back(m.continuity);
                prec.push_back(m.precision);
            }
            SweepRow row;
            row.n_objects = n_list[n_index];
            row.method = method;
            row.repeats = repeats;
            const Moments mi = moments(integ);
            const Moments mc = moments(cont);
            const Moments mp = moments(prec);
            row.integrity_mean = mi.mean;
            row.integrity_std = mi.stddev;
            row.continuity_mean = mc.mean;
            row.continuity_std = mc.stddev;
            row.precision_mean = mp.mean;
            row.precision_std = mp.stddev;
            rows.push_back(row);
        }
    }
    return rows;
}

void save_sweep_csv(const std::filesystem::path& path,
                    const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "n,method,repeats,integrity_mean,integrity_std,continuity_mean,"
           "continuity_std,precision_mean,precision_std\n";
    char buf[64];
    auto fmt = [&buf](double x) {
        std::snprintf(buf, sizeof(buf), "%.9g", x);
        return std::string(buf);
    };
    for (const SweepRow& row : rows) {
        out << row.n_objects << ',' << method_name(row.method) << ','
            << row.repeats << ',' << fmt(row.integrity_mean) << ','
            << fmt(row.integrity_std) << ',' << fmt(row.continuity_mean) << ','
            << fmt(row.continuity_std) << ',' << fmt(row.precision_mean) << ','
            << fmt(row.precision_std) << '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot write " + path.string());
    file << out.str();
}

std::string cmd_reproject(const TrackSet& tracks,
                          const std::vector<CameraModel>& cameras,
                          const std::vector<FrameData>& frames, int frame_from,
                          int frame_to) {
    ordered_json doc;
    ordered_json frames_json = ordered_json::array();
    for (const FrameData& frame : frames) {
        if (frame.frame < frame_from || frame.frame > frame_to) continue;
        ordered_json frame_json;
        frame_json["frame"] = frame.frame;
        ordered_json views = ordered_json::array();
        for (std::size_t v = 0; v < frame.views.size(); ++v) {
            ordered_json view_json;
            view_json["view_id"] = cameras[v].view_id;
            ordered_json blobs = ordered_json::array();
            for (const Measurement& m : frame.views[v]) {
                int u0 = cameras[v].image_width, u1 = -1;
                int v0 = cameras[v].image_height, v1 = -1;
                for (const PixelKey key : m.pixels) {
                    const PixelCoord p = unpack_pixel(key);
                    u0 = std::min(u0, p.u);
                    u1 = std::max(u1, p.u);
                    v0 = std::min(v0, p.v);
                    v1 = std::max(v1, p.v);
                }
                ordered_json blob;
                blob["id"] = m.id;
                blob["centroid"] = {m.centroid.u, m.centroid.v};
                blob["bbox"] = {u0, v0, u1, v1};
                blobs.push_back(std::move(blob));
            }
            view_json["blobs"] = std::move(blobs);
            ordered_json track_points = ordered_json::array();
            for (const Trajectory& traj : tracks.trajectories) {
                if (frame.frame < traj.start_frame ||
                    frame.frame > traj.end_frame())
                    continue;
                const StateCSM& s = traj.states[static_cast<std::size_t>(
                    frame.frame - traj.start_frame)];
                try {
                    const Pixel px = project(cameras[v], position_of(s));
                    ordered_json point;
                    point["id"] = traj.id;
                    point["u"] = px.u;
                    point["v"] = px.v;
                    track_points.push_back(std::move(point));
                } catch (const PointBehindCamera&) {
                    // not visible in this view
                }
            }
            view_json["tracks"] = std::move(track_points);
            views.push_back(std::move(view_json));
        }
        frame_json["views"] = std::move(views);
        frames_json.push_back(std::move(frame_json));
    }
    doc["frames"] = std::move(frames_json);
    return doc.dump(2) + "\n";
}

}  // namespace swarmtrack
