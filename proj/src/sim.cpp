#include "swarmtrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace swarmtrack {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

int SimConfig::n_frames() const {
    return static_cast<int>(std::floor(duration / dt + 0.5));
}

void SimConfig::validate() const {
    if (n_objects < 1) throw ConfigError("sim: n_objects must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("sim: dt must be positive");
    if (!(duration > 0.0) || n_frames() < 1)
        throw ConfigError("sim: duration must cover at least one frame");
    if (!(speed_period > 0.0) || !(direction_period > 0.0))
        throw ConfigError("sim: waveform periods must be positive");
    if (!(box_half > 0.0)) throw ConfigError("sim: box_half must be positive");
    if (ball_radius < 0.0) throw ConfigError("sim: ball_radius must be >= 0");
    if (pixel_noise_sigma < 0.0)
        throw ConfigError("sim: pixel_noise_sigma must be >= 0");
    if (image_size <= 0 || !(focal_px > 0.0) || !(camera_distance > 0.0))
        throw ConfigError("sim: camera parameters must be positive");
}

Vec3 MotionWave::velocity(const SimConfig& cfg, double t) const {
    const double speed =
        cfg.speed_base +
        cfg.speed_amp * std::sin(kTwoPi / cfg.speed_period * t + alpha0);
    const double heading =
        cfg.heading_scale * a_xi *
        (1.0 + std::cos(kTwoPi / cfg.direction_period * t + xi0));
    const double climb =
        cfg.climb_scale * a_gamma *
        std::cos(kTwoPi / cfg.direction_period * t + gamma0);
    return speed * Vec3(std::cos(climb) * std::cos(heading),
                        std::cos(climb) * std::sin(heading),
                        std::sin(climb));
}

GroundTruth generate_truth(const SimConfig& cfg) {
    cfg.validate();
    Rng rng = Rng::derive(cfg.seed, 0);
    const int frames = cfg.n_frames();
    GroundTruth truth;
    truth.dt = cfg.dt;
    truth.objects.resize(static_cast<std::size_t>(cfg.n_objects));
    for (ObjectTruth& obj : truth.objects) {
        Vec3 p(rng.uniform(-cfg.box_half, cfg.box_half),
               rng.uniform(-cfg.box_half, cfg.box_half),
               rng.uniform(-cfg.box_half, cfg.box_half));
        MotionWave wave;
        wave.alpha0 = rng.uniform(0.0, kTwoPi);
        wave.xi0 = rng.uniform(0.0, kTwoPi);
        wave.gamma0 = rng.uniform(0.0, kTwoPi);
        wave.a_xi = rng.uniform(-1.0, 1.0);
        wave.a_gamma = rng.uniform(-1.0, 1.0);

        obj.positions.reserve(static_cast<std::size_t>(frames));
        obj.velocities.reserve(static_cast<std::size_t>(frames));
        for (int f = 0; f < frames; ++f) {
            const Vec3 v = wave.velocity(cfg, f * cfg.dt);
            obj.positions.push_back(p);
            obj.velocities.push_back(v);
            p += cfg.dt * v;  // forward Euler
        }
    }
    return truth;
}

namespace {

CameraModel look_at_camera(const Vec3& eye, const Vec3& target, double focal,
                           int image_size, int view_id) {
    const Vec3 forward = (target - eye).normalized();
    const Vec3 up_hint(0.0, 0.0, 1.0);
    const Vec3 right = forward.cross(up_hint).normalized();
    const Vec3 down = forward.cross(right);
    Mat3 rotation;
    rotation.row(0) = right;
    rotation.row(1) = down;
    rotation.row(2) = forward;
    Mat3 intrinsics = Mat3::Identity();
    const double pp = (image_size - 1) / 2.0;
    intrinsics(0, 0) = focal;
    intrinsics(1, 1) = focal;
    intrinsics(0, 2) = pp;
    intrinsics(1, 2) = pp;
    CameraModel cam;
    cam.projection.leftCols<3>() = intrinsics * rotation;
    cam.projection.col(3) = intrinsics * (-rotation * eye);
    cam.image_width = image_size;
    cam.image_height = image_size;
    cam.view_id = view_id;
    return cam;
}

}  // namespace

std::vector<CameraModel> default_cameras(const SimConfig& cfg) {
    // The swarm drifts along +x (the heading waveform keeps cos(xi) > 0),
    // so the views are aimed at the center of the region reachable within
    // the configured duration rather than at the initial box.
    const double reach = (cfg.speed_base + cfg.speed_amp) * cfg.duration;
    const Vec3 aim(reach / 2.0, 0.0, 0.0);
    const double d = cfg.camera_distance;
    return {look_at_camera(aim + Vec3(d, 0.0, 0.0), aim, cfg.focal_px,
                           cfg.image_size, 1),
            look_at_camera(aim + Vec3(0.0, d, 0.0), aim, cfg.focal_px,
                           cfg.image_size, 2)};
}

namespace {

/// 8-connected components of a sorted pixel set, smallest-first ordering.
std::vector<PixelSet> connected_components(const PixelSet& pixels) {
    const std::size_t n = pixels.size();
    std::vector<int> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] =
                parent[static_cast<std::size_t>(
                    parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] =
            std::min(a, b);
    };
    auto index_of = [&](int u, int v) -> int {
        if (u < 0 || v < 0) return -1;
        const PixelKey key = pack_pixel(u, v);
        const auto it = std::lower_bound(pixels.begin(), pixels.end(), key);
        if (it == pixels.end() || *it != key) return -1;
        return static_cast<int>(it - pixels.begin());
    };
    for (std::size_t i = 0; i < n; ++i) {
        const PixelCoord p = unpack_pixel(pixels[i]);
        // Scanline order: it is enough to look at the four already-seen
        // neighbors (W, NW, N, NE).
        const int neighbors[4][2] = {{p.u - 1, p.v},
                                     {p.u - 1, p.v - 1},
                                     {p.u, p.v - 1},
                                     {p.u + 1, p.v - 1}};
        for (const auto& nb : neighbors) {
            const int j = index_of(nb[0], nb[1]);
            if (j >= 0) unite(static_cast<int>(i), j);
        }
    }
    std::unordered_map<int, std::size_t> root_to_component;
    std::vector<PixelSet> components;
    for (std::size_t i = 0; i < n; ++i) {
        const int root = find(static_cast<int>(i));
        auto [it, inserted] =
            root_to_component.emplace(root, components.size());
        if (inserted) components.emplace_back();
        components[it->second].push_back(pixels[i]);
    }
    // Components inherit scanline order of their first pixel, which makes
    // blob ids deterministic.
    return components;
}

}  // namespace

FrameData render_frame(const GroundTruth& truth, int frame_index,
                       const std::vector<CameraModel>& cameras,
                       double noise_sigma, double ball_radius, Rng& rng,
                       OutOfViewPolicy policy) {
    FrameData frame;
    frame.frame = frame_index + 1;
    frame.views.resize(cameras.size());
    for (std::size_t v = 0; v < cameras.size(); ++v) {
        const CameraModel& cam = cameras[v];
        PixelSet all_pixels;
        for (std::size_t o = 0; o < truth.objects.size(); ++o) {
            const Vec3& center =
                truth.objects[o].positions[static_cast<std::size_t>(frame_index)];
            const double du = rng.gaussian(0.0, noise_sigma);
            const double dv = rng.gaussian(0.0, noise_sigma);
            PixelSet disc;
            try {
                // The measurement noise translates the whole footprint:
                // rasterize the disc at the noised projected center.
                const Pixel c = project(cam, center);
                const double r_px =
                    cam.focal_scale() * ball_radius / cam.depth_of(center);
                disc = raster_disc(Pixel{c.u + du, c.v + dv}, r_px,
                                   cam.image_width, cam.image_height);
            } catch (const PointBehindCamera&) {
                disc.clear();
            }
            if (disc.empty()) {
                if (policy == OutOfViewPolicy::Error)
                    throw ObjectOutOfView(
                        "object " + std::to_string(o + 1) + " leaves view " +
                        std::to_string(cam.view_id) + " at frame " +
                        std::to_string(frame.frame));
                continue;
            }
            all_pixels.insert(all_pixels.end(), disc.begin(), disc.end());
        }
        std::sort(all_pixels.begin(), all_pixels.end());
        all_pixels.erase(std::unique(all_pixels.begin(), all_pixels.end()),
                         all_pixels.end());

        std::vector<PixelSet> blobs = connected_components(all_pixels);
        auto& view = frame.views[v];
        view.reserve(blobs.size());
        for (std::size_t k = 0; k < blobs.size(); ++k) {
            Measurement m;
            m.view_id = cam.view_id;
            m.frame = frame.frame;
            m.id = static_cast<int>(k);
            m.pixels = std::move(blobs[k]);
            m.centroid = Measurement::centroid_of(m.pixels);
            view.push_back(std::move(m));
        }
    }
    frame.build_indexes();
    return frame;
}

Dataset simulate_dataset(const GroundTruth& truth, const SimConfig& cfg,
                         const std::vector<CameraModel>& cameras) {
    Dataset dataset;
    dataset.cameras = cameras;
    const int frames = truth.n_frames();
    dataset.frames.reserve(static_cast<std::size_t>(frames));
    for (int f = 0; f < frames; ++f) {
        Rng frame_rng = Rng::derive(cfg.seed, 1 + static_cast<std::uint64_t>(f));
        dataset.frames.push_back(render_frame(truth, f, cameras,
                                              cfg.pixel_noise_sigma,
                                              cfg.ball_radius, frame_rng,
                                              cfg.out_of_view));
    }
    return dataset;
}

}  // namespace swarmtrack
