#include "swarmtrack/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace swarmtrack::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json read_json(const std::filesystem::path& path, bool calibration) {
    std::ifstream in(path);
    if (!in) {
        if (calibration)
            throw CalibrationMissing("cannot open calibration file " +
                                     path.string());
        throw InputError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

std::vector<CameraModel> load_cameras(const std::filesystem::path& path) {
    const json doc = read_json(path, true);
    if (!doc.is_array() || doc.size() < 1)
        throw CalibrationMissing(path.string() +
                                 ": expected a non-empty camera array");
    std::vector<CameraModel> cameras;
    try {
        for (const json& entry : doc) {
            CameraModel cam;
            cam.view_id = entry.at("view_id").get<int>();
            cam.image_width = entry.at("width").get<int>();
            cam.image_height = entry.at("height").get<int>();
            const auto proj = entry.at("projection");
            if (!proj.is_array() || proj.size() != 12)
                throw InputError("projection must hold 12 numbers");
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 4; ++c)
                    cam.projection(r, c) =
                        proj[static_cast<std::size_t>(4 * r + c)].get<double>();
            cam.validate();
            cameras.push_back(cam);
        }
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    std::sort(cameras.begin(), cameras.end(),
              [](const CameraModel& a, const CameraModel& b) {
                  return a.view_id < b.view_id;
              });
    for (std::size_t i = 1; i < cameras.size(); ++i)
        if (cameras[i].view_id == cameras[i - 1].view_id)
            throw InputError(path.string() + ": duplicate view_id");
    return cameras;
}

void save_cameras(const std::filesystem::path& path,
                  const std::vector<CameraModel>& cameras) {
    ordered_json doc = ordered_json::array();
    for (const CameraModel& cam : cameras) {
        ordered_json entry;
        entry["view_id"] = cam.view_id;
        ordered_json proj = ordered_json::array();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 4; ++c) proj.push_back(cam.projection(r, c));
        entry["projection"] = std::move(proj);
        entry["width"] = cam.image_width;
        entry["height"] = cam.image_height;
        doc.push_back(std::move(entry));
    }
    write_text(path, doc.dump(2) + "\n");
}

std::vector<FrameData> load_measurements(const std::filesystem::path& path) {
    const json doc = read_json(path, false);
    if (!doc.is_array())
        throw InputError(path.string() + ": expected an array of frames");
    std::vector<FrameData> frames;
    try {
        for (const json& frame_json : doc) {
            FrameData frame;
            frame.frame = frame_json.at("frame").get<int>();
            for (const json& view_json : frame_json.at("views")) {
                std::vector<Measurement> blobs;
                const int view_id = view_json.at("view_id").get<int>();
                for (const json& blob_json : view_json.at("blobs")) {
                    Measurement m;
                    m.view_id = view_id;
                    m.frame = frame.frame;
                    m.id = blob_json.at("id").get<int>();
                    for (const json& px : blob_json.at("pixels")) {
                        const int u = px.at(0).get<int>();
                        const int v = px.at(1).get<int>();
                        if (u < 0 || v < 0)
                            throw InputError("negative pixel coordinates");
                        m.pixels.push_back(pack_pixel(u, v));
                    }
                    std::sort(m.pixels.begin(), m.pixels.end());
                    m.pixels.erase(
                        std::unique(m.pixels.begin(), m.pixels.end()),
                        m.pixels.end());
                    if (m.pixels.empty())
                        throw InputError("blob without pixels");
                    const auto c = blob_json.at("centroid");
                    m.centroid = Pixel{c.at(0).get<double>(),
                                       c.at(1).get<double>()};
                    const Pixel computed = Measurement::centroid_of(m.pixels);
                    if (std::abs(computed.u - m.centroid.u) > 0.5 ||
                        std::abs(computed.v - m.centroid.v) > 0.5)
                        throw InputError(
                            "blob centroid disagrees with its pixels");
                    if (m.id != static_cast<int>(blobs.size()))
                        throw InputError(
                            "blob ids must be 0..K-1 in order");
                    blobs.push_back(std::move(m));
                }
                frame.views.push_back(std::move(blobs));
            }
            frame.build_indexes();
            frames.push_back(std::move(frame));
        }
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    std::sort(frames.begin(), frames.end(),
              [](const FrameData& a, const FrameData& b) {
                  return a.frame < b.frame;
              });
    for (std::size_t i = 0; i < frames.size(); ++i)
        if (frames[i].frame != static_cast<int>(i) + 1)
            throw InputError(path.string() +
                             ": frames must be numbered 1..T contiguously");
    return frames;
}

void save_measurements(const std::filesystem::path& path,
                       const std::vector<FrameData>& frames) {
    ordered_json doc = ordered_json::array();
    for (const FrameData& frame : frames) {
        ordered_json frame_json;
        frame_json["frame"] = frame.frame;
        ordered_json views = ordered_json::array();
        for (std::size_t v = 0; v < frame.views.size(); ++v) {
            const auto& blobs = frame.views[v];
            ordered_json view_json;
            // Views are positional; an empty view falls back to its slot.
            view_json["view_id"] =
                blobs.empty() ? static_cast<int>(v) + 1 : blobs[0].view_id;
            ordered_json blobs_json = ordered_json::array();
            for (const Measurement& m : blobs) {
                ordered_json blob_json;
                blob_json["id"] = m.id;
                blob_json["centroid"] = {m.centroid.u, m.centroid.v};
                ordered_json pixels = ordered_json::array();
                for (const PixelKey key : m.pixels) {
                    const PixelCoord p = unpack_pixel(key);
                    pixels.push_back({p.u, p.v});
                }
                blob_json["pixels"] = std::move(pixels);
                blobs_json.push_back(std::move(blob_json));
            }
            view_json["blobs"] = std::move(blobs_json);
            views.push_back(std::move(view_json));
        }
        frame_json["views"] = std::move(views);
        doc.push_back(std::move(frame_json));
    }
    write_text(path, doc.dump() + "\n");
}

namespace {

struct CsvReader {
    std::ifstream in;
    std::string line;
    int line_no = 0;
    std::string path;

    explicit CsvReader(const std::filesystem::path& p)
        : in(p), path(p.string()) {
        if (!in) throw InputError("cannot open " + path);
    }

    bool next(std::vector<std::string>& fields) {
        if (!std::getline(in, line)) return false;
        ++line_no;
        fields.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        return true;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw InputError(path + ":" + std::to_string(line_no) + ": " + what);
    }
};

double parse_double(CsvReader& r, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(s, &pos);
        if (pos != s.size()) r.fail("bad number '" + s + "'");
        return x;
    } catch (const std::exception&) {
        r.fail("bad number '" + s + "'");
    }
}

int parse_int(CsvReader& r, const std::string& s) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(s, &pos);
        if (pos != s.size()) r.fail("bad integer '" + s + "'");
        return x;
    } catch (const std::exception&) {
        r.fail("bad integer '" + s + "'");
    }
}

}  // namespace

void save_truth_csv(const std::filesystem::path& path,
                    const GroundTruth& truth) {
    std::ostringstream out;
    out << "id,frame,x,y,z,vx,vy,vz\n";
    for (std::size_t i = 0; i < truth.objects.size(); ++i) {
        const ObjectTruth& obj = truth.objects[i];
        for (std::size_t f = 0; f < obj.positions.size(); ++f) {
            out << (i + 1) << ',' << (f + 1);
            for (int k = 0; k < 3; ++k)
                out << ',' << fmt_double(obj.positions[f][k]);
            for (int k = 0; k < 3; ++k)
                out << ',' << fmt_double(obj.velocities[f][k]);
            out << '\n';
        }
    }
    write_text(path, out.str());
}

std::vector<PointSeries> load_truth_csv(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) reader.fail("empty file");
    std::map<int, PointSeries> by_id;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() < 5) reader.fail("expected id,frame,x,y,z,...");
        const int id = parse_int(reader, fields[0]);
        const int frame = parse_int(reader, fields[1]);
        const Vec3 p(parse_double(reader, fields[2]),
                     parse_double(reader, fields[3]),
                     parse_double(reader, fields[4]));
        auto [it, inserted] = by_id.try_emplace(id);
        PointSeries& s = it->second;
        if (inserted) {
            s.id = id;
            s.start_frame = frame;
        } else if (frame != s.end_frame() + 1) {
            reader.fail("frames of one id must be contiguous and ascending");
        }
        s.positions.push_back(p);
    }
    std::vector<PointSeries> out;
    out.reserve(by_id.size());
    for (auto& [id, s] : by_id) out.push_back(std::move(s));
    return out;
}

void save_tracks_csv(const std::filesystem::path& path,
                     const TrackSet& tracks) {
    std::ostringstream out;
    out << "id,frame,x,y,z,vx,vy,vz,ax,ay,az,view1_blob,view2_blob\n";
    for (const Trajectory& traj : tracks.trajectories) {
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            const StateCSM& s = traj.states[k];
            out << traj.id << ',' << (traj.start_frame + static_cast<int>(k));
            const int order[9] = {0, 3, 6, 1, 4, 7, 2, 5, 8};
            for (const int idx : order) out << ',' << fmt_double(s[idx]);
            const auto& assoc = traj.associations[k];
            out << ',' << (assoc.size() > 0 ? assoc[0] : -1);
            out << ',' << (assoc.size() > 1 ? assoc[1] : -1);
            out << '\n';
        }
    }
    write_text(path, out.str());
}

TrackSet load_tracks_csv(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) reader.fail("empty file");
    std::map<int, Trajectory> by_id;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() < 13)
            reader.fail("expected 13 columns id,frame,x,...,view2_blob");
        const int id = parse_int(reader, fields[0]);
        const int frame = parse_int(reader, fields[1]);
        StateCSM s;
        const int order[9] = {0, 3, 6, 1, 4, 7, 2, 5, 8};
        for (int k = 0; k < 9; ++k)
            s[order[k]] = parse_double(reader, fields[static_cast<std::size_t>(2 + k)]);
        auto [it, inserted] = by_id.try_emplace(id);
        Trajectory& traj = it->second;
        if (inserted) {
            traj.id = id;
            traj.start_frame = frame;
        } else if (frame != traj.end_frame() + 1) {
            reader.fail("frames of one id must be contiguous and ascending");
        }
        traj.states.push_back(s);
        traj.associations.push_back(
            {parse_int(reader, fields[11]), parse_int(reader, fields[12])});
    }
    TrackSet out;
    out.trajectories.reserve(by_id.size());
    for (auto& [id, traj] : by_id) out.trajectories.push_back(std::move(traj));
    return out;
}

std::string metrics_to_json(const Metrics& m) {
    ordered_json doc;
    doc["integrity"] = m.integrity;
    doc["continuity"] = m.continuity;
    if (std::isnan(m.precision))
        doc["precision"] = nullptr;
    else
        doc["precision"] = m.precision;
    doc["idsw_total"] = m.idsw_total;
    doc["matched_instants"] = m.matched_instants;
    return doc.dump(2) + "\n";
}

void save_metrics_json(const std::filesystem::path& path, const Metrics& m) {
    write_text(path, metrics_to_json(m));
}

}  // namespace swarmtrack::io
