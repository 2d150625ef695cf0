#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "swarmtrack/eval.hpp"
#include "swarmtrack/manager.hpp"
#include "swarmtrack/sim.hpp"

namespace swarmtrack::io {

// Camera calibration: JSON array of
//   {view_id, projection: [12 numbers, row-major], width, height}
std::vector<CameraModel> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::filesystem::path& path,
                  const std::vector<CameraModel>& cameras);

// Measurements: JSON array of frames,
//   {frame, views: [{view_id, blobs: [{id, centroid: [u,v],
//                                      pixels: [[u,v], ...]}]}]}
// Blob ids must be 0..K-1 in order; occupancy indexes are built on load.
std::vector<FrameData> load_measurements(const std::filesystem::path& path);
void save_measurements(const std::filesystem::path& path,
                       const std::vector<FrameData>& frames);

// Ground truth CSV: id,frame,x,y,z,vx,vy,vz
void save_truth_csv(const std::filesystem::path& path,
                    const GroundTruth& truth);
std::vector<PointSeries> load_truth_csv(const std::filesystem::path& path);

// Track set CSV:
//   id,frame,x,y,z,vx,vy,vz,ax,ay,az,view1_blob,view2_blob
void save_tracks_csv(const std::filesystem::path& path, const TrackSet& tracks);
TrackSet load_tracks_csv(const std::filesystem::path& path);

// Metrics JSON: {integrity, continuity, precision (null when undefined),
//                idsw_total, matched_instants}
void save_metrics_json(const std::filesystem::path& path, const Metrics& m);

std::string metrics_to_json(const Metrics& m);

}  // namespace swarmtrack::io
