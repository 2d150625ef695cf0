#include "swarmtrack/association.hpp"

#include <algorithm>
#include <cmath>

namespace swarmtrack {

Pixel Measurement::centroid_of(const PixelSet& pixels) {
    std::int64_t su = 0;
    std::int64_t sv = 0;
    for (const PixelKey key : pixels) {
        const PixelCoord p = unpack_pixel(key);
        su += p.u;
        sv += p.v;
    }
    const double n = static_cast<double>(pixels.size());
    return Pixel{static_cast<double>(su) / n, static_cast<double>(sv) / n};
}

double overlap_ratio(const PixelSet& projected, const Measurement& m) {
    if (m.pixels.empty())
        throw ContractViolation("overlap_ratio: measurement has no pixels");
    const std::size_t common = pixel_intersection_count(projected, m.pixels);
    return static_cast<double>(common) / static_cast<double>(m.pixels.size());
}

double ncc(const Patch& a, const Patch& b) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionMismatch("ncc: patch dimensions differ");
    const std::size_t n = a.data.size();
    if (n == 0) return 0.0;
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a.data[i];
        mean_b += b.data[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a.data[i] - mean_a;
        const double db = b.data[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) return 0.0;  // flat patch convention
    return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

double view_similarity(const PixelSet& state_projection, const Measurement& m,
                       const Measurement* prev) {
    const double eta = overlap_ratio(state_projection, m);
    double appearance = 1.0;
    if (prev != nullptr && !m.patch.empty() && !prev->patch.empty())
        appearance = std::max(0.0, ncc(m.patch, prev->patch));
    return std::clamp(eta * appearance, 0.0, 1.0);
}

double credibility(const std::vector<double>& taus) {
    double exponent = 0.0;
    for (const double tau : taus) exponent += tau - 1.0;
    return std::exp(exponent);
}

CandidateGroup candidate_groups(
    const std::vector<PixelSet>& projections,
    const std::vector<std::vector<Measurement>>& frame_measurements,
    const std::vector<const Measurement*>& prev) {
    const std::size_t n_views = frame_measurements.size();
    if (projections.size() != n_views)
        throw ContractViolation(
            "candidate_groups: one projection per view required");

    // Per view: measurements with positive overlap and their similarities.
    std::vector<std::vector<std::pair<int, double>>> per_view(n_views);
    for (std::size_t v = 0; v < n_views; ++v) {
        const Measurement* prev_m =
            v < prev.size() ? prev[v] : nullptr;
        for (const Measurement& m : frame_measurements[v]) {
            if (overlap_ratio(projections[v], m) <= 0.0) continue;
            per_view[v].emplace_back(
                m.id, view_similarity(projections[v], m, prev_m));
        }
        if (per_view[v].empty()) return CandidateGroup{};  // no association
    }

    // Cartesian product in lexicographic index order.
    CandidateGroup group;
    std::vector<std::size_t> cursor(n_views, 0);
    std::vector<double> taus(n_views);
    for (;;) {
        CandidateAssociation c;
        c.indices.resize(n_views);
        for (std::size_t v = 0; v < n_views; ++v) {
            c.indices[v] = per_view[v][cursor[v]].first;
            taus[v] = per_view[v][cursor[v]].second;
        }
        c.credibility = credibility(taus);
        group.candidates.push_back(std::move(c));

        std::size_t v = n_views;
        while (v > 0) {
            --v;
            if (++cursor[v] < per_view[v].size()) break;
            cursor[v] = 0;
            if (v == 0) return group;
        }
    }
}

const CandidateAssociation* best_candidate(const CandidateGroup& g) {
    const CandidateAssociation* best = nullptr;
    for (const CandidateAssociation& c : g.candidates) {
        if (best == nullptr || c.credibility > best->credibility) best = &c;
    }
    return best;
}

ViewIndex::ViewIndex(const std::vector<Measurement>& blobs) {
    std::size_t total = 0;
    for (const Measurement& m : blobs) total += m.pixels.size();
    pixel_to_blob_.reserve(total * 2);
    blob_sizes_.reserve(blobs.size());
    for (const Measurement& m : blobs) {
        blob_sizes_.push_back(static_cast<int>(m.pixels.size()));
        for (const PixelKey key : m.pixels) pixel_to_blob_.emplace(key, m.id);
    }
}

void ViewIndex::overlaps(const PixelSet& disc,
                         std::vector<std::pair<int, int>>& hits) const {
    hits.clear();
    for (const PixelKey key : disc) {
        const auto it = pixel_to_blob_.find(key);
        if (it == pixel_to_blob_.end()) continue;
        const int blob = it->second;
        bool found = false;
        for (auto& [id, count] : hits) {
            if (id == blob) {
                ++count;
                found = true;
                break;
            }
        }
        if (!found) hits.emplace_back(blob, 1);
    }
    std::sort(hits.begin(), hits.end());
}

void FrameData::build_indexes() {
    indexes.clear();
    indexes.reserve(views.size());
    for (const auto& blobs : views) indexes.emplace_back(blobs);
}

}  // namespace swarmtrack
