#pragma once

#include <unordered_map>
#include <vector>

#include "swarmtrack/errors.hpp"
#include "swarmtrack/types.hpp"

namespace swarmtrack {

/// Fixed-size grayscale appearance window. Empty in simulation mode.
struct Patch {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    bool empty() const { return data.empty(); }
};

/// One per-view, per-frame pixel blob.
struct Measurement {
    int view_id = 0;
    int frame = 0;
    int id = 0;  // index within (view, frame)
    PixelSet pixels;
    Pixel centroid;
    Patch patch;

    /// Centroid of the pixel set (exact integer sums, then divide).
    static Pixel centroid_of(const PixelSet& pixels);
};

/// One per-view tuple of measurement indices with its credibility weight.
struct CandidateAssociation {
    std::vector<int> indices;  // one measurement index per view
    double credibility = 0.0;
};

/// All potential associations for one predicted state.
struct CandidateGroup {
    std::vector<CandidateAssociation> candidates;

    bool empty() const { return candidates.empty(); }
};

/// |projected n m.pixels| / |m.pixels|, in [0, 1].
double overlap_ratio(const PixelSet& projected, const Measurement& m);

/// Zero-mean normalized cross-correlation in [-1, 1]; 0 by convention when
/// either patch has zero variance. Throws DimensionMismatch on unequal
/// patch dimensions.
double ncc(const Patch& a, const Patch& b);

/// Per-view similarity: overlap ratio times the appearance term, clamped to
/// [0, 1]. The appearance term is ncc(m.patch, prev->patch) clamped at 0,
/// or 1 when either patch is absent (simulation mode).
double view_similarity(const PixelSet& state_projection, const Measurement& m,
                       const Measurement* prev);

/// Credibility of a candidate association: prod_v exp(tau_v - 1).
double credibility(const std::vector<double>& taus);

/// Cartesian product over views of the measurements whose overlap ratio with
/// the state projection is positive, each candidate scored by credibility.
/// `prev` supplies the previously associated measurement per view for the
/// appearance term (entries may be null). An empty group signals that no
/// association exists.
CandidateGroup candidate_groups(
    const std::vector<PixelSet>& projections,
    const std::vector<std::vector<Measurement>>& frame_measurements,
    const std::vector<const Measurement*>& prev);

/// Candidate with the highest credibility; ties broken by the smallest index
/// tuple in lexicographic order. Returns nullptr for an empty group.
const CandidateAssociation* best_candidate(const CandidateGroup& g);

/// Read-only per-view occupancy index over one frame's blobs, for counting
/// disc/blob overlaps without scanning every measurement.
class ViewIndex {
public:
    ViewIndex() = default;
    explicit ViewIndex(const std::vector<Measurement>& blobs);

    /// Appends (blob index, |disc n blob|) pairs for every blob the disc
    /// touches. `hits` is cleared first and may be reused between calls.
    /// Const and allocation-free on the index side, so many trackers can
    /// query one index concurrently.
    void overlaps(const PixelSet& disc,
                  std::vector<std::pair<int, int>>& hits) const;

    int blob_size(int id) const { return blob_sizes_[id]; }

private:
    std::unordered_map<PixelKey, int> pixel_to_blob_;
    std::vector<int> blob_sizes_;
};

/// One frame of measurements across all views, plus occupancy indexes.
struct FrameData {
    int frame = 0;
    std::vector<std::vector<Measurement>> views;
    std::vector<ViewIndex> indexes;

    void build_indexes();
};

}  // namespace swarmtrack
