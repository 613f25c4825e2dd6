#pragma once
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "multitrack/geometry.hpp"
#include "multitrack/splicer.hpp"

namespace multitrack {

// Per-link baseline captured with no users present.
struct StaticProfile {
    std::string link_id;
    std::vector<cplx> taps;
};

// User-scene profile minus the static baseline.
struct MultiUserReflectionProfile {
    std::string link_id;
    double timestamp = 0.0;
    std::vector<cplx> taps;
};

// A delay-range slice attributed to (at most) one user.
struct ReflectionSegment {
    std::string link_id;
    double timestamp = 0.0;
    int m_start = 0;  // inclusive tap indices
    int m_end = 0;
    std::vector<cplx> taps;  // m_end - m_start + 1 entries
    std::optional<std::string> user_hint;
    bool flagged = false;  // set when close-proximity separation gave up

    double energy() const;
    double centroid_tap() const;  // energy-weighted, absolute tap units
};

MultiUserReflectionProfile static_subtract(const PowerDelayProfile& profile,
                                           const StaticProfile& baseline);

struct SegmentationConfig {
    int window = 3;         // sliding window, taps
    double threshold_k = 0.6;  // threshold = k * std of accumulated differentials
    int merge_gap = 1;      // marked runs closer than this merge
};

std::vector<ReflectionSegment> segment_profile(const MultiUserReflectionProfile& p,
                                               const SegmentationConfig& cfg = {});

// Max candidate count across links; a link with overlapped users undercounts,
// never overcounts.
int count_users(const std::vector<std::vector<ReflectionSegment>>& segments_per_link);

// Unit-energy magnitude shape of i users at separation j, averaged over
// randomized simulated poses; peak_offsets are per-user delay offsets (taps)
// relative to the window center.
struct ProximityTemplate {
    int users = 1;
    double separation_m = 0.0;
    std::vector<double> taps;  // 2*half_width+1, unit energy
    std::vector<int> peak_offsets;
    std::string provenance;
};

struct TemplateSimConfig {
    LinkGeometry link;
    Point2D region_min;
    Point2D region_max;
    int poses = 50;
    std::vector<double> separations = {0.1, 0.2, 0.3, 0.5, 1.0};
    int max_users = 3;
    int half_width = 8;
    std::uint64_t seed = 0x7e31;
};

std::vector<ProximityTemplate> build_proximity_templates(const TemplateSimConfig& cfg,
                                                         const SubcarrierGrid& grid,
                                                         const FourierMatrix& fourier,
                                                         const DelayGrid& delays);

void write_templates(std::ostream& os, const std::vector<ProximityTemplate>& templates);
std::vector<ProximityTemplate> read_templates(std::istream& is);

// Precomputed room sampling used to test whether a set of per-user delays on
// one link can be explained by positions consistent with the segments seen on
// every other link.
class ProximityContext {
  public:
    ProximityContext(std::vector<LinkGeometry> links, Point2D room_min, Point2D room_max,
                     DelayGrid delays, double sample_cell_m = 0.2, double tol_taps = 2.0);

    size_t link_count() const { return links_.size(); }
    const std::vector<LinkGeometry>& links() const { return links_; }

    bool delay_consistent(size_t link_index, double delay_s,
                          const std::vector<std::vector<ReflectionSegment>>& per_link) const;

  private:
    std::vector<LinkGeometry> links_;
    DelayGrid delays_;
    double tol_taps_;
    std::vector<std::vector<double>> tau_;  // [link][sample point]
};

// Template search over (i, j), restricted to geometrically consistent
// candidates; splits the segment at the template's peak offsets.
std::vector<ReflectionSegment> separate_close_proximity(
    const ReflectionSegment& seg, const std::vector<ProximityTemplate>& templates,
    const std::vector<std::vector<ReflectionSegment>>& cross_link, size_t link_index,
    const ProximityContext& ctx);

// Segment dump record: link_id timestamp then (m_start m_end energy) triples.
void write_segments_line(std::ostream& os, const std::string& link_id, double timestamp,
                         const std::vector<ReflectionSegment>& segments);

}  // namespace multitrack
