#pragma once
#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "multitrack/geometry.hpp"
#include "multitrack/subcarriers.hpp"

namespace multitrack {

using cplx = std::complex<double>;

// Channel samples for one link and one full channel sweep. With several
// packets per channel, a sweep yields one frame per packet index.
struct CsiFrame {
    std::string link_id;
    double timestamp = 0.0;  // seconds
    double snr_db = std::numeric_limits<double>::infinity();
    std::vector<cplx> samples;  // kGridSize entries, grid order

    // Bookkeeping, not part of the wire format.
    long sweep_index = 0;
    int packet_index = 0;
};

// Hardware error model injected on top of clean synthesis. All draws are
// keyed by (seed, link, sweep, packet), so traces are reproducible no matter
// how frames are scheduled.
struct ImpairmentModel {
    std::array<double, kChannels> channel_phase_rad{};  // constant per-channel offsets
    double noise_rel_std = 0.0;      // complex noise std relative to clean RMS
    double packet_jitter_std_s = 0.0;  // part-1 slope: per-packet timing scatter
    double trace_slope_s = 0.0;        // part-2 slope: common to the whole trace
    int packets_per_sweep = 1;         // jitter draws are centered within a sweep
    std::uint64_t seed = 0;

    static ImpairmentModel none();
    // Random offsets in (-pi, pi], slope drawn in +-50 ns, jitter 0.2 ns.
    static ImpairmentModel random(std::uint64_t seed, double snr_db,
                                  int packets_per_sweep = 3);

    double snr_db() const;
};

struct SweepSchedule {
    double hop_delay_s = 0.2e-3;
    int packets_per_channel = 3;
    double sweep_period_s = 5e-3;       // 200 Hz profile rate
    double coherence_budget_s = 0.2;

    void validate() const;  // throws if the sweep cannot fit the coherence budget
};

// samples[k] = a_los exp(-j 2 pi f_k tau_los) + sum_l a_l exp(-j 2 pi f_k tau_l)
// with amplitudes scaled by 1/(path length)^2; LOS reflectivity is 1 * los_gain.
CsiFrame synthesize_clean(const std::vector<ReflectorState>& reflectors,
                          const LinkGeometry& link, const SubcarrierGrid& grid,
                          double los_gain = 1.0);

// Per-channel phase offsets + linear slopes + complex Gaussian noise.
CsiFrame apply_impairments(const CsiFrame& frame, const ImpairmentModel& m);

using FrameSink = std::function<void(const CsiFrame&)>;

// One clean frame per (link, sweep) fanned out into packets_per_channel
// impaired frames. Emission order: link-major, then timestamp, then packet.
void run_trace(const Scenario& s, const SweepSchedule& schedule, const ImpairmentModel& m,
               const SubcarrierGrid& grid, const FrameSink& sink);
std::vector<CsiFrame> run_trace(const Scenario& s, const SweepSchedule& schedule,
                                const ImpairmentModel& m, const SubcarrierGrid& grid);

// Normative trace record: link_id timestamp_s snr_db then 720 (re, im) pairs,
// whitespace separated, one frame per line.
void write_trace_line(std::ostream& os, const CsiFrame& frame);
bool read_trace_line(std::istream& is, CsiFrame& frame);

}  // namespace multitrack
