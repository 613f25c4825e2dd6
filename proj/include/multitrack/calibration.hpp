#pragma once
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "multitrack/csi.hpp"
#include "multitrack/splicer.hpp"
#include "multitrack/subcarriers.hpp"

namespace multitrack {

// Spliceable measurement vector: one amplitude-averaged, phase-corrected
// sample set per sweep.
struct CalibratedCsi {
    std::string link_id;
    double timestamp = 0.0;
    std::vector<cplx> samples;
    std::vector<int> provenance;  // contributing packet count per channel
};

struct CalibrationEstimate {
    double tau_eff_s = 0.0;  // apparent dominant-path delay before slope removal
    std::array<double, kChannels> phi{};  // offsets relative to the reference channel
    double sigma2_s = 0.0;                // common linear slope
    int reference_channel = 0;
};

struct CalibrationReport {
    std::string link_id;
    double timestamp = 0.0;
    double sigma1_s = 0.0;  // rms per-packet timing scatter removed before averaging
    double sigma2_s = 0.0;
    std::array<double, kChannels> phi{};
};

// Removes the injected impairments in three steps: packet slope alignment
// (part-1), per-channel constant phase against a dominant-path model, and a
// grid-searched common slope (part-2) anchored at the geometric LOS delay.
//
// All impairments are constant over a trace, so the pipeline estimates once
// (on the static capture) and applies the stored constants to every sweep.
class Calibrator {
  public:
    Calibrator(const SubcarrierGrid& grid, const FourierMatrix& fourier, DelayGrid delays,
               double los_delay_s, int reference_channel = 0);

    // Per-subcarrier complex mean across the packets of one sweep.
    static CsiFrame average_amplitude(const std::vector<CsiFrame>& packets);

    // Relative timing of each packet vs packet 0, from the phase slope of
    // h_p . conj(h_0) across the whole grid.
    static std::vector<double> estimate_packet_slopes(const std::vector<CsiFrame>& packets,
                                                      const SubcarrierGrid& grid);

    // Aligns every packet to the mean slope in place; returns the rms scatter
    // that was removed (the sigma1 estimate).
    static double align_packets(std::vector<CsiFrame>& packets, const SubcarrierGrid& grid);

    CsiFrame compensate_constant_phase(const CsiFrame& frame, int reference_channel) const;

    // Part-2 slope: 1-D grid search in [-100, +100] ns (0.5 ns step) scored by
    // delay-domain entropy with an LOS-alignment bonus, then a sub-step polish.
    // Expects constant phase to be compensated already.
    CalibratedCsi correct_linear_phase(const CsiFrame& frame) const;

    CalibrationEstimate estimate(const CsiFrame& frame) const;
    CalibratedCsi apply(const CsiFrame& frame, const CalibrationEstimate& e,
                        std::vector<int> provenance = {}) const;

    // align -> average -> estimate -> apply, reporting per-sweep constants.
    CalibratedCsi calibrate_sweep(std::vector<CsiFrame> packets,
                                  CalibrationReport* report = nullptr) const;
    // Same, but with previously estimated constants (the per-trace fast path).
    CalibratedCsi calibrate_sweep_with(const CalibrationEstimate& e,
                                       std::vector<CsiFrame> packets,
                                       CalibrationReport* report = nullptr) const;

    double estimate_apparent_delay(const CsiFrame& frame) const;
    std::array<double, kChannels> estimate_channel_phases(const CsiFrame& frame,
                                                          double tau_eff) const;
    double search_slope(const CsiFrame& frame) const;

    double los_delay() const { return los_delay_s_; }

  private:
    const SubcarrierGrid& grid_;
    const FourierMatrix& fourier_;
    DelayGrid delays_;
    double los_delay_s_;
    int reference_channel_;
};

void write_calibration_report_line(std::ostream& os, const CalibrationReport& r);

}  // namespace multitrack
