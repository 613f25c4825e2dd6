#include "multitrack/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace multitrack {

namespace {

// Weighted least-squares slope of unwrapped phase vs frequency.
double phase_slope(const std::vector<double>& freq, const std::vector<double>& phase,
                   const std::vector<double>& weight) {
    double wsum = 0.0, fmean = 0.0, pmean = 0.0;
    for (size_t i = 0; i < freq.size(); ++i) {
        wsum += weight[i];
        fmean += weight[i] * freq[i];
        pmean += weight[i] * phase[i];
    }
    if (wsum <= 0.0) return 0.0;
    fmean /= wsum;
    pmean /= wsum;
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < freq.size(); ++i) {
        num += weight[i] * (freq[i] - fmean) * (phase[i] - pmean);
        den += weight[i] * (freq[i] - fmean) * (freq[i] - fmean);
    }
    return den > 0.0 ? num / den : 0.0;
}

void unwrap_in_place(std::vector<double>& phase) {
    for (size_t i = 1; i < phase.size(); ++i) {
        double d = phase[i] - phase[i - 1];
        while (d > M_PI) {
            phase[i] -= 2.0 * M_PI;
            d = phase[i] - phase[i - 1];
        }
        while (d < -M_PI) {
            phase[i] += 2.0 * M_PI;
            d = phase[i] - phase[i - 1];
        }
    }
}

void rotate_channel(std::vector<cplx>& samples, int channel, double angle) {
    const cplx rot{std::cos(angle), std::sin(angle)};
    for (int i = 0; i < kSubcarriersPerChannel; ++i) {
        samples[static_cast<size_t>(channel) * kSubcarriersPerChannel + i] *= rot;
    }
}

void apply_slope(std::vector<cplx>& samples, const SubcarrierGrid& grid, double sigma_s) {
    for (size_t k = 0; k < samples.size(); ++k) {
        const double phase = -2.0 * M_PI * grid.frequencies[k] * sigma_s;
        samples[k] *= cplx{std::cos(phase), std::sin(phase)};
    }
}

}  // namespace

Calibrator::Calibrator(const SubcarrierGrid& grid, const FourierMatrix& fourier,
                       DelayGrid delays, double los_delay_s, int reference_channel)
    : grid_(grid),
      fourier_(fourier),
      delays_(delays),
      los_delay_s_(los_delay_s),
      reference_channel_(reference_channel) {
    if (reference_channel < 0 || reference_channel >= kChannels) {
        throw std::out_of_range("calibrator: reference channel out of range");
    }
}

CsiFrame Calibrator::average_amplitude(const std::vector<CsiFrame>& packets) {
    if (packets.empty()) throw std::invalid_argument("average_amplitude: no packets");
    CsiFrame out = packets.front();
    for (size_t p = 1; p < packets.size(); ++p) {
        if (packets[p].samples.size() != out.samples.size()) {
            throw std::invalid_argument("average_amplitude: sample count mismatch");
        }
        for (size_t k = 0; k < out.samples.size(); ++k) out.samples[k] += packets[p].samples[k];
    }
    const double inv = 1.0 / static_cast<double>(packets.size());
    for (cplx& s : out.samples) s *= inv;
    return out;
}

std::vector<double> Calibrator::estimate_packet_slopes(const std::vector<CsiFrame>& packets,
                                                       const SubcarrierGrid& grid) {
    std::vector<double> slopes(packets.size(), 0.0);
    if (packets.size() < 2) return slopes;
    const size_t n = packets.front().samples.size();
    std::vector<double> phase(n), weight(n);
    for (size_t p = 1; p < packets.size(); ++p) {
        for (size_t k = 0; k < n; ++k) {
            const cplx z = packets[p].samples[k] * std::conj(packets[0].samples[k]);
            phase[k] = std::arg(z);
            weight[k] = std::abs(z);
        }
        unwrap_in_place(phase);
        slopes[p] = phase_slope(grid.frequencies, phase, weight) / (2.0 * M_PI);
    }
    return slopes;
}

double Calibrator::align_packets(std::vector<CsiFrame>& packets, const SubcarrierGrid& grid) {
    if (packets.size() < 2) return 0.0;
    const std::vector<double> slopes = estimate_packet_slopes(packets, grid);
    double mean = 0.0;
    for (double s : slopes) mean += s;
    mean /= static_cast<double>(slopes.size());
    double var = 0.0;
    for (size_t p = 0; p < packets.size(); ++p) {
        const double excess = slopes[p] - mean;
        var += excess * excess;
        // packet phase grows as +2 pi f excess, so correction is the apply_slope sign
        apply_slope(packets[p].samples, grid, excess);
    }
    return std::sqrt(var / static_cast<double>(slopes.size()));
}

double Calibrator::estimate_apparent_delay(const CsiFrame& frame) const {
    std::vector<double> f(kSubcarriersPerChannel), phase(kSubcarriersPerChannel),
        w(kSubcarriersPerChannel);
    double tau_num = 0.0, tau_den = 0.0;
    for (int c = 0; c < kChannels; ++c) {
        double energy = 0.0;
        for (int i = 0; i < kSubcarriersPerChannel; ++i) {
            const size_t k = static_cast<size_t>(c) * kSubcarriersPerChannel + i;
            f[i] = grid_.frequencies[k];
            phase[i] = std::arg(frame.samples[k]);
            w[i] = std::norm(frame.samples[k]);
            energy += w[i];
        }
        if (energy <= 0.0) continue;
        unwrap_in_place(phase);
        const double tau_c = -phase_slope(f, phase, w) / (2.0 * M_PI);
        tau_num += energy * tau_c;
        tau_den += energy;
    }
    return tau_den > 0.0 ? tau_num / tau_den : 0.0;
}

std::array<double, kChannels> Calibrator::estimate_channel_phases(const CsiFrame& frame,
                                                                  double tau_eff) const {
    std::array<double, kChannels> phi{};
    for (int c = 0; c < kChannels; ++c) {
        cplx acc{0.0, 0.0};
        for (int i = 0; i < kSubcarriersPerChannel; ++i) {
            const size_t k = static_cast<size_t>(c) * kSubcarriersPerChannel + i;
            const double model_phase = -2.0 * M_PI * grid_.frequencies[k] * tau_eff;
            acc += frame.samples[k] * cplx{std::cos(model_phase), -std::sin(model_phase)};
        }
        phi[c] = std::arg(acc);
    }
    return phi;
}

CsiFrame Calibrator::compensate_constant_phase(const CsiFrame& frame,
                                               int reference_channel) const {
    if (reference_channel < 0 || reference_channel >= kChannels) {
        throw std::out_of_range("compensate_constant_phase: reference channel out of range");
    }
    const double tau_eff = estimate_apparent_delay(frame);
    const std::array<double, kChannels> phi = estimate_channel_phases(frame, tau_eff);
    CsiFrame out = frame;
    for (int c = 0; c < kChannels; ++c) {
        rotate_channel(out.samples, c, -(phi[c] - phi[reference_channel]));
    }
    return out;
}

namespace {

struct SlopeScore {
    double entropy;
    double anchor;  // LOS-aligned energy fraction
    double combined() const { return entropy - 2.0 * anchor; }
};

}  // namespace

double Calibrator::search_slope(const CsiFrame& frame) const {
    for (const cplx& s : frame.samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
            throw std::invalid_argument("search_slope: non-finite samples");
        }
    }
    const int n = static_cast<int>(frame.samples.size());
    const int m = delays_.taps;

    std::vector<double> hre(n), him(n);
    std::vector<double> dre(m), dim(m);

    auto score_at = [&](double sigma) -> SlopeScore {
        for (int k = 0; k < n; ++k) {
            const double phase = -2.0 * M_PI * grid_.frequencies[k] * sigma;
            const cplx v = frame.samples[k] * cplx{std::cos(phase), std::sin(phase)};
            hre[k] = v.real();
            him[k] = v.imag();
        }
        kernels::matvec(fourier_.adjoint, hre.data(), him.data(), dre.data(), dim.data());
        double total = 0.0;
        for (int j = 0; j < m; ++j) total += dre[j] * dre[j] + dim[j] * dim[j];
        SlopeScore s{0.0, 0.0};
        if (total <= 0.0) return s;
        for (int j = 0; j < m; ++j) {
            const double p = (dre[j] * dre[j] + dim[j] * dim[j]) / total;
            if (p > 0.0) s.entropy -= p * std::log(p);
        }
        // Dirty image evaluated at the exact LOS delay.
        double are = 0.0, aim = 0.0;
        for (int k = 0; k < n; ++k) {
            const double ph = 2.0 * M_PI * grid_.frequencies[k] * los_delay_s_;
            const double cr = std::cos(ph), ci = std::sin(ph);
            are += hre[k] * cr - him[k] * ci;
            aim += hre[k] * ci + him[k] * cr;
        }
        s.anchor = (are * are + aim * aim) / total;
        return s;
    };

    const double step = 0.5e-9;
    double best_sigma = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = -200; i <= 200; ++i) {
        const double sigma = i * step;
        const double sc = score_at(sigma).combined();
        if (sc < best) {
            best = sc;
            best_sigma = sigma;
        }
    }

    // Sub-step polish: golden-section on the LOS anchor within one grid step.
    double lo = best_sigma - step, hi = best_sigma + step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = -score_at(x1).anchor, f2 = -score_at(x2).anchor;
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = -score_at(x1).anchor;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = -score_at(x2).anchor;
        }
    }
    return 0.5 * (lo + hi);
}

CalibratedCsi Calibrator::correct_linear_phase(const CsiFrame& frame) const {
    const double sigma2 = search_slope(frame);
    CalibratedCsi out;
    out.link_id = frame.link_id;
    out.timestamp = frame.timestamp;
    out.samples = frame.samples;
    out.provenance.assign(kChannels, 1);
    apply_slope(out.samples, grid_, sigma2);
    return out;
}

CalibrationEstimate Calibrator::estimate(const CsiFrame& frame) const {
    CalibrationEstimate e;
    e.reference_channel = reference_channel_;
    e.tau_eff_s = estimate_apparent_delay(frame);
    const std::array<double, kChannels> phi = estimate_channel_phases(frame, e.tau_eff_s);
    for (int c = 0; c < kChannels; ++c) e.phi[c] = phi[c] - phi[reference_channel_];

    CsiFrame compensated = frame;
    for (int c = 0; c < kChannels; ++c) rotate_channel(compensated.samples, c, -e.phi[c]);
    e.sigma2_s = search_slope(compensated);
    return e;
}

CalibratedCsi Calibrator::apply(const CsiFrame& frame, const CalibrationEstimate& e,
                                std::vector<int> provenance) const {
    CalibratedCsi out;
    out.link_id = frame.link_id;
    out.timestamp = frame.timestamp;
    out.samples = frame.samples;
    out.provenance =
        provenance.empty() ? std::vector<int>(kChannels, 1) : std::move(provenance);
    for (int c = 0; c < kChannels; ++c) rotate_channel(out.samples, c, -e.phi[c]);
    apply_slope(out.samples, grid_, e.sigma2_s);
    return out;
}

CalibratedCsi Calibrator::calibrate_sweep(std::vector<CsiFrame> packets,
                                          CalibrationReport* report) const {
    const double sigma1 = align_packets(packets, grid_);
    const CsiFrame avg = average_amplitude(packets);
    const CalibrationEstimate e = estimate(avg);
    CalibratedCsi out =
        apply(avg, e, std::vector<int>(kChannels, static_cast<int>(packets.size())));
    if (report) {
        report->link_id = out.link_id;
        report->timestamp = out.timestamp;
        report->sigma1_s = sigma1;
        report->sigma2_s = e.sigma2_s;
        report->phi = e.phi;
    }
    return out;
}

CalibratedCsi Calibrator::calibrate_sweep_with(const CalibrationEstimate& e,
                                               std::vector<CsiFrame> packets,
                                               CalibrationReport* report) const {
    const double sigma1 = align_packets(packets, grid_);
    const CsiFrame avg = average_amplitude(packets);
    CalibratedCsi out =
        apply(avg, e, std::vector<int>(kChannels, static_cast<int>(packets.size())));
    if (report) {
        report->link_id = out.link_id;
        report->timestamp = out.timestamp;
        report->sigma1_s = sigma1;
        report->sigma2_s = e.sigma2_s;
        report->phi = e.phi;
    }
    return out;
}

void write_calibration_report_line(std::ostream& os, const CalibrationReport& r) {
    char buf[64];
    std::string line = r.link_id;
    std::snprintf(buf, sizeof(buf), " %.9g %.6g %.6g", r.timestamp, r.sigma1_s, r.sigma2_s);
    line += buf;
    for (double p : r.phi) {
        std::snprintf(buf, sizeof(buf), " %.6g", p);
        line += buf;
    }
    line += '\n';
    os << line;
}

}  // namespace multitrack
