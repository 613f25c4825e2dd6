#pragma once
#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "multitrack/kernels.hpp"
#include "multitrack/subcarriers.hpp"

namespace multitrack {

using cplx = std::complex<double>;

// Uniform delay axis for the spliced profile: 5 ns taps over [0, 500 ns].
struct DelayGrid {
    double tap_spacing_s = 5e-9;
    int taps = 101;

    double delay_of(int m) const { return m * tap_spacing_s; }
    int nearest_tap(double delay_s) const;
};

// F[k][m] = exp(-j 2 pi f_k tau_m), plus its conjugate transpose so both
// directions run as row-major matvecs. Immutable once built; shared freely.
struct FourierMatrix {
    kernels::ZMat forward;   // 720 x 101
    kernels::ZMat adjoint;   // 101 x 720, conjugated
    double gram_bound = 0.0;  // >= largest eigenvalue of F^H F

    cplx at(int k, int m) const {
        return {forward.re[static_cast<size_t>(k) * forward.cols + m],
                forward.im[static_cast<size_t>(k) * forward.cols + m]};
    }
};

FourierMatrix build_fourier_matrix(const SubcarrierGrid& grid, const DelayGrid& delays);

struct PowerDelayProfile {
    std::string link_id;
    double timestamp = 0.0;
    std::vector<cplx> taps;   // DelayGrid::taps entries
    double residual = 0.0;    // ||c - F g|| / ||c||
    int iterations = 0;
    bool converged = true;
};

struct SolverConfig {
    double lambda_scale = 0.05;  // lambda = lambda_scale * max |F^H c|
    double los_weight = 0.1;     // l1 weight at the LOS tap
    int los_tap = -1;            // < 0: no LOS prior
    int max_iters = 500;
    double tol = 1e-6;           // relative iterate change
    bool track_objective = false;
    bool serial = false;         // reference path for kernel-equivalence tests
};

// Weighted-l1 proximal gradient (ISTA) for min 0.5 ||c - F g||^2 + lambda sum w|g|.
// warm, when given, seeds the iterate. objective_out, when asked for, records
// the composite objective at each iterate.
PowerDelayProfile solve_inverse_ndft(const std::vector<cplx>& c, const FourierMatrix& f,
                                     const SolverConfig& cfg,
                                     const std::vector<cplx>* warm = nullptr,
                                     std::vector<double>* objective_out = nullptr);

std::vector<double> magnitude_profile(const PowerDelayProfile& g);

// Profile dump record: link_id timestamp residual then 101 (re, im) pairs.
void write_profile_line(std::ostream& os, const PowerDelayProfile& p);
bool read_profile_line(std::istream& is, PowerDelayProfile& p, int taps);

}  // namespace multitrack
