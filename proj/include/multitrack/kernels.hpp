#pragma once
#include <complex>
#include <cstddef>
#include <vector>

// Hot inner loops, each in two flavors: an OpenMP version used by the pipeline
// and a serial reference used by the tests and the kernel benchmark. Both
// flavors compute every output element with identical arithmetic, so results
// match bit for bit at any thread count.
namespace multitrack::kernels {

// Dense complex matrix, row-major, split re/im planes.
struct ZMat {
    int rows = 0;
    int cols = 0;
    std::vector<double> re;
    std::vector<double> im;

    void resize(int r, int c) {
        rows = r;
        cols = c;
        re.assign(static_cast<size_t>(r) * c, 0.0);
        im.assign(static_cast<size_t>(r) * c, 0.0);
    }
};

// y = A x
void matvec(const ZMat& a, const double* xre, const double* xim, double* yre, double* yim);
void matvec_serial(const ZMat& a, const double* xre, const double* xim, double* yre,
                   double* yim);

// Largest eigenvalue of A^H A via power iteration on (A, A^H); `ah` must hold
// the conjugate transpose of `a`. Returned value carries a 5% safety margin so
// 1/L stays a valid proximal-gradient step.
double gram_spectral_bound(const ZMat& a, const ZMat& ah, int iters = 100);

// In-place radix-2 FFT, n a power of two; sign = -1 forward, +1 inverse
// (inverse is unscaled).
void fft_pow2(std::complex<double>* data, int n, int sign);

// Heatmap painting: out[i] = linear interpolation of tap_power at
// tau[i]/tap_spacing, restricted to tap indices [m_start, m_end]; zero outside.
void paint_delay_band(const std::vector<double>& tau, double tap_spacing,
                      const std::vector<double>& tap_power, int m_start, int m_end,
                      std::vector<double>& out_accum);
void paint_delay_band_serial(const std::vector<double>& tau, double tap_spacing,
                             const std::vector<double>& tap_power, int m_start, int m_end,
                             std::vector<double>& out_accum);

// Per-cell product accumulation used by the heatmap overlay:
// acc[i] *= (eps + v[i] * scale).
void overlay_multiply(std::vector<double>& acc, const std::vector<double>& v, double scale,
                      double eps);
void overlay_multiply_serial(std::vector<double>& acc, const std::vector<double>& v,
                             double scale, double eps);

}  // namespace multitrack::kernels
