#include "multitrack/kernels.hpp"

#include <cmath>

namespace multitrack::kernels {

namespace {
inline void matvec_row(const ZMat& a, int r, const double* xre, const double* xim,
                       double* yre, double* yim) {
    const size_t off = static_cast<size_t>(r) * a.cols;
    const double* are = a.re.data() + off;
    const double* aim = a.im.data() + off;
    double sr = 0.0, si = 0.0;
    for (int c = 0; c < a.cols; ++c) {
        sr += are[c] * xre[c] - aim[c] * xim[c];
        si += are[c] * xim[c] + aim[c] * xre[c];
    }
    yre[r] = sr;
    yim[r] = si;
}
}  // namespace

void matvec(const ZMat& a, const double* xre, const double* xim, double* yre, double* yim) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < a.rows; ++r) matvec_row(a, r, xre, xim, yre, yim);
}

void matvec_serial(const ZMat& a, const double* xre, const double* xim, double* yre,
                   double* yim) {
    for (int r = 0; r < a.rows; ++r) matvec_row(a, r, xre, xim, yre, yim);
}

double gram_spectral_bound(const ZMat& a, const ZMat& ah, int iters) {
    const int m = a.cols;
    const int n = a.rows;
    std::vector<double> vre(m, 1.0 / std::sqrt(double(m))), vim(m, 0.0);
    std::vector<double> ure(n), uim(n), wre(m), wim(m);
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        matvec(a, vre.data(), vim.data(), ure.data(), uim.data());
        matvec(ah, ure.data(), uim.data(), wre.data(), wim.data());
        double nrm = 0.0;
        for (int i = 0; i < m; ++i) nrm += wre[i] * wre[i] + wim[i] * wim[i];
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        lambda = nrm;  // ||A^H A v|| with ||v|| = 1
        for (int i = 0; i < m; ++i) {
            vre[i] = wre[i] / nrm;
            vim[i] = wim[i] / nrm;
        }
    }
    return lambda * 1.05;
}

void fft_pow2(std::complex<double>* data, int n, int sign) {
    // bit reversal
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / len;
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                std::complex<double> u = data[i + k];
                std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

namespace {
inline double paint_cell(double tau, double tap_spacing, const std::vector<double>& tap_power,
                         int m_start, int m_end) {
    const double x = tau / tap_spacing;
    const int m0 = static_cast<int>(std::floor(x));
    if (m0 < m_start || m0 + 1 > m_end) return 0.0;
    const double a = x - m0;
    return (1.0 - a) * tap_power[m0] + a * tap_power[m0 + 1];
}
}  // namespace

void paint_delay_band(const std::vector<double>& tau, double tap_spacing,
                      const std::vector<double>& tap_power, int m_start, int m_end,
                      std::vector<double>& out_accum) {
    const long n = static_cast<long>(tau.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        out_accum[i] += paint_cell(tau[i], tap_spacing, tap_power, m_start, m_end);
    }
}

void paint_delay_band_serial(const std::vector<double>& tau, double tap_spacing,
                             const std::vector<double>& tap_power, int m_start, int m_end,
                             std::vector<double>& out_accum) {
    const long n = static_cast<long>(tau.size());
    for (long i = 0; i < n; ++i) {
        out_accum[i] += paint_cell(tau[i], tap_spacing, tap_power, m_start, m_end);
    }
}

void overlay_multiply(std::vector<double>& acc, const std::vector<double>& v, double scale,
                      double eps) {
    const long n = static_cast<long>(acc.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) acc[i] *= eps + v[i] * scale;
}

void overlay_multiply_serial(std::vector<double>& acc, const std::vector<double>& v,
                             double scale, double eps) {
    const long n = static_cast<long>(acc.size());
    for (long i = 0; i < n; ++i) acc[i] *= eps + v[i] * scale;
}

}  // namespace multitrack::kernels
