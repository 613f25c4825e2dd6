#include "multitrack/splicer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace multitrack {

int DelayGrid::nearest_tap(double delay_s) const {
    int m = static_cast<int>(std::lround(delay_s / tap_spacing_s));
    return std::clamp(m, 0, taps - 1);
}

FourierMatrix build_fourier_matrix(const SubcarrierGrid& grid, const DelayGrid& delays) {
    if (grid.frequencies.empty() || delays.taps <= 0) {
        throw std::invalid_argument("build_fourier_matrix: empty grid");
    }
    FourierMatrix f;
    const int n = static_cast<int>(grid.frequencies.size());
    const int m = delays.taps;
    f.forward.resize(n, m);
    f.adjoint.resize(m, n);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < m; ++j) {
            const double phase = -2.0 * M_PI * grid.frequencies[k] * delays.delay_of(j);
            const double re = std::cos(phase), im = std::sin(phase);
            f.forward.re[static_cast<size_t>(k) * m + j] = re;
            f.forward.im[static_cast<size_t>(k) * m + j] = im;
            f.adjoint.re[static_cast<size_t>(j) * n + k] = re;
            f.adjoint.im[static_cast<size_t>(j) * n + k] = -im;
        }
    }
    f.gram_bound = kernels::gram_spectral_bound(f.forward, f.adjoint);
    return f;
}

namespace {

void split(const std::vector<cplx>& v, std::vector<double>& re, std::vector<double>& im) {
    re.resize(v.size());
    im.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        re[i] = v[i].real();
        im[i] = v[i].imag();
    }
}

}  // namespace

PowerDelayProfile solve_inverse_ndft(const std::vector<cplx>& c, const FourierMatrix& f,
                                     const SolverConfig& cfg, const std::vector<cplx>* warm,
                                     std::vector<double>* objective_out) {
    const int n = f.forward.rows;
    const int m = f.forward.cols;
    if (static_cast<int>(c.size()) != n) {
        throw std::invalid_argument("solve_inverse_ndft: measurement size mismatch");
    }
    auto mv = cfg.serial ? kernels::matvec_serial : kernels::matvec;

    std::vector<double> cre, cim;
    split(c, cre, cim);
    double cnorm2 = 0.0;
    for (int k = 0; k < n; ++k) cnorm2 += cre[k] * cre[k] + cim[k] * cim[k];
    const double cnorm = std::sqrt(cnorm2);

    PowerDelayProfile out;
    out.taps.assign(m, cplx{0.0, 0.0});
    if (cnorm == 0.0) return out;

    // lambda from the adjoint image of the data.
    std::vector<double> gre(m, 0.0), gim(m, 0.0);
    std::vector<double> tre(m), tim(m);
    mv(f.adjoint, cre.data(), cim.data(), tre.data(), tim.data());
    double linf = 0.0;
    for (int j = 0; j < m; ++j) linf = std::max(linf, std::hypot(tre[j], tim[j]));
    const double lambda = cfg.lambda_scale * linf;

    std::vector<double> w(m, 1.0);
    if (cfg.los_tap >= 0 && cfg.los_tap < m) w[cfg.los_tap] = cfg.los_weight;

    if (warm && static_cast<int>(warm->size()) == m) {
        for (int j = 0; j < m; ++j) {
            gre[j] = (*warm)[j].real();
            gim[j] = (*warm)[j].imag();
        }
    }

    const double eta = 1.0 / f.gram_bound;
    std::vector<double> rre(n), rim(n);
    double rnorm2 = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        // residual r = F g - c
        mv(f.forward, gre.data(), gim.data(), rre.data(), rim.data());
        rnorm2 = 0.0;
        for (int k = 0; k < n; ++k) {
            rre[k] -= cre[k];
            rim[k] -= cim[k];
            rnorm2 += rre[k] * rre[k] + rim[k] * rim[k];
        }
        if (objective_out) {
            double l1 = 0.0;
            for (int j = 0; j < m; ++j) l1 += w[j] * std::hypot(gre[j], gim[j]);
            objective_out->push_back(0.5 * rnorm2 + lambda * l1);
        }

        mv(f.adjoint, rre.data(), rim.data(), tre.data(), tim.data());

        double diff2 = 0.0, old2 = 0.0;
        for (int j = 0; j < m; ++j) {
            const double vre = gre[j] - eta * tre[j];
            const double vim = gim[j] - eta * tim[j];
            const double thr = eta * lambda * w[j];
            const double mag = std::hypot(vre, vim);
            double nre = 0.0, nim = 0.0;
            if (mag > thr) {
                const double scale = 1.0 - thr / mag;
                nre = vre * scale;
                nim = vim * scale;
            }
            const double dre = nre - gre[j], dim = nim - gim[j];
            diff2 += dre * dre + dim * dim;
            old2 += gre[j] * gre[j] + gim[j] * gim[j];
            gre[j] = nre;
            gim[j] = nim;
        }
        if (std::sqrt(diff2) <= cfg.tol * std::max(std::sqrt(old2), 1e-30)) {
            converged = true;
            ++it;
            break;
        }
    }

    // final residual for the returned iterate
    mv(f.forward, gre.data(), gim.data(), rre.data(), rim.data());
    rnorm2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double dr = rre[k] - cre[k], di = rim[k] - cim[k];
        rnorm2 += dr * dr + di * di;
    }

    for (int j = 0; j < m; ++j) out.taps[j] = cplx{gre[j], gim[j]};
    out.residual = std::sqrt(rnorm2) / cnorm;
    out.iterations = it;
    out.converged = converged;
    return out;
}

std::vector<double> magnitude_profile(const PowerDelayProfile& g) {
    std::vector<double> p(g.taps.size());
    for (size_t i = 0; i < g.taps.size(); ++i) p[i] = std::norm(g.taps[i]);
    return p;
}

void write_profile_line(std::ostream& os, const PowerDelayProfile& p) {
    std::string line;
    line.reserve(48 + p.taps.size() * 26);
    char buf[64];
    line += p.link_id;
    std::snprintf(buf, sizeof(buf), " %.9g %.9g", p.timestamp, p.residual);
    line += buf;
    for (const cplx& t : p.taps) {
        std::snprintf(buf, sizeof(buf), " %.9g %.9g", t.real(), t.imag());
        line += buf;
    }
    line += '\n';
    os << line;
}

bool read_profile_line(std::istream& is, PowerDelayProfile& p, int taps) {
    std::string line;
    do {
        if (!std::getline(is, line)) return false;
    } while (line.empty());
    const size_t sp = line.find(' ');
    if (sp == std::string::npos) throw std::runtime_error("profile record: malformed line");
    p.link_id = line.substr(0, sp);
    const char* ptr = line.c_str() + sp;
    char* end = nullptr;
    p.timestamp = std::strtod(ptr, &end);
    if (end == ptr) throw std::runtime_error("profile record: missing timestamp");
    ptr = end;
    p.residual = std::strtod(ptr, &end);
    if (end == ptr) throw std::runtime_error("profile record: missing residual");
    ptr = end;
    p.taps.clear();
    p.taps.reserve(taps);
    while (true) {
        const double re = std::strtod(ptr, &end);
        if (end == ptr) break;
        ptr = end;
        const double im = std::strtod(ptr, &end);
        if (end == ptr) throw std::runtime_error("profile record: dangling real part");
        ptr = end;
        p.taps.emplace_back(re, im);
    }
    if (static_cast<int>(p.taps.size()) != taps) {
        throw std::runtime_error("profile record: wrong tap count");
    }
    return true;
}

}  // namespace multitrack
