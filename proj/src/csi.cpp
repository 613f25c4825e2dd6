#include "multitrack/csi.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "multitrack/rng.hpp"

namespace multitrack {

ImpairmentModel ImpairmentModel::none() { return ImpairmentModel{}; }

ImpairmentModel ImpairmentModel::random(std::uint64_t seed, double snr_db,
                                        int packets_per_sweep) {
    ImpairmentModel m;
    m.seed = seed;
    m.packets_per_sweep = packets_per_sweep;
    m.noise_rel_std = std::pow(10.0, -snr_db / 20.0);
    m.packet_jitter_std_s = 0.2e-9;
    Rng rng(derive_key(seed, 0x70686173ULL));
    for (int c = 0; c < kChannels; ++c) m.channel_phase_rad[c] = rng.uniform(-M_PI, M_PI);
    m.trace_slope_s = rng.uniform(-50e-9, 50e-9);
    return m;
}

double ImpairmentModel::snr_db() const {
    return noise_rel_std > 0.0 ? -20.0 * std::log10(noise_rel_std)
                               : std::numeric_limits<double>::infinity();
}

void SweepSchedule::validate() const {
    if (hop_delay_s <= 0.0 || sweep_period_s <= 0.0 || packets_per_channel < 1) {
        throw std::invalid_argument("schedule: fields must be positive");
    }
    if (kChannels * hop_delay_s * packets_per_channel > coherence_budget_s) {
        throw std::invalid_argument("schedule: sweep exceeds the coherence budget");
    }
    if (sweep_period_s + 1e-12 < kChannels * hop_delay_s) {
        throw std::invalid_argument("schedule: sweep period shorter than one hop cycle");
    }
}

CsiFrame synthesize_clean(const std::vector<ReflectorState>& reflectors,
                          const LinkGeometry& link, const SubcarrierGrid& grid,
                          double los_gain) {
    CsiFrame frame;
    frame.link_id = link.link_id;
    frame.samples.assign(grid.frequencies.size(), cplx{0.0, 0.0});

    struct Path {
        double amplitude;
        double delay;
    };
    std::vector<Path> paths;
    paths.reserve(reflectors.size() + 1);

    const double d_los = distance(link.tx, link.rx);
    paths.push_back({los_gain / (d_los * d_los), d_los / kSpeedOfLight});

    for (const ReflectorState& r : reflectors) {
        const double d1 = distance(link.tx, r.position);
        const double d2 = distance(r.position, link.rx);
        if (d1 < 1e-9 || d2 < 1e-9) {
            throw std::invalid_argument("synthesize_clean: reflector coincides with tx or rx");
        }
        const double total = d1 + d2;
        paths.push_back({r.reflectivity / (total * total), total / kSpeedOfLight});
    }

    const size_t n = grid.frequencies.size();
    for (const Path& p : paths) {
        for (size_t k = 0; k < n; ++k) {
            const double phase = -2.0 * M_PI * grid.frequencies[k] * p.delay;
            frame.samples[k] += cplx{p.amplitude * std::cos(phase),
                                     p.amplitude * std::sin(phase)};
        }
    }
    return frame;
}

namespace {

double frame_rms(const CsiFrame& f) {
    double p = 0.0;
    for (const cplx& s : f.samples) p += std::norm(s);
    return std::sqrt(p / static_cast<double>(f.samples.size()));
}

// Per-packet timing scatter, centered over the sweep's packets so that the
// common component stays attributable to the trace-wide slope.
double packet_jitter(const ImpairmentModel& m, const std::string& link_id, long sweep,
                     int packet) {
    if (m.packet_jitter_std_s <= 0.0 || m.packets_per_sweep <= 1) return 0.0;
    const std::uint64_t link_h = hash_string(link_id);
    std::vector<double> draws(m.packets_per_sweep);
    double mean = 0.0;
    for (int p = 0; p < m.packets_per_sweep; ++p) {
        Rng rng(derive_key(m.seed ^ link_h, 0x6a697474ULL, static_cast<std::uint64_t>(sweep),
                           static_cast<std::uint64_t>(p)));
        draws[p] = rng.gaussian(0.0, m.packet_jitter_std_s);
        mean += draws[p];
    }
    mean /= m.packets_per_sweep;
    return draws[packet % m.packets_per_sweep] - mean;
}

}  // namespace

CsiFrame apply_impairments(const CsiFrame& frame, const ImpairmentModel& m) {
    CsiFrame out = frame;
    static const SubcarrierGrid grid = build_grid();
    const double slope = m.trace_slope_s +
                         packet_jitter(m, frame.link_id, frame.sweep_index, frame.packet_index);

    for (size_t k = 0; k < out.samples.size(); ++k) {
        const int c = static_cast<int>(k) / kSubcarriersPerChannel;
        const double phase = m.channel_phase_rad[c] + 2.0 * M_PI * grid.frequencies[k] * slope;
        out.samples[k] *= cplx{std::cos(phase), std::sin(phase)};
    }

    if (m.noise_rel_std > 0.0) {
        const double sigma = frame_rms(frame) * m.noise_rel_std / std::sqrt(2.0);
        Rng rng(derive_key(m.seed ^ hash_string(frame.link_id), 0x6e6f6973ULL,
                           static_cast<std::uint64_t>(frame.sweep_index),
                           static_cast<std::uint64_t>(frame.packet_index)));
        for (cplx& s : out.samples) {
            s += cplx{rng.gaussian(0.0, sigma), rng.gaussian(0.0, sigma)};
        }
        out.snr_db = m.snr_db();
    }
    return out;
}

void run_trace(const Scenario& s, const SweepSchedule& schedule, const ImpairmentModel& m,
               const SubcarrierGrid& grid, const FrameSink& sink) {
    s.validate();
    schedule.validate();
    const long sweeps = static_cast<long>(std::floor(s.duration / schedule.sweep_period_s));

    for (const LinkGeometry& link : s.links) {
        for (long i = 0; i < sweeps; ++i) {
            const double t = i * schedule.sweep_period_s;
            const std::vector<ReflectorState> states = sample_scenario(s, t);
            CsiFrame clean = synthesize_clean(states, link, grid, s.los_gain);
            clean.timestamp = t;
            clean.sweep_index = i;
            for (int p = 0; p < schedule.packets_per_channel; ++p) {
                clean.packet_index = p;
                sink(apply_impairments(clean, m));
            }
        }
    }
}

std::vector<CsiFrame> run_trace(const Scenario& s, const SweepSchedule& schedule,
                                const ImpairmentModel& m, const SubcarrierGrid& grid) {
    std::vector<CsiFrame> frames;
    run_trace(s, schedule, m, grid, [&](const CsiFrame& f) { frames.push_back(f); });
    return frames;
}

void write_trace_line(std::ostream& os, const CsiFrame& frame) {
    std::string line;
    line.reserve(48 + frame.samples.size() * 26);
    char buf[64];
    line += frame.link_id;
    std::snprintf(buf, sizeof(buf), " %.9g %.9g", frame.timestamp, frame.snr_db);
    line += buf;
    for (const cplx& s : frame.samples) {
        std::snprintf(buf, sizeof(buf), " %.9g %.9g", s.real(), s.imag());
        line += buf;
    }
    line += '\n';
    os << line;
}

bool read_trace_line(std::istream& is, CsiFrame& frame) {
    std::string line;
    do {
        if (!std::getline(is, line)) return false;
    } while (line.empty());

    const size_t sp = line.find(' ');
    if (sp == std::string::npos) throw std::runtime_error("trace record: malformed line");
    frame.link_id = line.substr(0, sp);

    const char* p = line.c_str() + sp;
    char* end = nullptr;
    frame.timestamp = std::strtod(p, &end);
    if (end == p) throw std::runtime_error("trace record: missing timestamp");
    p = end;
    frame.snr_db = std::strtod(p, &end);
    if (end == p) throw std::runtime_error("trace record: missing snr");
    p = end;

    frame.samples.clear();
    frame.samples.reserve(kGridSize);
    while (true) {
        const double re = std::strtod(p, &end);
        if (end == p) break;
        p = end;
        const double im = std::strtod(p, &end);
        if (end == p) throw std::runtime_error("trace record: dangling real part");
        p = end;
        frame.samples.emplace_back(re, im);
    }
    if (frame.samples.size() != static_cast<size_t>(kGridSize)) {
        throw std::runtime_error("trace record: wrong sample count");
    }
    return true;
}

}  // namespace multitrack
