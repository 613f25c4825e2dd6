#include "multitrack/subcarriers.hpp"

namespace multitrack {

SubcarrierGrid build_grid() {
    SubcarrierGrid grid;
    int idx = 0;
    auto add_segment = [&](int first, int last) {
        for (int ch = first; ch <= last; ch += 4) grid.channel_numbers[idx++] = ch;
    };
    add_segment(36, 64);    // 5.18 - 5.32 GHz centers
    add_segment(100, 140);  // 5.50 - 5.70 GHz centers
    add_segment(149, 165);  // 5.745 - 5.825 GHz centers

    grid.frequencies.reserve(kGridSize);
    const double spacing = kChannelWidth / kSubcarriersPerChannel;
    for (int c = 0; c < kChannels; ++c) {
        // IEEE channelization: center = 5 GHz + 5 MHz * channel number.
        const double center = 5.0e9 + 5.0e6 * grid.channel_numbers[c];
        grid.channel_centers[c] = center;
        for (int i = 0; i < kSubcarriersPerChannel; ++i) {
            const double offset = (i - (kSubcarriersPerChannel - 1) * 0.5) * spacing;
            grid.frequencies.push_back(center + offset);
        }
    }
    return grid;
}

double SubcarrierGrid::mean_frequency() const {
    double sum = 0.0;
    for (double f : frequencies) sum += f;
    return sum / static_cast<double>(frequencies.size());
}

}  // namespace multitrack
