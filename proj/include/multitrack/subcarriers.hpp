#pragma once
#include <array>
#include <vector>

namespace multitrack {

inline constexpr int kChannels = 24;
inline constexpr int kSubcarriersPerChannel = 30;
inline constexpr int kGridSize = kChannels * kSubcarriersPerChannel;  // 720
inline constexpr double kChannelWidth = 20e6;  // Hz

// The 24 usable 20 MHz channels at 5 GHz, in three non-contiguous segments
// (36-64, 100-140, 149-165), each carrying 30 equally spaced subcarriers.
struct SubcarrierGrid {
    std::array<int, kChannels> channel_numbers{};
    std::array<double, kChannels> channel_centers{};   // Hz
    std::vector<double> frequencies;                   // 720 entries, strictly increasing

    int channel_of(int k) const { return k / kSubcarriersPerChannel; }
    double mean_frequency() const;
};

SubcarrierGrid build_grid();

}  // namespace multitrack
