#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ambc {

/// Bit 0 -> chips (0,1), bit 1 -> chips (1,0).
std::vector<std::uint8_t> manchester_encode(std::span<const std::uint8_t> bits);

/// Length-13 Barker code, bipolar.
std::array<int, 13> barker13();

/// 90-chip backscatter packet: two Barker-13 headers plus 32 Manchester-coded
/// data bits.
struct BdFrame {
    std::vector<std::uint8_t> sync_chips;  // 26
    std::vector<std::uint8_t> data_chips;  // 64
    std::vector<std::uint8_t> payload;     // 32 bits

    std::vector<std::uint8_t> chips() const;  // 90 on/off chips
    static constexpr int kSyncChips = 26;
    static constexpr int kDataChips = 64;
    static constexpr int kChips = 90;
    static constexpr int kPayloadBits = 32;
};

BdFrame frame_build(std::span<const std::uint8_t> payload);

/// Baseband on/off modulation waveform, piecewise constant per chip, with
/// zero-valued guard intervals before and after the packet.
struct BdWaveform {
    double chip_duration = 0.010;
    double sample_rate = 0.0;
    double t0 = 0.0;  // time of the first stored sample
    std::vector<double> samples;

    /// Piecewise-constant evaluation at an arbitrary time; zero outside.
    double value_at(double t) const;
};

BdWaveform bd_waveform(const BdFrame& frame, double chip_duration,
                       double sample_rate, double guard);

/// 8 hex digits -> 32 bits, most significant bit first (and back).
std::vector<std::uint8_t> bits_from_hex(const std::string& hex);
std::string hex_from_bits(std::span<const std::uint8_t> bits);

}  // namespace ambc
