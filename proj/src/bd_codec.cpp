#include "ambc/bd_codec.hpp"

#include <cmath>
#include <stdexcept>

namespace ambc {

std::vector<std::uint8_t> manchester_encode(std::span<const std::uint8_t> bits) {
    std::vector<std::uint8_t> chips;
    chips.reserve(2 * bits.size());
    for (auto b : bits) {
        chips.push_back(b ? 1 : 0);
        chips.push_back(b ? 0 : 1);
    }
    return chips;
}

std::array<int, 13> barker13() {
    return {+1, +1, +1, +1, +1, -1, -1, +1, +1, -1, +1, -1, +1};
}

std::vector<std::uint8_t> BdFrame::chips() const {
    std::vector<std::uint8_t> all(sync_chips);
    all.insert(all.end(), data_chips.begin(), data_chips.end());
    return all;
}

BdFrame frame_build(std::span<const std::uint8_t> payload) {
    if (payload.size() != BdFrame::kPayloadBits)
        throw std::invalid_argument("frame_build: payload must be 32 bits");
    BdFrame f;
    f.payload.assign(payload.begin(), payload.end());
    const auto bk = barker13();
    for (int rep = 0; rep < 2; ++rep)
        for (int v : bk) f.sync_chips.push_back(v > 0 ? 1 : 0);
    f.data_chips = manchester_encode(payload);
    return f;
}

double BdWaveform::value_at(double t) const {
    const double pos = (t - t0) * sample_rate;
    if (pos < 0.0) return 0.0;
    const auto i = std::size_t(pos);
    return i < samples.size() ? samples[i] : 0.0;
}

BdWaveform bd_waveform(const BdFrame& frame, double chip_duration,
                       double sample_rate, double guard) {
    const double sppf = chip_duration * sample_rate;
    const auto spp = (long long)std::llround(sppf);
    if (spp <= 0 || std::abs(sppf - double(spp)) > 1e-9)
        throw std::invalid_argument("bd_waveform: chip_duration * sample_rate must be a positive integer");
    const auto guard_n = (long long)std::llround(guard * sample_rate);
    if (guard_n < 0) throw std::invalid_argument("bd_waveform: negative guard");
    BdWaveform wf;
    wf.chip_duration = chip_duration;
    wf.sample_rate = sample_rate;
    const auto chips = frame.chips();
    wf.samples.assign(std::size_t(2 * guard_n + spp * (long long)chips.size()), 0.0);
    for (std::size_t c = 0; c < chips.size(); ++c) {
        if (!chips[c]) continue;
        const std::size_t base = std::size_t(guard_n) + c * std::size_t(spp);
        for (long long i = 0; i < spp; ++i) wf.samples[base + std::size_t(i)] = 1.0;
    }
    return wf;
}

std::vector<std::uint8_t> bits_from_hex(const std::string& hex) {
    if (hex.size() != 8) throw std::invalid_argument("payload must be 8 hex digits");
    std::vector<std::uint8_t> bits;
    bits.reserve(32);
    for (char ch : hex) {
        int v;
        if (ch >= '0' && ch <= '9') v = ch - '0';
        else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
        else throw std::invalid_argument("payload: invalid hex digit");
        for (int b = 3; b >= 0; --b) bits.push_back((v >> b) & 1);
    }
    return bits;
}

std::string hex_from_bits(std::span<const std::uint8_t> bits) {
    if (bits.size() % 4 != 0) throw std::invalid_argument("hex_from_bits: length not a multiple of 4");
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        int v = 0;
        for (int b = 0; b < 4; ++b) v = (v << 1) | (bits[i + std::size_t(b)] & 1);
        s.push_back(digits[v]);
    }
    return s;
}

}  // namespace ambc
