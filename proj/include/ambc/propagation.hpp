#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ambc/bd_codec.hpp"
#include "ambc/lte_waveform.hpp"

namespace ambc {

/// One unmodulated multipath component. The amplitude is the complex
/// baseband gain with the carrier-phase term already folded in.
struct PathSpec {
    double delay = 0.0;       // seconds
    cplx amplitude{1.0, 0.0};
    double doppler = 0.0;     // Hz, linear phase rotation
};

/// The backscatter-modulated path.
struct BdPathSpec {
    double delay = 0.0;
    cplx amplitude{0.0, 0.0};
    BdWaveform waveform;  // on/off chip waveform x(t)
};

struct ChannelSpec {
    std::vector<PathSpec> paths;  // first entry is the direct path
    std::optional<BdPathSpec> bd;
    double cfo = 0.0;  // Hz
    std::optional<int> quantizer_bits;

    void validate() const;
};

/// Composite tap gains at one delay bin and the alpha/beta power-domain
/// decomposition that the backscatter demodulator sees.
struct TapModel {
    cplx g0{0.0, 0.0};  // backscatter component
    cplx g1{0.0, 0.0};  // static multipath component
    double alpha = 0.0;  // |g1|^2
    double beta = 0.0;   // |g0|^2 + 2 Re{conj(g1) g0}
};

/// y(t) = sum_k a_k e^{j2pi f_k t} x(t - tau_k) + a_bd x_bd(t) x(t - tau_0),
/// then CFO rotation. Fractional delays use a 65-tap windowed-sinc kernel;
/// integer-sample delays take an exact shift path.
IqStream apply_channel(const IqStream& iq, const ChannelSpec& spec,
                       Exec ex = Exec::parallel);

/// Adds circular complex Gaussian noise with variance
/// reference_power / 10^(snr_db/10). snr_db = +inf returns the input.
IqStream awgn(const IqStream& iq, double snr_db, double reference_power,
              std::uint64_t seed);

/// Uniform mid-rise quantization of I and Q, clipping at +-full_scale.
IqStream quantize(const IqStream& iq, int bits, double full_scale);

/// Analytic sinc-leakage oracle for the composite gains of delay bin l0 as
/// seen through the CRS pilot comb.
TapModel expected_tap_model(const ChannelSpec& spec, const CellConfig& cfg, int l0);

/// Mean sample power of a stream.
double mean_power(const IqStream& iq);

}  // namespace ambc
