#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambc/bd_codec.hpp"
#include "ambc/csi_chain.hpp"

namespace ambc {

/// Raised when no packet clears the frame-sync threshold.
struct no_packet_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Real-valued series at the 14 kHz tap rate: tap power y[m], then the
/// filtered y_f[m].
struct TapPowerSeries {
    std::vector<double> values;
    double rate = 14000.0;
};

TapPowerSeries tap_power(std::span<const cplx> taps);

/// Direct-path / Doppler removal filter (1601-tap linear-phase FIR highpass,
/// 20 Hz at 14 kHz, zero-phase application).
const std::vector<double>& highpass_filter_taps();
TapPowerSeries highpass(const TapPowerSeries& series, Exec ex = Exec::parallel);

/// Chunked highpass with carried state for streaming captures. Output lags
/// the input by half the filter length; flush() drains the tail.
class StreamingHighpass {
  public:
    StreamingHighpass();
    std::vector<double> push(std::span<const double> chunk);
    std::vector<double> flush();

  private:
    std::vector<double> carry_;
    std::size_t emitted_ = 0;
    std::size_t consumed_ = 0;
};

/// Moving-sum matched filter over one chip duration, normalized by length.
TapPowerSeries matched_filter(const TapPowerSeries& series, double chip_duration);

struct SyncResult {
    std::size_t frame_start = 0;
    int phase_sign = 1;
    double sync_metric = 0.0;
};

/// Correlates the matched-filtered series against the bipolar 26-chip header
/// over all delays that leave room for a whole packet. Throws
/// no_packet_error when |peak| / RMS(off-peak) falls below the threshold.
SyncResult frame_sync(const TapPowerSeries& mf, std::span<const std::uint8_t> sync_chips,
                      double chip_duration, double threshold = 5.0,
                      Exec ex = Exec::parallel);

struct DemodResult {
    std::size_t frame_start = 0;
    double sync_metric = 0.0;
    int phase_sign = 1;
    std::vector<std::uint8_t> payload_bits;
    std::vector<double> soft_values;
    double snr_est_db = 0.0;
};

/// Manchester correlator detection on the filtered (pre-matched-filter)
/// series: soft value = phase_sign * (first chip - second chip) per bit.
DemodResult demodulate(const TapPowerSeries& filtered, std::size_t frame_start,
                       int phase_sign, double chip_duration);

double ber(std::span<const std::uint8_t> decoded, std::span<const std::uint8_t> truth);

/// Decision-domain SNR: mean squared soft value against the off-packet
/// residual run through the same chip-pair statistic. +inf when the noise
/// floor vanishes.
double snr_estimate(const TapPowerSeries& filtered, std::size_t frame_start,
                    double chip_duration);

/// One CSV row per packet: capture_id, frame_start, sync_metric, snr_est_db,
/// payload_hex[, ber].
std::string demod_csv_row(const std::string& capture_id, const DemodResult& r,
                          double ber_value = -1.0);

}  // namespace ambc
