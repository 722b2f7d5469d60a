#include "ambc/bd_rx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ambc {

namespace {

int chip_samples(double chip_duration, double rate) {
    const double sppf = chip_duration * rate;
    const int spp = int(std::llround(sppf));
    if (spp <= 0 || std::abs(sppf - double(spp)) > 1e-9)
        throw std::invalid_argument("chip_duration * rate must be a positive integer");
    return spp;
}

}  // namespace

TapPowerSeries tap_power(std::span<const cplx> taps) {
    TapPowerSeries out;
    out.values.resize(taps.size());
    for (std::size_t i = 0; i < taps.size(); ++i) out.values[i] = std::norm(taps[i]);
    return out;
}

const std::vector<double>& highpass_filter_taps() {
    static const std::vector<double> taps = dsp::highpass_taps(1601, 20.0, 14000.0, 6.0);
    return taps;
}

TapPowerSeries highpass(const TapPowerSeries& series, Exec ex) {
    TapPowerSeries out;
    out.rate = series.rate;
    out.values = dsp::fir_filter(std::span<const double>(series.values),
                                 highpass_filter_taps(), ex);
    return out;
}

StreamingHighpass::StreamingHighpass() = default;

std::vector<double> StreamingHighpass::push(std::span<const double> chunk) {
    carry_.insert(carry_.end(), chunk.begin(), chunk.end());
    const auto& taps = highpass_filter_taps();
    const std::size_t half = taps.size() / 2;
    std::vector<double> out;
    // can emit y[i] once x[i + half] is known
    while (emitted_ + half < carry_.size()) {
        const std::size_t i = emitted_;
        double acc = 0.0;
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const long long j = (long long)i + (long long)k - (long long)half;
            const std::size_t jj =
                std::size_t(std::clamp(j, 0ll, (long long)carry_.size() - 1));
            acc += carry_[jj] * taps[k];
        }
        out.push_back(acc);
        ++emitted_;
    }
    return out;
}

std::vector<double> StreamingHighpass::flush() {
    const auto& taps = highpass_filter_taps();
    const std::size_t half = taps.size() / 2;
    std::vector<double> out;
    while (emitted_ < carry_.size()) {
        const std::size_t i = emitted_;
        double acc = 0.0;
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const long long j = (long long)i + (long long)k - (long long)half;
            const std::size_t jj =
                std::size_t(std::clamp(j, 0ll, (long long)carry_.size() - 1));
            acc += carry_[jj] * taps[k];
        }
        out.push_back(acc);
        ++emitted_;
    }
    return out;
}

TapPowerSeries matched_filter(const TapPowerSeries& series, double chip_duration) {
    const int spp = chip_samples(chip_duration, series.rate);
    TapPowerSeries out;
    out.rate = series.rate;
    out.values = dsp::boxcar_mean(series.values, spp);
    return out;
}

SyncResult frame_sync(const TapPowerSeries& mf, std::span<const std::uint8_t> sync_chips,
                      double chip_duration, double threshold, Exec ex) {
    const int spp = chip_samples(chip_duration, mf.rate);
    const long long packet = (long long)BdFrame::kChips * spp;
    const long long nlag = (long long)mf.values.size() - packet + 1;
    if (nlag <= 0) throw std::invalid_argument("frame_sync: series shorter than one packet");

    std::vector<double> tpl(sync_chips.size());
    for (std::size_t c = 0; c < sync_chips.size(); ++c)
        tpl[c] = sync_chips[c] ? 1.0 : -1.0;

    std::vector<double> corr(std::size_t(nlag), 0.0);
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
    for (long long d = 0; d < nlag; ++d) {
        double acc = 0.0;
        for (std::size_t c = 0; c < tpl.size(); ++c)
            acc += tpl[c] * mf.values[std::size_t(d) + c * std::size_t(spp)];
        corr[std::size_t(d)] = acc;
    }

    long long peak = 0;
    for (long long d = 1; d < nlag; ++d)
        if (std::abs(corr[std::size_t(d)]) > std::abs(corr[std::size_t(peak)])) peak = d;

    // off-peak RMS, excluding one chip either side of the peak
    double acc = 0.0;
    long long cnt = 0;
    for (long long d = 0; d < nlag; ++d) {
        if (std::llabs(d - peak) <= spp) continue;
        acc += corr[std::size_t(d)] * corr[std::size_t(d)];
        ++cnt;
    }
    SyncResult res;
    res.frame_start = std::size_t(peak);
    res.phase_sign = corr[std::size_t(peak)] >= 0.0 ? 1 : -1;
    res.sync_metric = (cnt > 0 && acc > 0.0)
                          ? std::abs(corr[std::size_t(peak)]) / std::sqrt(acc / double(cnt))
                          : std::numeric_limits<double>::infinity();
    if (res.sync_metric < threshold) throw no_packet_error("frame_sync: no packet found");
    return res;
}

DemodResult demodulate(const TapPowerSeries& filtered, std::size_t frame_start,
                       int phase_sign, double chip_duration) {
    const int spp = chip_samples(chip_duration, filtered.rate);
    const std::size_t need = frame_start + std::size_t(BdFrame::kChips) * std::size_t(spp);
    if (need > filtered.values.size())
        throw std::invalid_argument("demodulate: packet extends past end of series");

    auto chip_mean = [&](int chip) {
        const std::size_t base = frame_start + std::size_t(chip) * std::size_t(spp);
        double acc = 0.0;
        for (int i = 0; i < spp; ++i) acc += filtered.values[base + std::size_t(i)];
        return acc / double(spp);
    };

    DemodResult res;
    res.frame_start = frame_start;
    res.phase_sign = phase_sign;
    res.payload_bits.resize(BdFrame::kPayloadBits);
    res.soft_values.resize(BdFrame::kPayloadBits);
    for (int b = 0; b < BdFrame::kPayloadBits; ++b) {
        const int c0 = BdFrame::kSyncChips + 2 * b;
        const double soft = double(phase_sign) * (chip_mean(c0) - chip_mean(c0 + 1));
        res.soft_values[std::size_t(b)] = soft;
        res.payload_bits[std::size_t(b)] = soft > 0.0 ? 1 : 0;
    }
    res.snr_est_db = snr_estimate(filtered, frame_start, chip_duration);
    return res;
}

double ber(std::span<const std::uint8_t> decoded, std::span<const std::uint8_t> truth) {
    if (decoded.size() != truth.size() || decoded.empty())
        throw std::invalid_argument("ber: length mismatch");
    std::size_t errs = 0;
    for (std::size_t i = 0; i < decoded.size(); ++i)
        if ((decoded[i] != 0) != (truth[i] != 0)) ++errs;
    return double(errs) / double(decoded.size());
}

double snr_estimate(const TapPowerSeries& filtered, std::size_t frame_start,
                    double chip_duration) {
    const int spp = chip_samples(chip_duration, filtered.rate);
    const std::size_t packet = std::size_t(BdFrame::kChips) * std::size_t(spp);
    if (frame_start + packet > filtered.values.size())
        throw std::invalid_argument("snr_estimate: packet extends past end of series");

    auto pair_stat = [&](std::size_t base) {
        double a = 0.0, b = 0.0;
        for (int i = 0; i < spp; ++i) {
            a += filtered.values[base + std::size_t(i)];
            b += filtered.values[base + std::size_t(i) + std::size_t(spp)];
        }
        return (a - b) / double(spp);
    };

    double sig = 0.0;
    for (int b = 0; b < BdFrame::kPayloadBits; ++b) {
        const std::size_t base =
            frame_start + std::size_t(BdFrame::kSyncChips + 2 * b) * std::size_t(spp);
        const double s = pair_stat(base);
        sig += s * s;
    }
    sig /= double(BdFrame::kPayloadBits);

    // same statistic on off-packet stretches; skip the filter edges
    const std::size_t guard = highpass_filter_taps().size() / 2;
    double noise = 0.0;
    std::size_t cnt = 0;
    auto probe_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t base = lo; base + 2 * std::size_t(spp) <= hi;
             base += 2 * std::size_t(spp)) {
            const double s = pair_stat(base);
            noise += s * s;
            ++cnt;
        }
    };
    if (frame_start > guard) probe_range(guard, frame_start);
    if (frame_start + packet + guard < filtered.values.size())
        probe_range(frame_start + packet, filtered.values.size() - guard);
    if (cnt == 0) return std::numeric_limits<double>::quiet_NaN();
    noise /= double(cnt);
    if (noise < 1e-12 * sig) return std::numeric_limits<double>::infinity();
    const double ratio = std::max(sig - noise, 1e-300) / noise;
    return 10.0 * std::log10(ratio);
}

std::string demod_csv_row(const std::string& capture_id, const DemodResult& r,
                          double ber_value) {
    char buf[160];
    if (ber_value >= 0.0)
        std::snprintf(buf, sizeof(buf), "%s,%zu,%.6g,%.6g,%s,%.6g", capture_id.c_str(),
                      r.frame_start, r.sync_metric, r.snr_est_db,
                      hex_from_bits(r.payload_bits).c_str(), ber_value);
    else
        std::snprintf(buf, sizeof(buf), "%s,%zu,%.6g,%.6g,%s", capture_id.c_str(),
                      r.frame_start, r.sync_metric, r.snr_est_db,
                      hex_from_bits(r.payload_bits).c_str());
    return buf;
}

}  // namespace ambc
