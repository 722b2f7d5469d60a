#include "ambc/propagation.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ambc {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

/// Delayed copy of a stream. Integer-sample delays shift exactly; fractional
/// delays go through the windowed-sinc kernel.
std::vector<cplx> delay_stream(const std::vector<cplx>& x, double delay_samples, Exec ex) {
    const long long n = (long long)x.size();
    std::vector<cplx> out(x.size(), cplx(0.0, 0.0));
    const double rounded = std::round(delay_samples);
    if (std::abs(delay_samples - rounded) < 1e-9) {
        const long long d = (long long)rounded;
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
        for (long long i = 0; i < n; ++i)
            if (i - d >= 0 && i - d < n) out[std::size_t(i)] = x[std::size_t(i - d)];
        return out;
    }
    const long long di = (long long)std::floor(delay_samples);
    const double frac = delay_samples - double(di);  // in [0,1)
    const auto taps = dsp::fractional_delay_taps(frac - std::round(frac));
    const long long base = di + (long long)std::llround(frac);  // nearest integer part
    const long long half = (long long)taps.size() / 2;
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
    for (long long i = 0; i < n; ++i) {
        cplx acc(0.0, 0.0);
        for (long long k = -half; k <= half; ++k) {
            const long long j = i - base - k;
            if (j >= 0 && j < n) acc += x[std::size_t(j)] * taps[std::size_t(k + half)];
        }
        out[std::size_t(i)] = acc;
    }
    return out;
}

}  // namespace

void ChannelSpec::validate() const {
    if (paths.empty())
        throw std::invalid_argument("ChannelSpec: at least one unmodulated path required");
    for (const auto& p : paths) {
        if (p.delay < 0) throw std::invalid_argument("ChannelSpec: negative path delay");
        if (std::abs(p.doppler) >= 500.0)
            throw std::invalid_argument("ChannelSpec: |doppler| must stay below 500 Hz");
    }
    if (bd && bd->delay < 0) throw std::invalid_argument("ChannelSpec: negative BD delay");
}

IqStream apply_channel(const IqStream& iq, const ChannelSpec& spec, Exec ex) {
    spec.validate();
    const double fs = iq.sample_rate;
    const long long n = (long long)iq.samples.size();
    IqStream out;
    out.sample_rate = fs;
    out.t0 = iq.t0;
    out.samples.assign(iq.samples.size(), cplx(0.0, 0.0));

    std::vector<cplx> scratch;
    auto delayed_view = [&](double delay_samples) -> const std::vector<cplx>& {
        if (std::abs(delay_samples) < 1e-12) return iq.samples;  // no copy
        scratch = delay_stream(iq.samples, delay_samples, ex);
        return scratch;
    };

    for (const auto& p : spec.paths) {
        const auto& delayed = delayed_view(p.delay * fs);
        if (p.doppler == 0.0) {
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
            for (long long i = 0; i < n; ++i)
                out.samples[std::size_t(i)] += p.amplitude * delayed[std::size_t(i)];
        } else {
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
            for (long long i = 0; i < n; ++i) {
                const double ang = 2.0 * kPi * p.doppler * (iq.t0 + double(i) / fs);
                out.samples[std::size_t(i)] +=
                    p.amplitude * cplx(std::cos(ang), std::sin(ang)) * delayed[std::size_t(i)];
            }
        }
    }

    if (spec.bd && spec.bd->amplitude != cplx(0.0, 0.0)) {
        const auto& delayed = delayed_view(spec.bd->delay * fs);
        const auto& wf = spec.bd->waveform;
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
        for (long long i = 0; i < n; ++i) {
            const double x = wf.value_at(iq.t0 + double(i) / fs);
            if (x != 0.0)
                out.samples[std::size_t(i)] += spec.bd->amplitude * x * delayed[std::size_t(i)];
        }
    }

    if (spec.cfo != 0.0) {
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
        for (long long i = 0; i < n; ++i) {
            const double ang = 2.0 * kPi * spec.cfo * (iq.t0 + double(i) / fs);
            out.samples[std::size_t(i)] *= cplx(std::cos(ang), std::sin(ang));
        }
    }

    if (spec.quantizer_bits) return quantize(out, *spec.quantizer_bits, 1.0);
    return out;
}

IqStream awgn(const IqStream& iq, double snr_db, double reference_power,
              std::uint64_t seed) {
    if (reference_power <= 0) throw std::invalid_argument("awgn: reference_power must be > 0");
    if (std::isinf(snr_db) && snr_db > 0) return iq;
    const double var = reference_power / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(var / 2.0);  // per real dimension
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    IqStream out = iq;
    for (auto& s : out.samples) s += cplx(gauss(rng), gauss(rng));
    return out;
}

IqStream quantize(const IqStream& iq, int bits, double full_scale) {
    if (bits < 4 || bits > 16) throw std::invalid_argument("quantize: bits must be in [4,16]");
    if (full_scale <= 0) throw std::invalid_argument("quantize: full_scale must be > 0");
    const double step = 2.0 * full_scale / double(1 << bits);
    const double lim = full_scale - step / 2.0;
    auto q = [&](double v) {
        const double cl = std::clamp(v, -full_scale, full_scale);
        return std::clamp(step * (std::floor(cl / step) + 0.5), -lim, lim);
    };
    IqStream out = iq;
    for (auto& s : out.samples) s = cplx(q(s.real()), q(s.imag()));
    return out;
}

TapModel expected_tap_model(const ChannelSpec& spec, const CellConfig& cfg, int l0) {
    spec.validate();
    const double w_pilot = 6.0 * cfg.subcarrier_spacing * cfg.n_pilots();
    const double bins = double(cfg.n_pilots());
    TapModel tm;
    auto check = [&](double delay) {
        const double b = delay * w_pilot;
        if (b < -0.5 || b > bins - 0.5)
            throw std::invalid_argument("expected_tap_model: path outside the alias range");
        return b;
    };
    for (const auto& p : spec.paths)
        tm.g1 += p.amplitude * sinc(double(l0) - check(p.delay));
    if (spec.bd) tm.g0 = spec.bd->amplitude * sinc(double(l0) - check(spec.bd->delay));
    tm.alpha = std::norm(tm.g1);
    tm.beta = std::norm(tm.g0) + 2.0 * (std::conj(tm.g1) * tm.g0).real();
    return tm;
}

double mean_power(const IqStream& iq) {
    if (iq.samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : iq.samples) acc += std::norm(s);
    return acc / double(iq.samples.size());
}

}  // namespace ambc
