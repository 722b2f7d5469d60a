#include "ambc/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ambc::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

double bessel_i0(double x) {
    // series expansion, converges quickly for the beta range used here
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 50; ++k) {
        term *= (x / (2.0 * k)) * (x / (2.0 * k));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

}  // namespace

void fft(std::span<cplx> x, bool inverse) {
    const std::size_t n = x.size();
    if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / double(len) * (inverse ? 1.0 : -1.0);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = x[i + k];
                cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double s = 1.0 / double(n);
        for (auto& v : x) v *= s;
    }
}

std::vector<cplx> xcorr_serial(std::span<const cplx> x, std::span<const cplx> h) {
    if (h.empty() || x.size() < h.size())
        throw std::invalid_argument("xcorr: template longer than input");
    const std::size_t nout = x.size() - h.size() + 1;
    std::vector<cplx> out(nout);
    for (std::size_t j = 0; j < nout; ++j) {
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i < h.size(); ++i) acc += x[j + i] * std::conj(h[i]);
        out[j] = acc;
    }
    return out;
}

std::vector<cplx> xcorr(std::span<const cplx> x, std::span<const cplx> h, Exec ex) {
    if (h.empty() || x.size() < h.size())
        throw std::invalid_argument("xcorr: template longer than input");
    const std::size_t m = h.size();
    const std::size_t nout = x.size() - m + 1;
    if (ex == Exec::serial && m * nout < (1u << 22)) return xcorr_serial(x, h);

    // overlap-save: correlation as convolution with conj-reversed template
    const std::size_t nfft = std::max<std::size_t>(1024, next_pow2(4 * m));
    const std::size_t step = nfft - m + 1;
    std::vector<cplx> hf(nfft, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < m; ++i) hf[i] = std::conj(h[m - 1 - i]);
    fft(hf, false);

    std::vector<cplx> out(nout);
    const std::size_t nblocks = (nout + step - 1) / step;
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
    for (long long bi = 0; bi < (long long)nblocks; ++bi) {
        const std::size_t start = std::size_t(bi) * step;
        std::vector<cplx> buf(nfft, cplx(0.0, 0.0));
        const std::size_t avail = std::min(nfft, x.size() - start);
        std::copy(x.begin() + start, x.begin() + start + avail, buf.begin());
        fft(buf, false);
        for (std::size_t i = 0; i < nfft; ++i) buf[i] *= hf[i];
        fft(buf, true);
        const std::size_t cnt = std::min(step, nout - start);
        for (std::size_t i = 0; i < cnt; ++i) out[start + i] = buf[m - 1 + i];
    }
    return out;
}

namespace {

template <typename T>
std::vector<T> fir_zero_phase(std::span<const T> x, std::span<const double> taps, Exec ex) {
    if (taps.empty() || taps.size() % 2 == 0)
        throw std::invalid_argument("fir_filter: tap count must be odd");
    const long long half = (long long)taps.size() / 2;
    const long long n = (long long)x.size();
    std::vector<T> out(x.size());
    if (n == 0) return out;
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
    for (long long i = 0; i < n; ++i) {
        T acc{};
        for (long long k = -half; k <= half; ++k) {
            long long j = std::clamp(i + k, 0ll, n - 1);  // replicate edges
            acc += x[j] * taps[std::size_t(k + half)];
        }
        out[std::size_t(i)] = acc;
    }
    return out;
}

}  // namespace

std::vector<double> fir_filter(std::span<const double> x, std::span<const double> taps, Exec ex) {
    return fir_zero_phase(x, taps, ex);
}

std::vector<cplx> fir_filter(std::span<const cplx> x, std::span<const double> taps, Exec ex) {
    return fir_zero_phase(x, taps, ex);
}

std::vector<double> boxcar_mean(std::span<const double> x, int len) {
    if (len <= 0) throw std::invalid_argument("boxcar_mean: length must be positive");
    std::vector<double> out(x.size(), 0.0);
    const std::size_t n = x.size();
    double acc = 0.0;
    // running sum over [n, n+len); entries past the end count as zero
    for (std::size_t i = 0; i < std::min<std::size_t>(len, n); ++i) acc += x[i];
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = acc / double(len);
        acc -= x[i];
        if (i + len < n) acc += x[i + len];
    }
    return out;
}

std::vector<double> lowpass_taps(int n_taps, double cutoff_hz, double rate_hz,
                                 double kaiser_beta) {
    if (n_taps < 3 || n_taps % 2 == 0)
        throw std::invalid_argument("lowpass_taps: tap count must be odd and >= 3");
    if (cutoff_hz <= 0 || cutoff_hz >= rate_hz / 2)
        throw std::invalid_argument("lowpass_taps: cutoff out of range");
    const int half = n_taps / 2;
    const double fc = cutoff_hz / rate_hz;  // cycles per sample
    std::vector<double> taps(std::size_t(n_taps), 0.0);
    const double den = bessel_i0(kaiser_beta);
    for (int i = 0; i < n_taps; ++i) {
        const int k = i - half;
        double s = (k == 0) ? 2.0 * fc : std::sin(2.0 * kPi * fc * k) / (kPi * k);
        const double r = double(k) / double(half);
        const double w = bessel_i0(kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / den;
        taps[std::size_t(i)] = s * w;
    }
    double sum = 0.0;
    for (double t : taps) sum += t;
    for (double& t : taps) t /= sum;  // exact unity DC gain
    return taps;
}

std::vector<double> highpass_taps(int n_taps, double cutoff_hz, double rate_hz,
                                  double kaiser_beta) {
    auto taps = lowpass_taps(n_taps, cutoff_hz, rate_hz, kaiser_beta);
    for (double& t : taps) t = -t;
    taps[std::size_t(n_taps / 2)] += 1.0;
    return taps;
}

double filter_gain_at(std::span<const double> taps, double freq_hz, double rate_hz) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const double ang = -2.0 * kPi * freq_hz / rate_hz * double(i);
        acc += taps[i] * cplx(std::cos(ang), std::sin(ang));
    }
    return std::abs(acc);
}

std::vector<double> fractional_delay_taps(double frac, int n_taps) {
    if (n_taps < 3 || n_taps % 2 == 0)
        throw std::invalid_argument("fractional_delay_taps: tap count must be odd");
    const int half = n_taps / 2;
    std::vector<double> taps(std::size_t(n_taps), 0.0);
    for (int i = 0; i < n_taps; ++i) {
        const double t = double(i - half) - frac;
        const double s = (std::abs(t) < 1e-12) ? 1.0 : std::sin(kPi * t) / (kPi * t);
        // Blackman window over the kernel span
        const double u = double(i) / double(n_taps - 1);
        const double w = 0.42 - 0.5 * std::cos(2.0 * kPi * u) + 0.08 * std::cos(4.0 * kPi * u);
        taps[std::size_t(i)] = s * w;
    }
    return taps;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1) + 0xbf58476d1ce4e5b9ull * (c + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace ambc::dsp
