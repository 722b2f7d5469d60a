#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ambc::dsp {

using cplx = std::complex<double>;

/// Execution policy for the data-parallel kernels. `serial` is the
/// reference path used by the tests and the benchmark baseline.
enum class Exec { serial, parallel };

/// In-place radix-2 FFT. Size must be a power of two.
/// The inverse transform applies the 1/N scale.
void fft(std::span<cplx> x, bool inverse);

/// Sliding cross-correlation y[j] = sum_i x[j+i] * conj(h[i]),
/// j = 0 .. len(x) - len(h). Overlap-save FFT implementation.
std::vector<cplx> xcorr(std::span<const cplx> x, std::span<const cplx> h,
                        Exec ex = Exec::parallel);

/// Direct-sum reference for xcorr.
std::vector<cplx> xcorr_serial(std::span<const cplx> x, std::span<const cplx> h);

/// Zero-phase FIR filter (odd tap count, symmetric group-delay
/// compensation). Edges are handled by replicating the first/last sample.
std::vector<double> fir_filter(std::span<const double> x,
                               std::span<const double> taps,
                               Exec ex = Exec::parallel);
std::vector<cplx> fir_filter(std::span<const cplx> x,
                             std::span<const double> taps,
                             Exec ex = Exec::parallel);

/// Forward-looking moving average: y[n] = mean(x[n .. n+len-1]),
/// zero-padded past the end. Output has the same length as the input.
std::vector<double> boxcar_mean(std::span<const double> x, int len);

/// Kaiser-windowed linear-phase lowpass prototype, unity DC gain.
std::vector<double> lowpass_taps(int n_taps, double cutoff_hz, double rate_hz,
                                 double kaiser_beta);

/// Highpass by spectral inversion of the lowpass prototype. DC gain is
/// exactly zero.
std::vector<double> highpass_taps(int n_taps, double cutoff_hz, double rate_hz,
                                  double kaiser_beta);

/// Magnitude of the (linear-phase) filter response at one frequency.
double filter_gain_at(std::span<const double> taps, double freq_hz, double rate_hz);

/// 65-tap Blackman-windowed sinc fractional-delay kernel, delay in
/// (-0.5, 0.5) samples relative to the kernel center.
std::vector<double> fractional_delay_taps(double frac, int n_taps = 65);

/// Deterministic seed mixer for per-job RNG streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

}  // namespace ambc::dsp
