#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambc/lte_waveform.hpp"

namespace ambc {

/// Raised when the PSS correlator cannot find a credible timing peak.
struct sync_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// LS channel estimate at the pilot subcarriers of one CRS symbol.
struct FreqEstimate {
    std::vector<cplx> pilot_values;
    std::vector<int> pilot_indices;
    int symbol_index = 0;  // global symbol index from the frame anchor
};

/// Per-CRS-symbol channel tap vectors, before interpolation.
struct CirSeries {
    std::vector<std::vector<cplx>> taps;  // one vector of n_bins taps per estimate
    std::vector<int> symbol_indices;      // position on the 14 kHz symbol lattice
    std::vector<double> symbol_times;     // seconds from the frame anchor
    int n_bins = 0;
    int n_subframes = 0;
};

/// Selected tap, interpolated to the uniform 14 kHz series.
struct TapTrack {
    std::vector<cplx> samples;
    double rate = 14000.0;
    int l0 = 0;
};

struct CsiResult {
    CirSeries raw;
    TapTrack tap;
};

/// Reference-waveform cross-correlation timing search (CRS lattice + PSS
/// anchor over one 10 ms period, folded non-coherently over the capture).
/// Returns the sample index of a frame boundary. Throws sync_error when the
/// robust z-score of the folded peak falls below the threshold.
std::size_t timing_sync(const IqStream& iq, const CellConfig& cfg,
                        double threshold = 7.0, Exec ex = Exec::parallel);

/// LS pilot estimates for CRS symbol m (global index from the frame anchor).
FreqEstimate extract_crs_ls(const ResourceGrid& rx_grid, const CellConfig& cfg, int m);

/// Pilot comb -> delay-domain taps (2*n_rb bins), with the comb frequency
/// shift derotated so the four CRS symbol classes are phase-consistent.
std::vector<cplx> cir_from_freq(const FreqEstimate& est, const CellConfig& cfg);

/// argmax over bins of mean tap power; ties toward the smaller index.
int tap_select(const CirSeries& series);

/// Fills the non-pilot symbols of the 14 kHz lattice (zero-order hold, then
/// low-pass FIR smoothing) for the selected tap. Output length 14 * n_subframes.
std::vector<cplx> interpolate_taps(const CirSeries& series, int l0,
                                   Exec ex = Exec::parallel);

/// Full chain: per-CRS-symbol demodulation, LS, CIR, tap selection and
/// interpolation, starting at a known or synchronized frame boundary.
CsiResult estimate_cir_series(const IqStream& iq, const CellConfig& cfg,
                              std::size_t timing, Exec ex = Exec::parallel);

/// Interpolation filter used by interpolate_taps (129-tap, 1 kHz at 14 kHz).
const std::vector<double>& interpolation_taps();

/// CSV export (time_s, re, im) for diagnostics.
void export_csv(const TapTrack& track, const std::string& path);

}  // namespace ambc
