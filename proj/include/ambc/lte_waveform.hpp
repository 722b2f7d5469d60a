#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ambc/dsp.hpp"

namespace ambc {

using dsp::cplx;
using dsp::Exec;

/// Complex baseband sample stream; the signal at every pipeline boundary.
struct IqStream {
    std::vector<cplx> samples;
    double sample_rate = 0.0;
    double t0 = 0.0;
};

enum class TrafficFill { empty, random_qpsk };

/// Downlink cell parameters. Defaults are the 25 RB / 7.68 Msps numerology.
struct CellConfig {
    int pci = 0;
    int n_rb = 25;
    int n_fft = 512;
    int cp0 = 40;  // symbol 0 of each slot
    int cp = 36;   // symbols 1..6
    double subcarrier_spacing = 15000.0;
    double sample_rate = 7.68e6;
    double carrier_freq = 486e6;
    TrafficFill traffic_fill = TrafficFill::random_qpsk;

    int nid2() const { return pci % 3; }
    int n_sc() const { return n_rb * 12; }
    int n_pilots() const { return 2 * n_rb; }
    int samples_per_slot() const { return 7 * n_fft + cp0 + 6 * cp; }
    int samples_per_subframe() const { return 2 * samples_per_slot(); }
    int cp_len(int symbol_in_slot) const { return symbol_in_slot == 0 ? cp0 : cp; }
    int symbol_len(int symbol_in_slot) const { return cp_len(symbol_in_slot) + n_fft; }
    /// Sample offset of a symbol (0..13) within its subframe.
    int symbol_offset(int symbol_in_subframe) const;

    void validate() const;  // throws std::invalid_argument
};

/// Subcarrier x OFDM-symbol grid for one or more subframes.
struct ResourceGrid {
    int n_sc = 0;
    int n_sym = 0;
    std::vector<cplx> cells;  // column-major: cells[k + n_sc * m]
    CellConfig cfg;

    cplx& at(int k, int m) { return cells[std::size_t(k) + std::size_t(n_sc) * m]; }
    const cplx& at(int k, int m) const { return cells[std::size_t(k) + std::size_t(n_sc) * m]; }
    int n_subframes() const { return n_sym / 14; }
};

/// True for the port-0 CRS symbols {0,4,7,11} of a subframe.
bool is_crs_symbol(int symbol_in_subframe);

/// Frequency shift of the CRS comb for a given CRS symbol.
int crs_shift(const CellConfig& cfg, int symbol_in_subframe);

/// Release-8 port-0 CRS QPSK sequence for (slot, symbol) — length 2*n_rb.
std::vector<cplx> crs_sequence(const CellConfig& cfg, int slot, int symbol_in_slot);

/// Length-62 Zadoff-Chu PSS sequence for nid2 in {0,1,2}.
std::vector<cplx> pss_sequence(int nid2);

/// Build a grid of n_subframes. CRS on the port-0 lattice, PSS on symbol 6
/// of every tenth subframe, remaining cells zero or random QPSK per
/// traffic_fill (seeded).
ResourceGrid build_grid(const CellConfig& cfg, int n_subframes, std::uint64_t seed = 0);

/// OFDM synthesis: per-symbol IFFT around DC (DC null) plus cyclic prefix.
IqStream ofdm_modulate(const ResourceGrid& grid, Exec ex = Exec::parallel);

/// Inverse of ofdm_modulate on a clean stream. Demodulates as many whole
/// subframes as fit after frame_start (or n_subframes if >= 0).
ResourceGrid ofdm_demodulate(const IqStream& iq, std::size_t frame_start,
                             const CellConfig& cfg, int n_subframes = -1,
                             Exec ex = Exec::parallel);

/// Demodulate a single symbol (global index m from frame_start); returns the
/// n_sc subcarrier values.
std::vector<cplx> ofdm_demodulate_symbol(const IqStream& iq, std::size_t frame_start,
                                         const CellConfig& cfg, int m);

/// Time-domain PSS replica (n_fft samples, FFT window only, modulator scale).
std::vector<cplx> pss_time_replica(const CellConfig& cfg);

/// Sample offset of the PSS FFT window within its frame.
int pss_window_offset(const CellConfig& cfg);

}  // namespace ambc
