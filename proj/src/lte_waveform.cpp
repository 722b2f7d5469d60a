#include "ambc/lte_waveform.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ambc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxRb = 110;  // sequence-generation reference bandwidth

/// Gold sequence c(n), n = 0..len-1, with the standard Nc = 1600 discard.
std::vector<std::uint8_t> gold_sequence(std::uint32_t c_init, int len) {
    constexpr int nc = 1600;
    std::vector<std::uint8_t> x1(nc + len + 31), x2(nc + len + 31);
    x1[0] = 1;
    for (int i = 0; i < 31; ++i) x2[i] = (c_init >> i) & 1u;
    for (int n = 0; n + 31 < (int)x1.size(); ++n) {
        x1[n + 31] = x1[n + 3] ^ x1[n];
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n];
    }
    std::vector<std::uint8_t> c(std::size_t(len), 0);
    for (int n = 0; n < len; ++n) c[std::size_t(n)] = x1[nc + n] ^ x2[nc + n];
    return c;
}

/// Map a subcarrier index (0 = lowest occupied) to an FFT bin, skipping DC.
int sc_to_bin(int k, int n_sc, int n_fft) {
    const int half = n_sc / 2;
    const int rel = (k < half) ? k - half : k - half + 1;
    return (rel + n_fft) % n_fft;
}

}  // namespace

int CellConfig::symbol_offset(int symbol_in_subframe) const {
    int off = (symbol_in_subframe >= 7) ? samples_per_slot() : 0;
    for (int s = 0; s < symbol_in_subframe % 7; ++s) off += symbol_len(s);
    return off;
}

void CellConfig::validate() const {
    if (pci < 0 || pci > 503) throw std::invalid_argument("CellConfig: pci out of range");
    if (n_rb * 12 > n_fft) throw std::invalid_argument("CellConfig: n_rb*12 exceeds n_fft");
    if (n_fft <= 0 || (n_fft & (n_fft - 1)) != 0)
        throw std::invalid_argument("CellConfig: n_fft must be a power of two");
    if (std::abs(sample_rate - n_fft * subcarrier_spacing) > 1e-6)
        throw std::invalid_argument("CellConfig: sample_rate != n_fft * subcarrier_spacing");
}

bool is_crs_symbol(int m) { return m == 0 || m == 4 || m == 7 || m == 11; }

int crs_shift(const CellConfig& cfg, int m) {
    if (!is_crs_symbol(m)) throw std::invalid_argument("crs_shift: not a CRS symbol");
    const int v = (m % 7 == 0) ? 0 : 3;
    return (v + cfg.pci % 6) % 6;
}

std::vector<cplx> crs_sequence(const CellConfig& cfg, int slot, int symbol_in_slot) {
    if (slot < 0) throw std::invalid_argument("crs_sequence: negative slot");
    if (symbol_in_slot != 0 && symbol_in_slot != 4)
        throw std::invalid_argument("crs_sequence: symbol must be 0 or 4");
    const int n_s = slot % 20;
    const std::uint32_t c_init =
        1024u * std::uint32_t((7 * (n_s + 1) + symbol_in_slot + 1) * (2 * cfg.pci + 1)) +
        2u * std::uint32_t(cfg.pci) + 1u;
    const auto c = gold_sequence(c_init, 4 * kMaxRb);
    std::vector<cplx> r(std::size_t(cfg.n_pilots()), cplx{});
    const double s = 1.0 / std::sqrt(2.0);
    for (int m = 0; m < cfg.n_pilots(); ++m) {
        const int mp = m + kMaxRb - cfg.n_rb;
        r[std::size_t(m)] = cplx(s * (1.0 - 2.0 * c[std::size_t(2 * mp)]),
                                 s * (1.0 - 2.0 * c[std::size_t(2 * mp + 1)]));
    }
    return r;
}

std::vector<cplx> pss_sequence(int nid2) {
    static constexpr int roots[3] = {25, 29, 34};
    if (nid2 < 0 || nid2 > 2) throw std::invalid_argument("pss_sequence: nid2 must be 0..2");
    const int u = roots[nid2];
    std::vector<cplx> d(62);
    for (int n = 0; n < 62; ++n) {
        const double arg = (n <= 30) ? -kPi * u * n * (n + 1) / 63.0
                                     : -kPi * u * (n + 1) * (n + 2) / 63.0;
        d[std::size_t(n)] = cplx(std::cos(arg), std::sin(arg));
    }
    return d;
}

ResourceGrid build_grid(const CellConfig& cfg, int n_subframes, std::uint64_t seed) {
    cfg.validate();
    if (n_subframes < 1) throw std::invalid_argument("build_grid: n_subframes must be >= 1");
    ResourceGrid g;
    g.cfg = cfg;
    g.n_sc = cfg.n_sc();
    g.n_sym = 14 * n_subframes;
    g.cells.assign(std::size_t(g.n_sc) * std::size_t(g.n_sym), cplx(0.0, 0.0));

    if (cfg.traffic_fill == TrafficFill::random_qpsk) {
        std::mt19937_64 rng(seed);
        const double s = 1.0 / std::sqrt(2.0);
        for (auto& c : g.cells) {
            const auto bits = rng() & 3u;
            c = cplx((bits & 1u) ? -s : s, (bits & 2u) ? -s : s);
        }
    }

    // PSS: symbol 6 of every tenth subframe, 62 central subcarriers
    const auto pss = pss_sequence(cfg.nid2());
    for (int sf = 0; sf < n_subframes; sf += 10) {
        const int m = 14 * sf + 6;
        const int base = g.n_sc / 2 - 31;
        for (int n = 0; n < 62; ++n) g.at(base + n, m) = pss[std::size_t(n)];
    }

    // port-0 CRS lattice
    for (int sf = 0; sf < n_subframes; ++sf) {
        for (int msub : {0, 4, 7, 11}) {
            const int slot = 2 * sf + msub / 7;
            const auto r = crs_sequence(cfg, slot, msub % 7);
            const int shift = crs_shift(cfg, msub);
            for (int i = 0; i < cfg.n_pilots(); ++i)
                g.at(6 * i + shift, 14 * sf + msub) = r[std::size_t(i)];
        }
    }
    return g;
}

IqStream ofdm_modulate(const ResourceGrid& grid, Exec ex) {
    const CellConfig& cfg = grid.cfg;
    IqStream out;
    out.sample_rate = cfg.sample_rate;
    out.samples.assign(std::size_t(grid.n_subframes()) * cfg.samples_per_subframe(),
                       cplx(0.0, 0.0));
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
    for (long long m = 0; m < grid.n_sym; ++m) {
        const int sf = int(m / 14), msub = int(m % 14);
        const int sis = msub % 7;
        std::vector<cplx> bins(std::size_t(cfg.n_fft), cplx(0.0, 0.0));
        for (int k = 0; k < grid.n_sc; ++k)
            bins[std::size_t(sc_to_bin(k, grid.n_sc, cfg.n_fft))] = grid.at(k, int(m));
        dsp::fft(bins, true);
        const std::size_t start =
            std::size_t(sf) * cfg.samples_per_subframe() + cfg.symbol_offset(msub);
        const int cp = cfg.cp_len(sis);
        for (int i = 0; i < cp; ++i)
            out.samples[start + i] = bins[std::size_t(cfg.n_fft - cp + i)];
        for (int i = 0; i < cfg.n_fft; ++i)
            out.samples[start + cp + i] = bins[std::size_t(i)];
    }
    return out;
}

std::vector<cplx> ofdm_demodulate_symbol(const IqStream& iq, std::size_t frame_start,
                                         const CellConfig& cfg, int m) {
    const int sf = m / 14, msub = m % 14;
    const std::size_t start = frame_start +
                              std::size_t(sf) * cfg.samples_per_subframe() +
                              std::size_t(cfg.symbol_offset(msub)) +
                              std::size_t(cfg.cp_len(msub % 7));
    if (start + cfg.n_fft > iq.samples.size())
        throw std::runtime_error("ofdm_demodulate: stream too short");
    std::vector<cplx> bins(iq.samples.begin() + long(start),
                           iq.samples.begin() + long(start) + cfg.n_fft);
    dsp::fft(bins, false);
    std::vector<cplx> sc(std::size_t(cfg.n_sc()), cplx{});
    for (int k = 0; k < cfg.n_sc(); ++k)
        sc[std::size_t(k)] = bins[std::size_t(sc_to_bin(k, cfg.n_sc(), cfg.n_fft))];
    return sc;
}

ResourceGrid ofdm_demodulate(const IqStream& iq, std::size_t frame_start,
                             const CellConfig& cfg, int n_subframes, Exec ex) {
    if (frame_start >= iq.samples.size())
        throw std::runtime_error("ofdm_demodulate: frame_start past end of stream");
    const int avail =
        int((iq.samples.size() - frame_start) / std::size_t(cfg.samples_per_subframe()));
    if (n_subframes < 0) n_subframes = avail;
    if (n_subframes < 1 || n_subframes > avail)
        throw std::runtime_error("ofdm_demodulate: stream too short");
    ResourceGrid g;
    g.cfg = cfg;
    g.n_sc = cfg.n_sc();
    g.n_sym = 14 * n_subframes;
    g.cells.assign(std::size_t(g.n_sc) * std::size_t(g.n_sym), cplx(0.0, 0.0));
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
    for (long long m = 0; m < g.n_sym; ++m) {
        const auto sc = ofdm_demodulate_symbol(iq, frame_start, cfg, int(m));
        for (int k = 0; k < g.n_sc; ++k) g.at(k, int(m)) = sc[std::size_t(k)];
    }
    return g;
}

std::vector<cplx> pss_time_replica(const CellConfig& cfg) {
    const auto pss = pss_sequence(cfg.nid2());
    std::vector<cplx> bins(std::size_t(cfg.n_fft), cplx(0.0, 0.0));
    const int base = cfg.n_sc() / 2 - 31;
    for (int n = 0; n < 62; ++n)
        bins[std::size_t(sc_to_bin(base + n, cfg.n_sc(), cfg.n_fft))] = pss[std::size_t(n)];
    dsp::fft(bins, true);
    return bins;
}

int pss_window_offset(const CellConfig& cfg) {
    return cfg.symbol_offset(6) + cfg.cp_len(6);
}

}  // namespace ambc
