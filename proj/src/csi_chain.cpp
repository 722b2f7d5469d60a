#include "ambc/csi_chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace ambc {

namespace {

constexpr double kPi = std::numbers::pi;

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + long(mid), v.end());
    return v[mid];
}

}  // namespace

std::size_t timing_sync(const IqStream& iq, const CellConfig& cfg, double threshold,
                        Exec ex) {
    // Correlate against the full deterministic 10 ms reference (CRS lattice
    // plus the PSS anchor, no traffic). The wide CRS comb sharpens the peak
    // to about one sample and carries far more energy than the PSS alone,
    // which is what makes low-SNR timing work.
    const std::size_t period = std::size_t(10) * cfg.samples_per_subframe();
    if (iq.samples.size() < 2 * period)
        throw sync_error("timing_sync: stream shorter than two 10 ms periods");
    CellConfig ref_cfg = cfg;
    ref_cfg.traffic_fill = TrafficFill::empty;
    const auto rep = ofdm_modulate(build_grid(ref_cfg, 10, 0), ex).samples;
    // ~30 reference periods are plenty of folding gain; cap the search span
    const std::size_t span =
        std::min(iq.samples.size(), std::size_t(30) * period + rep.size());
    const auto corr =
        dsp::xcorr(std::span<const cplx>(iq.samples.data(), span), rep, ex);
    std::vector<double> folded(period, 0.0);
    std::vector<int> count(period, 0);
    for (std::size_t j = 0; j < corr.size(); ++j) {
        folded[j % period] += std::abs(corr[j]);
        ++count[j % period];
    }
    for (std::size_t j = 0; j < period; ++j)
        if (count[j] > 0) folded[j] /= double(count[j]);

    std::size_t peak = 0;
    for (std::size_t j = 1; j < period; ++j)
        if (folded[j] > folded[peak]) peak = j;

    // robust z-score of the peak against the folded background
    const double med = median_of(folded);
    double var = 0.0;
    std::size_t cnt = 0;
    for (std::size_t j = 0; j < period; ++j) {
        const std::size_t d = j > peak ? j - peak : peak - j;
        if (d <= 2 || d >= period - 2) continue;
        var += (folded[j] - med) * (folded[j] - med);
        ++cnt;
    }
    const double sd = cnt > 0 ? std::sqrt(var / double(cnt)) : 0.0;
    const bool detected =
        sd > 0.0 ? (folded[peak] - med) / sd >= threshold : folded[peak] > med;
    if (!detected) throw sync_error("timing_sync: no correlation peak above threshold");

    return peak;  // the reference starts at a frame boundary
}

FreqEstimate extract_crs_ls(const ResourceGrid& rx_grid, const CellConfig& cfg, int m) {
    const int msub = m % 14;
    if (!is_crs_symbol(msub))
        throw std::invalid_argument("extract_crs_ls: not a CRS-bearing symbol");
    if (m < 0 || m >= rx_grid.n_sym)
        throw std::invalid_argument("extract_crs_ls: symbol outside the grid");
    const int slot = m / 7;
    const auto ref = crs_sequence(cfg, slot, msub % 7);
    const int shift = crs_shift(cfg, msub);
    FreqEstimate est;
    est.symbol_index = m;
    est.pilot_values.resize(std::size_t(cfg.n_pilots()));
    est.pilot_indices.resize(std::size_t(cfg.n_pilots()));
    for (int i = 0; i < cfg.n_pilots(); ++i) {
        const int k = 6 * i + shift;
        est.pilot_indices[std::size_t(i)] = k;
        est.pilot_values[std::size_t(i)] = rx_grid.at(k, m) / ref[std::size_t(i)];
    }
    return est;
}

std::vector<cplx> cir_from_freq(const FreqEstimate& est, const CellConfig& cfg) {
    const int n = cfg.n_pilots();
    if ((int)est.pilot_values.size() != n)
        throw std::invalid_argument("cir_from_freq: incomplete pilot lattice");
    const int shift = est.pilot_indices.empty() ? 0 : est.pilot_indices[0] % 6;
    // twiddle tables: exponents only ever take n (resp. 12n) distinct values
    thread_local std::vector<cplx> tw;
    thread_local int tw_n = -1;
    if (tw_n != n) {
        tw.resize(std::size_t(n));
        for (int r = 0; r < n; ++r) {
            const double ang = 2.0 * kPi * double(r) / double(n);
            tw[std::size_t(r)] = cplx(std::cos(ang), std::sin(ang));
        }
        tw_n = n;
    }
    std::vector<cplx> taps(std::size_t(n), cplx(0.0, 0.0));
    for (int l = 0; l < n; ++l) {
        cplx acc(0.0, 0.0);
        for (int m = 0; m < n; ++m)
            acc += est.pilot_values[std::size_t(m)] * tw[std::size_t((m * l) % n)];
        acc /= double(n);
        // comb offset derotation (signed bin keeps negative-delay aliases coherent)
        const int ls = (l <= n / 2) ? l : l - n;
        const double dang = 2.0 * kPi * double(shift) * double(ls) / double(6 * n);
        taps[std::size_t(l)] = acc * cplx(std::cos(dang), std::sin(dang));
    }
    return taps;
}

int tap_select(const CirSeries& series) {
    if (series.taps.empty()) throw std::invalid_argument("tap_select: empty series");
    const int n = series.n_bins;
    std::vector<double> power(std::size_t(n), 0.0);
    for (const auto& t : series.taps)
        for (int l = 0; l < n; ++l) power[std::size_t(l)] += std::norm(t[std::size_t(l)]);
    int best = 0;
    for (int l = 1; l < n; ++l)
        if (power[std::size_t(l)] > power[std::size_t(best)]) best = l;
    return best;
}

const std::vector<double>& interpolation_taps() {
    static const std::vector<double> taps = dsp::lowpass_taps(129, 1000.0, 14000.0, 5.0);
    return taps;
}

std::vector<cplx> interpolate_taps(const CirSeries& series, int l0, Exec ex) {
    if (series.n_subframes < 2)
        throw std::invalid_argument("interpolate_taps: need at least 2 subframes");
    if (l0 < 0 || l0 >= series.n_bins)
        throw std::invalid_argument("interpolate_taps: tap index out of range");
    const std::size_t n = std::size_t(14) * std::size_t(series.n_subframes);
    std::vector<cplx> lattice(n, cplx(0.0, 0.0));
    std::vector<bool> have(n, false);
    for (std::size_t e = 0; e < series.taps.size(); ++e) {
        const auto idx = std::size_t(series.symbol_indices[e]);
        lattice[idx] = series.taps[e][std::size_t(l0)];
        have[idx] = true;
    }
    // zero-order hold between estimates (and backfill before the first)
    cplx last(0.0, 0.0);
    bool seen = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (have[i]) {
            last = lattice[i];
            if (!seen) std::fill(lattice.begin(), lattice.begin() + long(i), last);
            seen = true;
        } else if (seen) {
            lattice[i] = last;
        }
    }
    return dsp::fir_filter(std::span<const cplx>(lattice), interpolation_taps(), ex);
}

CsiResult estimate_cir_series(const IqStream& iq, const CellConfig& cfg,
                              std::size_t timing, Exec ex) {
    if (timing >= iq.samples.size())
        throw std::invalid_argument("estimate_cir_series: timing past end of stream");
    const int n_sf =
        int((iq.samples.size() - timing) / std::size_t(cfg.samples_per_subframe()));
    if (n_sf < 2) throw std::runtime_error("estimate_cir_series: need at least 2 subframes");

    CsiResult res;
    res.raw.n_bins = cfg.n_pilots();
    res.raw.n_subframes = n_sf;
    const int n_est = 4 * n_sf;
    res.raw.taps.resize(std::size_t(n_est));
    res.raw.symbol_indices.resize(std::size_t(n_est));
    res.raw.symbol_times.resize(std::size_t(n_est));

    static constexpr int kCrsSymbols[4] = {0, 4, 7, 11};
#pragma omp parallel for schedule(static) if (ex == Exec::parallel)
    for (long long e = 0; e < n_est; ++e) {
        const int sf = int(e / 4);
        const int msub = kCrsSymbols[e % 4];
        const int m = 14 * sf + msub;
        const auto sc = ofdm_demodulate_symbol(iq, timing, cfg, m);
        const auto ref = crs_sequence(cfg, m / 7, msub % 7);
        const int shift = crs_shift(cfg, msub);
        FreqEstimate est;
        est.symbol_index = m;
        est.pilot_values.resize(std::size_t(cfg.n_pilots()));
        est.pilot_indices.resize(std::size_t(cfg.n_pilots()));
        for (int i = 0; i < cfg.n_pilots(); ++i) {
            const int k = 6 * i + shift;
            est.pilot_indices[std::size_t(i)] = k;
            est.pilot_values[std::size_t(i)] = sc[std::size_t(k)] / ref[std::size_t(i)];
        }
        res.raw.taps[std::size_t(e)] = cir_from_freq(est, cfg);
        res.raw.symbol_indices[std::size_t(e)] = m;
        res.raw.symbol_times[std::size_t(e)] =
            (double(timing) + sf * double(cfg.samples_per_subframe()) +
             cfg.symbol_offset(msub) + cfg.cp_len(msub % 7)) /
            cfg.sample_rate;
    }

    res.tap.l0 = tap_select(res.raw);
    res.tap.samples = interpolate_taps(res.raw, res.tap.l0, ex);
    res.tap.rate = 14000.0;
    return res;
}

void export_csv(const TapTrack& track, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_csv: cannot open " + path);
    out << "time_s,re,im\n";
    char line[96];
    for (std::size_t i = 0; i < track.samples.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.9f,%.12g,%.12g\n", double(i) / track.rate,
                      track.samples[i].real(), track.samples[i].imag());
        out << line;
    }
}

}  // namespace ambc
