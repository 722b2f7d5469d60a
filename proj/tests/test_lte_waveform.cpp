#include <doctest.h>

#include <cmath>
#include <complex>
#include <set>

#include "ambc/lte_waveform.hpp"

using namespace ambc;

namespace {

CellConfig default_cell(int pci = 0) {
    CellConfig c;
    c.pci = pci;
    return c;
}

// Same subcarrier->FFT-bin convention as the modulator (DC null).
int signed_bin(int k, int n_sc) {
    const int half = n_sc / 2;
    return (k < half) ? k - half : k - half + 1;
}

}  // namespace

TEST_CASE("slot and subframe sample budgets") {
    const auto cfg = default_cell();
    CHECK(cfg.samples_per_slot() == 3840);
    CHECK(cfg.samples_per_subframe() == 7680);
    CHECK(cfg.n_pilots() == 50);
    CHECK(cfg.n_sc() == 300);
}

TEST_CASE("crs_sequence is deterministic and unit-magnitude") {
    const auto cfg = default_cell(17);
    const auto a = crs_sequence(cfg, 3, 0);
    const auto b = crs_sequence(cfg, 3, 0);
    REQUIRE(a.size() == 50);
    CHECK(a == b);
    for (const auto& v : a) CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
}

TEST_CASE("crs_sequence differs across cell identities") {
    const auto a = crs_sequence(default_cell(0), 0, 0);
    const auto b = crs_sequence(default_cell(1), 0, 0);
    int diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-9) ++diff;
    CHECK(diff >= 1);
}

TEST_CASE("crs_sequence rejects invalid symbol indices") {
    CHECK_THROWS_AS(crs_sequence(default_cell(), 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(crs_sequence(default_cell(), -1, 0), std::invalid_argument);
}

TEST_CASE("build_grid places exactly 200 pilot cells per subframe") {
    auto cfg = default_cell(5);
    cfg.traffic_fill = TrafficFill::empty;
    const auto g = build_grid(cfg, 1);
    int nonzero = 0;
    for (int m = 0; m < g.n_sym; ++m)
        for (int k = 0; k < g.n_sc; ++k)
            if (std::abs(g.at(k, m)) > 0.0 && m != 6) ++nonzero;  // symbol 6 carries PSS
    CHECK(nonzero == 200);
}

TEST_CASE("pilot lattice matches the port-0 pattern for every shift class") {
    for (int pci = 0; pci < 6; ++pci) {
        auto cfg = default_cell(pci);
        cfg.traffic_fill = TrafficFill::empty;
        const auto g = build_grid(cfg, 1);
        for (int msub : {0, 4, 7, 11}) {
            const int v = (msub % 7 == 0) ? 0 : 3;
            std::set<int> expect;
            for (int m = 0; m < cfg.n_pilots(); ++m) expect.insert(6 * m + (v + pci % 6) % 6);
            std::set<int> got;
            for (int k = 0; k < g.n_sc; ++k)
                if (std::abs(g.at(k, msub)) > 0.0) got.insert(k);
            CHECK(got == expect);
        }
    }
}

TEST_CASE("pci 0 vs pci 3: pilot subcarriers shift by 3") {
    auto c0 = default_cell(0), c3 = default_cell(3);
    c0.traffic_fill = c3.traffic_fill = TrafficFill::empty;
    const auto g0 = build_grid(c0, 1);
    const auto g3 = build_grid(c3, 1);
    for (int k = 0; k + 3 < g0.n_sc; ++k) {
        const bool occ0 = std::abs(g0.at(k, 0)) > 0.0;
        const bool occ3 = std::abs(g3.at(k + 3, 0)) > 0.0;
        CHECK(occ0 == occ3);
    }
}

TEST_CASE("pss_sequence is constant-amplitude and separable across roots") {
    for (int nid2 = 0; nid2 < 3; ++nid2) {
        const auto d = pss_sequence(nid2);
        REQUIRE(d.size() == 62);
        for (const auto& v : d) CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
    }
    const auto a = pss_sequence(0);
    const auto b = pss_sequence(1);
    cplx self(0.0, 0.0), cross(0.0, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        self += a[i] * std::conj(a[i]);
        cross += a[i] * std::conj(b[i]);
    }
    CHECK(std::abs(self) > 5.0 * std::abs(cross));
}

TEST_CASE("pss_sequence rejects invalid nid2") {
    CHECK_THROWS_AS(pss_sequence(3), std::invalid_argument);
    CHECK_THROWS_AS(pss_sequence(-1), std::invalid_argument);
}

TEST_CASE("ofdm_modulate: one subframe yields 7680 samples") {
    const auto g = build_grid(default_cell(), 1, 9);
    const auto iq = ofdm_modulate(g);
    CHECK(iq.samples.size() == 7680);
    CHECK(iq.sample_rate == doctest::Approx(7.68e6));
}

TEST_CASE("ofdm_modulate: all-zero grid gives an all-zero stream") {
    ResourceGrid g;
    g.cfg = default_cell();
    g.n_sc = g.cfg.n_sc();
    g.n_sym = 14;
    g.cells.assign(std::size_t(g.n_sc) * 14, cplx(0.0, 0.0));
    const auto iq = ofdm_modulate(g);
    for (const auto& s : iq.samples) CHECK(std::abs(s) == 0.0);
}

TEST_CASE("modulate/demodulate round trip is exact to 1e-9") {
    const auto g = build_grid(default_cell(101), 2, 42);
    const auto iq = ofdm_modulate(g);
    const auto g2 = ofdm_demodulate(iq, 0, g.cfg);
    REQUIRE(g2.n_sym == g.n_sym);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
        num += std::norm(g2.cells[i] - g.cells[i]);
        den += std::norm(g.cells[i]);
    }
    CHECK(std::sqrt(num / den) < 1e-9);
}

TEST_CASE("serial and parallel modulators agree") {
    const auto g = build_grid(default_cell(3), 2, 5);
    const auto a = ofdm_modulate(g, Exec::serial);
    const auto b = ofdm_modulate(g, Exec::parallel);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(std::abs(a.samples[i] - b.samples[i]) == 0.0);
}

TEST_CASE("one-sample timing error appears as a linear phase ramp") {
    auto cfg = default_cell(2);
    cfg.traffic_fill = TrafficFill::empty;
    const auto g = build_grid(cfg, 1);
    const auto iq = ofdm_modulate(g);
    IqStream late;
    late.sample_rate = iq.sample_rate;
    late.samples.push_back(cplx(0.0, 0.0));  // delay the stream by one sample
    late.samples.insert(late.samples.end(), iq.samples.begin(), iq.samples.end());
    const auto sc = ofdm_demodulate_symbol(late, 0, cfg, 0);
    for (int k = 0; k < g.n_sc; ++k) {
        if (std::abs(g.at(k, 0)) == 0.0) continue;
        const double ang = -2.0 * M_PI * double(signed_bin(k, g.n_sc)) / double(cfg.n_fft);
        const cplx want = g.at(k, 0) * cplx(std::cos(ang), std::sin(ang));
        CHECK(std::abs(sc[std::size_t(k)] - want) < 1e-9);
    }
}

TEST_CASE("ofdm_demodulate rejects truncated input") {
    const auto g = build_grid(default_cell(), 1, 1);
    auto iq = ofdm_modulate(g);
    iq.samples.resize(7000);
    CHECK_THROWS(ofdm_demodulate(iq, 0, g.cfg, 1));
}

TEST_CASE("CellConfig validation") {
    auto cfg = default_cell();
    cfg.pci = 504;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = default_cell();
    cfg.n_rb = 50;  // 600 subcarriers > 512-point transform
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = default_cell();
    cfg.sample_rate = 1e6;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
