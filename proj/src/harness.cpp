#include "ambc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ambc {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

const std::vector<std::uint8_t>& sync_template_chips() {
    static const std::vector<std::uint8_t> chips = [] {
        std::vector<std::uint8_t> payload(BdFrame::kPayloadBits, 0);
        return frame_build(payload).sync_chips;
    }();
    return chips;
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            cfg.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value");
        cfg.data_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void Config::set(const std::string& dotted_key, const std::string& value) {
    const auto dot = dotted_key.rfind('.');
    if (dot == std::string::npos)
        throw std::invalid_argument("override must be section.key=value");
    data_[dotted_key.substr(0, dot)][dotted_key.substr(dot + 1)] = value;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::string Config::get_str(const std::string& section, const std::string& key,
                            const std::string& def) const {
    const auto s = data_.find(section);
    if (s == data_.end()) return def;
    const auto k = s->second.find(key);
    return k == s->second.end() ? def : k->second;
}

double Config::get_num(const std::string& section, const std::string& key,
                       double def) const {
    const auto v = get_str(section, key, "");
    return v.empty() ? def : std::stod(v);
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long def) const {
    const auto v = get_str(section, key, "");
    return v.empty() ? def : std::stoll(v);
}

std::vector<double> Config::get_list(const std::string& section,
                                     const std::string& key) const {
    std::vector<double> out;
    std::string v = get_str(section, key, "");
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<std::string> Config::sections_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [name, _] : data_)
        if (name.rfind(prefix, 0) == 0) out.push_back(name);
    return out;
}

std::pair<double, double> link_budget(const LinkBudget& lb) {
    if (lb.d_tx_bd_m <= 0 || lb.d_bd_rx_m <= 0 || lb.d_tx_rx_m <= 0)
        throw std::invalid_argument("link_budget: distances must be positive");
    auto fspl_gain = [&](double d) {
        return 20.0 * std::log10(lb.wavelength_m / (4.0 * std::numbers::pi * d));
    };
    const double direct =
        lb.tx_power_dbm + lb.tx_gain_dbi + lb.rx_gain_dbi + fspl_gain(lb.d_tx_rx_m);
    const double back = lb.tx_power_dbm + lb.tx_gain_dbi + 2.0 * lb.bd_gain_dbi +
                        lb.rx_gain_dbi + fspl_gain(lb.d_tx_bd_m) +
                        fspl_gain(lb.d_bd_rx_m) + lb.modulation_loss_db;
    return {direct, back};
}

IqStream ingest_iq(const std::string& path, double sample_rate) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("ingest_iq: cannot open " + path);
    const auto bytes = (std::size_t)in.tellg();
    if (bytes % (2 * sizeof(float)) != 0)
        throw std::runtime_error("ingest_iq: malformed file, trailing " +
                                 std::to_string(bytes % (2 * sizeof(float))) +
                                 " bytes at offset " +
                                 std::to_string(bytes - bytes % (2 * sizeof(float))));
    in.seekg(0);
    std::vector<float> raw(bytes / sizeof(float));
    if (bytes > 0) in.read(reinterpret_cast<char*>(raw.data()), (std::streamsize)bytes);
    IqStream iq;
    iq.sample_rate = sample_rate;
    iq.samples.resize(raw.size() / 2);
    for (std::size_t i = 0; i < iq.samples.size(); ++i)
        iq.samples[i] = cplx(raw[2 * i], raw[2 * i + 1]);
    return iq;
}

void write_iq(const std::string& path, const IqStream& iq) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_iq: cannot open " + path);
    std::vector<float> raw(2 * iq.samples.size());
    for (std::size_t i = 0; i < iq.samples.size(); ++i) {
        raw[2 * i] = float(iq.samples[i].real());
        raw[2 * i + 1] = float(iq.samples[i].imag());
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              (std::streamsize)(raw.size() * sizeof(float)));
}

IqStream simulate_scene(const SceneConfig& sc, Exec ex) {
    sc.cell.validate();
    const double duration =
        sc.guard_pre + BdFrame::kChips * sc.chip_duration + sc.guard_post;
    int n_sf = int(std::ceil(duration * 1000.0 - 1e-9));
    n_sf = ((n_sf + 9) / 10) * 10;  // whole 10 ms frames, keeps the PSS anchor

    const auto grid = build_grid(sc.cell, n_sf, sc.grid_seed);
    auto iq = ofdm_modulate(grid, ex);

    ChannelSpec chan = sc.channel;
    if (chan.bd && chan.bd->amplitude != cplx(0.0, 0.0)) {
        const auto frame = frame_build(sc.payload);
        chan.bd->waveform = bd_waveform(frame, sc.chip_duration, 1.0 / sc.chip_duration, 0.0);
        chan.bd->waveform.t0 = sc.guard_pre;
    }
    auto faded = apply_channel(iq, chan, ex);

    if (!(std::isinf(sc.snr_db) && sc.snr_db > 0)) {
        const double ref =
            std::norm(chan.paths.at(0).amplitude) * mean_power(iq);
        faded = awgn(faded, sc.snr_db, ref, sc.noise_seed);
    }
    return faded;
}

ReceiveOutcome receive_packet(const IqStream& capture, const CellConfig& cfg,
                              double chip_duration, double sync_threshold,
                              std::optional<std::size_t> timing, Exec ex) {
    ReceiveOutcome out;
    try {
        out.timing = timing ? *timing : timing_sync(capture, cfg, 7.0, ex);
        const auto csi = estimate_cir_series(capture, cfg, out.timing, ex);
        out.l0 = csi.tap.l0;
        const auto y = tap_power(csi.tap.samples);
        const auto yf = highpass(y, ex);
        const auto mf = matched_filter(yf, chip_duration);
        const auto sync =
            frame_sync(mf, sync_template_chips(), chip_duration, sync_threshold, ex);
        out.demod = demodulate(yf, sync.frame_start, sync.phase_sign, chip_duration);
        out.demod.sync_metric = sync.sync_metric;
        out.synced = true;
    } catch (const sync_error&) {
        out.synced = false;
    } catch (const no_packet_error&) {
        out.synced = false;
    }
    return out;
}

std::vector<DemodResult> decode_capture(const IqStream& capture, const CellConfig& cfg,
                                        double chip_duration, double sync_threshold,
                                        std::optional<std::size_t> timing, Exec ex) {
    std::vector<DemodResult> results;
    std::size_t anchor;
    try {
        anchor = timing ? *timing : timing_sync(capture, cfg, 7.0, ex);
    } catch (const sync_error&) {
        return results;
    }
    const auto csi = estimate_cir_series(capture, cfg, anchor, ex);
    const auto y = tap_power(csi.tap.samples);
    const auto yf = highpass(y, ex);
    auto mf = matched_filter(yf, chip_duration);
    const int spp = int(std::llround(chip_duration * yf.rate));
    for (int iter = 0; iter < 1000; ++iter) {
        try {
            const auto sync =
                frame_sync(mf, sync_template_chips(), chip_duration, sync_threshold, ex);
            auto demod =
                demodulate(yf, sync.frame_start, sync.phase_sign, chip_duration);
            demod.sync_metric = sync.sync_metric;
            results.push_back(std::move(demod));
            // blank the detected packet span before searching again
            const std::size_t lo =
                sync.frame_start > std::size_t(spp) ? sync.frame_start - std::size_t(spp) : 0;
            const std::size_t hi = std::min(
                mf.values.size(),
                sync.frame_start + std::size_t(BdFrame::kChips + 1) * std::size_t(spp));
            std::fill(mf.values.begin() + long(lo), mf.values.begin() + long(hi), 0.0);
        } catch (const no_packet_error&) {
            break;
        }
    }
    std::sort(results.begin(), results.end(),
              [](const auto& a, const auto& b) { return a.frame_start < b.frame_start; });
    return results;
}

void ExperimentConfig::validate() const {
    if (snr_grid_db.empty()) throw std::invalid_argument("sweep: empty SNR grid");
    if (packets_per_point < 1) throw std::invalid_argument("sweep: packets must be >= 1");
}

ExperimentConfig experiment_from_config(const Config& c) {
    ExperimentConfig ec;
    ec.scene.cell.pci = int(c.get_int("cell", "pci", 0));
    ec.scene.cell.n_rb = int(c.get_int("cell", "n_rb", 25));
    ec.scene.cell.n_fft = int(c.get_int("cell", "n_fft", 512));
    ec.scene.cell.sample_rate =
        c.get_num("cell", "sample_rate",
                  ec.scene.cell.n_fft * ec.scene.cell.subcarrier_spacing);
    ec.scene.cell.carrier_freq = c.get_num("cell", "carrier_freq", 486e6);
    const auto fill = c.get_str("cell", "traffic_fill", "random_qpsk");
    if (fill == "empty") ec.scene.cell.traffic_fill = TrafficFill::empty;
    else if (fill == "random_qpsk") ec.scene.cell.traffic_fill = TrafficFill::random_qpsk;
    else throw std::invalid_argument("cell.traffic_fill: unknown value " + fill);

    ec.scene.payload = bits_from_hex(c.get_str("bd", "payload", "a5a5a5a5"));
    ec.scene.chip_duration = c.get_num("bd", "chip_duration", 0.010);
    ec.scene.guard_pre = c.get_num("bd", "guard_pre", 0.08);
    ec.scene.guard_post = c.get_num("bd", "guard_post", 0.04);

    ec.scene.channel.cfo = c.get_num("channel", "cfo", 0.0);
    if (c.has("channel", "quantizer_bits"))
        ec.scene.channel.quantizer_bits = int(c.get_int("channel", "quantizer_bits", 12));

    auto paths = c.sections_with_prefix("path.");
    std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
        return std::stoi(a.substr(5)) < std::stoi(b.substr(5));
    });
    for (const auto& sec : paths) {
        PathSpec p;
        p.delay = c.get_num(sec, "delay", 0.0);
        p.amplitude = cplx(c.get_num(sec, "amp_re", 1.0), c.get_num(sec, "amp_im", 0.0));
        p.doppler = c.get_num(sec, "doppler", 0.0);
        ec.scene.channel.paths.push_back(p);
    }
    if (ec.scene.channel.paths.empty()) ec.scene.channel.paths.push_back(PathSpec{});
    if (c.has("bdpath", "amp_re") || c.has("bdpath", "amp_im")) {
        BdPathSpec bd;
        bd.delay = c.get_num("bdpath", "delay", 0.0);
        bd.amplitude =
            cplx(c.get_num("bdpath", "amp_re", 0.0), c.get_num("bdpath", "amp_im", 0.0));
        ec.scene.channel.bd = bd;
    }

    ec.snr_grid_db = c.get_list("sweep", "snr_db");
    if (ec.snr_grid_db.empty())
        ec.snr_grid_db.push_back(std::numeric_limits<double>::infinity());
    ec.packets_per_point = int(c.get_int("sweep", "packets", 1));
    ec.seed = std::uint64_t(c.get_int("sweep", "seed", 1));
    ec.sync_threshold = c.get_num("sweep", "sync_threshold", 5.0);
    ec.output_path = c.get_str("sweep", "out", "sweep.csv");
    ec.validate();
    return ec;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, Exec ex) {
    cfg.validate();
    std::vector<SweepRow> rows;
    for (std::size_t p = 0; p < cfg.snr_grid_db.size(); ++p) {
        SweepRow row;
        row.snr_db = cfg.snr_grid_db[p];
        row.packets = cfg.packets_per_point;
        double ber_acc = 0.0, metric_acc = 0.0, snr_acc = 0.0;
        for (int i = 0; i < cfg.packets_per_point; ++i) {
            SceneConfig sc = cfg.scene;
            sc.snr_db = cfg.snr_grid_db[p];
            sc.grid_seed = dsp::mix_seed(cfg.seed, 3 * p + 0, std::uint64_t(i));
            sc.noise_seed = dsp::mix_seed(cfg.seed, 3 * p + 1, std::uint64_t(i));
            std::mt19937_64 rng(dsp::mix_seed(cfg.seed, 3 * p + 2, std::uint64_t(i)));
            sc.payload.resize(BdFrame::kPayloadBits);
            for (auto& b : sc.payload) b = std::uint8_t(rng() & 1u);
            const auto capture = simulate_scene(sc, ex);
            const auto rx = receive_packet(capture, sc.cell, sc.chip_duration,
                                           cfg.sync_threshold, std::nullopt, ex);
            if (rx.synced) {
                ++row.detected;
                ber_acc += ber(rx.demod.payload_bits, sc.payload);
                metric_acc += rx.demod.sync_metric;
                snr_acc += rx.demod.snr_est_db;
            }
        }
        row.mean_ber = row.detected > 0 ? ber_acc / row.detected : 0.5;
        row.mean_sync_metric = row.detected > 0 ? metric_acc / row.detected : 0.0;
        row.mean_snr_est_db = row.detected > 0 ? snr_acc / row.detected : 0.0;
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_sweep_csv: cannot open " + path);
    out << "snr_db,packets,detected,mean_ber,mean_sync_metric,mean_snr_est_db\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6g,%d,%d,%.8g,%.8g,%.8g\n", r.snr_db,
                      r.packets, r.detected, r.mean_ber, r.mean_sync_metric,
                      r.mean_snr_est_db);
        out << buf;
    }
}

}  // namespace ambc
