#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ambc/harness.hpp"

namespace {

constexpr const char* kConfigEnv = "AMBC_CONFIG";

ambc::Config load_config(const std::string& path_flag,
                         const std::vector<std::string>& overrides) {
    std::string path = path_flag;
    if (path.empty()) {
        if (const char* env = std::getenv(kConfigEnv)) path = env;
    }
    ambc::Config cfg = path.empty() ? ambc::Config{} : ambc::Config::load(path);
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects section.key=value, got: " + ov);
        cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
    }
    return cfg;
}

int cmd_generate(const ambc::Config& cfg, const std::string& out_path) {
    auto ec = ambc::experiment_from_config(cfg);
    ambc::SceneConfig sc = ec.scene;
    sc.snr_db = cfg.get_num("scene", "snr_db",
                            std::numeric_limits<double>::infinity());
    sc.grid_seed = std::uint64_t(cfg.get_int("scene", "grid_seed", 1));
    sc.noise_seed = std::uint64_t(cfg.get_int("scene", "noise_seed", 1));
    const auto iq = ambc::simulate_scene(sc);
    ambc::write_iq(out_path, iq);
    std::cout << "wrote " << iq.samples.size() << " samples (" << out_path << ")\n";
    return 0;
}

int cmd_decode(const ambc::Config& cfg, const std::string& in_path,
               const std::string& out_path) {
    ambc::ExperimentConfig ec = ambc::experiment_from_config(cfg);
    const auto iq = ambc::ingest_iq(in_path, ec.scene.cell.sample_rate);
    const auto packets = ambc::decode_capture(iq, ec.scene.cell,
                                              ec.scene.chip_duration,
                                              ec.sync_threshold);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot open " + out_path);
        out = &file;
    }
    *out << "capture_id,frame_start,sync_metric,snr_est_db,payload_hex\n";
    for (const auto& p : packets) *out << ambc::demod_csv_row(in_path, p) << "\n";
    return packets.empty() ? 2 : 0;
}

int cmd_sweep(const ambc::Config& cfg, const std::string& out_override) {
    auto ec = ambc::experiment_from_config(cfg);
    if (!out_override.empty()) ec.output_path = out_override;
    const auto rows = ambc::run_sweep(ec);
    ambc::write_sweep_csv(ec.output_path, rows);
    int total_detected = 0;
    for (const auto& r : rows) total_detected += r.detected;
    std::cout << "wrote " << rows.size() << " rows (" << ec.output_path << ")\n";
    return total_detected > 0 ? 0 : 2;
}

int cmd_linkbudget(const ambc::Config& cfg) {
    ambc::LinkBudget lb;
    lb.tx_power_dbm = cfg.get_num("linkbudget", "tx_power_dbm", lb.tx_power_dbm);
    lb.tx_gain_dbi = cfg.get_num("linkbudget", "tx_gain_dbi", lb.tx_gain_dbi);
    lb.bd_gain_dbi = cfg.get_num("linkbudget", "bd_gain_dbi", lb.bd_gain_dbi);
    lb.rx_gain_dbi = cfg.get_num("linkbudget", "rx_gain_dbi", lb.rx_gain_dbi);
    lb.wavelength_m = cfg.get_num("linkbudget", "wavelength_m", lb.wavelength_m);
    lb.d_tx_bd_m = cfg.get_num("linkbudget", "d_tx_bd_m", lb.d_tx_bd_m);
    lb.d_bd_rx_m = cfg.get_num("linkbudget", "d_bd_rx_m", lb.d_bd_rx_m);
    lb.d_tx_rx_m = cfg.get_num("linkbudget", "d_tx_rx_m", lb.d_tx_rx_m);
    lb.modulation_loss_db =
        cfg.get_num("linkbudget", "modulation_loss_db", lb.modulation_loss_db);
    const auto [direct, back] = ambc::link_budget(lb);
    std::printf("direct_rx_power_dbm=%.4f\n", direct);
    std::printf("backscatter_rx_power_dbm=%.4f\n", back);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ambient backscatter over LTE downlink: simulator and receiver"};
    app.fallthrough();  // allow -c/--set after the subcommand name too
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path,
                   "Config file (default: $" + std::string(kConfigEnv) + ")");
    app.add_option("--set", overrides, "Override section.key=value")->take_all();

    std::string gen_out = "capture.iq";
    auto* gen = app.add_subcommand("generate", "Simulate a scene and write an IQ capture");
    gen->add_option("-o,--out", gen_out, "Output IQ file");

    std::string dec_in, dec_out;
    auto* dec = app.add_subcommand("decode", "Decode packets from an IQ capture");
    dec->add_option("input", dec_in, "Input IQ file")->required();
    dec->add_option("-o,--out", dec_out, "Packets CSV (default: stdout)");

    std::string sweep_out;
    auto* swp = app.add_subcommand("sweep", "Run a BER-vs-SNR sweep");
    swp->add_option("-o,--out", sweep_out, "Results CSV (default: from config)");

    auto* lbc = app.add_subcommand("linkbudget", "Compute received powers");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = load_config(config_path, overrides);
        if (gen->parsed()) return cmd_generate(cfg, gen_out);
        if (dec->parsed()) return cmd_decode(cfg, dec_in, dec_out);
        if (swp->parsed()) return cmd_sweep(cfg, sweep_out);
        if (lbc->parsed()) return cmd_linkbudget(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
