#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ambc/bd_rx.hpp"
#include "ambc/propagation.hpp"

namespace ambc {

/// Flat sectioned key=value config with dotted-path overrides.
class Config {
  public:
    static Config load(const std::string& path);
    static Config parse(const std::string& text);

    void set(const std::string& dotted_key, const std::string& value);
    bool has(const std::string& section, const std::string& key) const;
    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& def) const;
    double get_num(const std::string& section, const std::string& key, double def) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long def) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;
    std::vector<std::string> sections_with_prefix(const std::string& prefix) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

struct LinkBudget {
    double tx_power_dbm = 15.0;
    double tx_gain_dbi = 0.0;
    double bd_gain_dbi = 0.0;
    double rx_gain_dbi = 0.0;
    double wavelength_m = 0.617;
    double d_tx_bd_m = 1.0;
    double d_bd_rx_m = 1.0;
    double d_tx_rx_m = 1.0;
    double modulation_loss_db = 0.0;
};

/// Free-space (exponent 2) received powers: {direct_dbm, backscatter_dbm}.
std::pair<double, double> link_budget(const LinkBudget& lb);

/// Raw interleaved complex float32 little-endian, no header.
IqStream ingest_iq(const std::string& path, double sample_rate);
void write_iq(const std::string& path, const IqStream& iq);

/// One simulated capture: LTE downlink plus one backscatter packet.
struct SceneConfig {
    CellConfig cell;
    ChannelSpec channel;  // bd amplitude/delay set; waveform filled per packet
    std::vector<std::uint8_t> payload;
    double chip_duration = 0.010;
    double guard_pre = 0.08;   // seconds of unmodulated signal before the packet
    double guard_post = 0.04;
    double snr_db = std::numeric_limits<double>::infinity();  // LTE-level SNR
    std::uint64_t grid_seed = 1;
    std::uint64_t noise_seed = 1;
};

IqStream simulate_scene(const SceneConfig& sc, Exec ex = Exec::parallel);

/// Full receive chain over a capture at a known or PSS-derived timing.
struct ReceiveOutcome {
    bool synced = false;
    DemodResult demod;
    std::size_t timing = 0;
    int l0 = 0;
};

ReceiveOutcome receive_packet(const IqStream& capture, const CellConfig& cfg,
                              double chip_duration, double sync_threshold = 5.0,
                              std::optional<std::size_t> timing = std::nullopt,
                              Exec ex = Exec::parallel);

/// All packets in a capture (greedy peak removal until nothing clears the
/// threshold). Sync failure yields an empty list, not an error.
std::vector<DemodResult> decode_capture(const IqStream& capture, const CellConfig& cfg,
                                        double chip_duration, double sync_threshold = 5.0,
                                        std::optional<std::size_t> timing = std::nullopt,
                                        Exec ex = Exec::parallel);

struct ExperimentConfig {
    SceneConfig scene;
    std::vector<double> snr_grid_db;
    int packets_per_point = 1;
    std::uint64_t seed = 1;
    double sync_threshold = 5.0;
    std::string output_path;

    void validate() const;
};

/// Parse the [cell]/[bd]/[channel]/[path.N]/[bdpath]/[sweep] sections.
ExperimentConfig experiment_from_config(const Config& cfg);

struct SweepRow {
    double snr_db = 0.0;
    int packets = 0;
    int detected = 0;
    double mean_ber = 0.0;
    double mean_sync_metric = 0.0;
    double mean_snr_est_db = 0.0;
};

/// Monte-Carlo BER sweep: per point and packet, fresh payload/grid/noise
/// seeds derived deterministically from the master seed.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, Exec ex = Exec::parallel);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace ambc
