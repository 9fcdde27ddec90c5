#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "beaconfold/channel.hpp"
#include "beaconfold/modem.hpp"
#include "beaconfold/multiplex.hpp"

namespace beaconfold {

// 95% Wilson interval half-width for errors/trials.
double wilson_halfwidth(int errors, int trials);

struct ExperimentConfig {
    Variant variant = Variant::freebee;
    IntervalConfig interval;
    int rho_min = 1;
    int rho_max = 8;
    std::vector<double> occupancies;
    int trials = 1000;
    std::uint64_t seed = 1;
    ChannelModel model;  // occupancy is overridden per grid point
    std::string out_path;

    void validate() const;
};

struct SerPoint {
    int rho = 0;
    double occupancy = 0.0;
    double duration_s = 0.0;  // rho*T (FreeBee) or rho*2T (A-FreeBee)
    int trials = 0;
    int errors = 0;

    double ser() const { return trials ? static_cast<double>(errors) / trials : 0.0; }
    double wilson() const { return wilson_halfwidth(errors, trials); }
};

// One modulate -> render -> edge-filter -> demodulate round; true iff the
// decoded symbol matches the transmitted one. noise_rate < 0 recalibrates.
bool run_symbol_trial(Variant variant, const IntervalConfig& cfg,
                      const ChannelModel& model, int rho,
                      std::uint64_t trial_seed, double noise_rate_per_us = -1.0);

// Per-trial seed used by ser_sweep for grid point `point_idx`, trial `t`.
// Exposed so a serial trial loop can reproduce the sweep bit-for-bit.
std::uint64_t sweep_trial_seed(std::uint64_t root, std::uint64_t point_idx,
                               std::uint64_t t);

// Monte-Carlo SER over the (rho, occupancy) grid; deterministic per seed.
std::vector<SerPoint> ser_sweep(const ExperimentConfig& cfg);

void write_ser_csv(const std::vector<SerPoint>& points, const ExperimentConfig& cfg,
                   std::ostream& out);

struct RateRow {
    int sender_id = -1;  // -1 marks the aggregate row
    int x = 0;
    double interval_s = 0.0;
    double bps_exact = 0.0;
    double bps_floor = 0.0;
};

std::vector<RateRow> throughput_report(const IntervalAssignment& assignment,
                                       int rho, Variant variant);
void write_rate_csv(const std::vector<RateRow>& rows, Variant variant, int rho,
                    std::ostream& out);

// Concurrent-sender Monte Carlo: every sender transmits a random symbol each
// trial; per-sender symbol errors are counted after demux.
struct MultiplexStats {
    std::map<int, int> errors;
    int trials = 0;
};
MultiplexStats multiplex_trials(const IntervalAssignment& assignment,
                                const ChannelModel& model, int rho, int trials,
                                std::uint64_t seed, DemuxMode mode);

// Smallest duty-cycle active fraction (0.5% grid) at which >= success_bar of
// trials decode every sender within the contact window.
struct DutyResult {
    bool achieved = false;
    double active_fraction = 1.0;
};
DutyResult duty_cycle_experiment(const IntervalAssignment& assignment,
                                 const ChannelModel& model, double contact_window_s,
                                 std::uint64_t seed, int trials_per_point = 100,
                                 std::int64_t duty_period_us = 1'000'000,
                                 double success_bar = 0.99);

// Receiver memory and per-sample work for one symbol.
struct OverheadReport {
    int lambda = 0;
    int rho = 0;
    std::int64_t storage_bits = 0;
    std::int64_t storage_bytes = 0;
    int ops_per_sample = 2;  // one fetch, one add
    std::int64_t scan_ops = 0;  // final linear max scan over the fold period
};
OverheadReport overhead_report(const IntervalConfig& cfg, int rho, Variant variant);
// Multiplexed reception buffers rho * lambda_max samples.
OverheadReport overhead_report(const IntervalAssignment& assignment, int rho);

}  // namespace beaconfold
