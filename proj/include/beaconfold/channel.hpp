#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "beaconfold/modem.hpp"
#include "beaconfold/signal.hpp"

namespace beaconfold {

using Rng = std::mt19937_64;

// Deterministic substream derivation from one root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0);

// Stochastic description of the shared channel as the receiver sees it:
// background occupancy, sender access delays, and packet airtimes.
struct ChannelModel {
    double occupancy = 0.0;  // target busy fraction B before edge filtering
    // Access delay: with probability p_fast uniform in [1, fast_max_delay_us)
    // (DIFS plus a short residual backoff on an idle channel), otherwise the
    // sender waits out residual airtime of in-flight traffic: tail_floor plus
    // an exponential (mean tail_mean_us) capped at tail_cap_us total. A
    // per-sender backoff draw is added on top.
    double p_fast = 0.9;
    std::int64_t fast_max_delay_us = 128;
    std::int64_t tail_floor_us = 0;
    double tail_mean_us = 512.0;
    std::int64_t tail_cap_us = 5000;
    std::int64_t max_backoff_us = 0;  // 10000 for Bluetooth senders
    // Background data packet airtime, uniform over [min, max] in whole samples.
    std::int64_t min_packet_us = 2 * 128;
    std::int64_t max_packet_us = 24 * 128;
    std::int64_t beacon_len_us = 128;
    // CSMA consistency: background is cleared for this long before each
    // beacon start, since a sender only transmits after sensing idle.
    std::int64_t vacancy_us = 256;
    std::uint64_t rng_seed = 1;

    void validate() const;
    double mean_packet_us() const;

    static ChannelModel ideal();             // zero delay, zero occupancy
    static ChannelModel bluetooth_sender();  // random backoff up to 10 ms
};

struct DutyCycleSchedule {
    std::int64_t period_us = 1'000'000;
    double active_fraction = 1.0;  // in (0, 1]
    std::int64_t phase_us = 0;

    void validate() const;
    bool active_at(std::int64_t t_us) const;
};

struct BusyInterval {
    std::int64_t begin_us;
    std::int64_t end_us;  // exclusive
};

std::int64_t sample_access_delay(const ChannelModel& model, Rng& rng);

// Poisson packet-arrival rate (per microsecond) whose long-run busy fraction
// matches model.occupancy within 1% relative. Deterministic per seed.
double calibrate_noise_rate(const ChannelModel& model);

// Memoryless packet arrivals over [0, duration); overlapping packets merge.
std::vector<BusyInterval> gen_background(const ChannelModel& model,
                                         std::int64_t duration_us, Rng& rng,
                                         double rate_per_us = -1.0);

// Rasterizes beacon schedules plus background into a binary trace covering
// [origin_time_us, origin_time_us + duration_us). The receiver point-samples
// the channel every sample_period_us: bin j is busy iff some airtime interval
// covers the instant origin + j * sample_period. Each beacon is delayed by
// an access-delay draw; background is clipped idle in the vacancy window
// before each beacon start. Duty-cycled bins are recorded asleep and forced 0.
RssiTrace render(const std::vector<BeaconSchedule>& schedules,
                 const ChannelModel& model, std::int64_t duration_us, Rng& rng,
                 const DutyCycleSchedule* duty = nullptr,
                 std::int64_t origin_time_us = 0,
                 std::int64_t sample_period_us = 128,
                 double noise_rate_per_us = -1.0);

}  // namespace beaconfold
