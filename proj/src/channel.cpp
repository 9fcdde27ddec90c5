#include "beaconfold/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beaconfold {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(root) ^ a) ^ b);
}

void ChannelModel::validate() const {
    if (occupancy < 0.0 || occupancy >= 1.0)
        throw std::invalid_argument("occupancy must be in [0, 1)");
    if (p_fast <= 0.0 || p_fast > 1.0)
        throw std::invalid_argument("p_fast must be in (0, 1]");
    if (fast_max_delay_us < 0 || tail_floor_us < 0 || tail_mean_us <= 0.0 ||
        tail_cap_us < tail_floor_us)
        throw std::invalid_argument("bad access-delay parameters");
    if (max_backoff_us < 0) throw std::invalid_argument("max_backoff_us must be >= 0");
    if (min_packet_us <= 0 || max_packet_us < min_packet_us)
        throw std::invalid_argument("bad packet length range");
    if (beacon_len_us <= 0) throw std::invalid_argument("beacon_len_us must be positive");
    if (vacancy_us < 0) throw std::invalid_argument("vacancy_us must be >= 0");
}

double ChannelModel::mean_packet_us() const {
    return 0.5 * static_cast<double>(min_packet_us + max_packet_us);
}

ChannelModel ChannelModel::ideal() {
    ChannelModel m;
    m.occupancy = 0.0;
    m.p_fast = 1.0;
    m.fast_max_delay_us = 0;
    m.max_backoff_us = 0;
    return m;
}

ChannelModel ChannelModel::bluetooth_sender() {
    ChannelModel m;
    m.max_backoff_us = 10'000;
    return m;
}

void DutyCycleSchedule::validate() const {
    if (period_us <= 0) throw std::invalid_argument("duty period must be positive");
    if (active_fraction <= 0.0 || active_fraction > 1.0)
        throw std::invalid_argument("active_fraction must be in (0, 1]");
    if (static_cast<std::int64_t>(active_fraction * static_cast<double>(period_us)) <= 0)
        throw std::invalid_argument("active window must be positive");
}

bool DutyCycleSchedule::active_at(std::int64_t t_us) const {
    std::int64_t rel = (t_us - phase_us) % period_us;
    if (rel < 0) rel += period_us;
    return static_cast<double>(rel) < active_fraction * static_cast<double>(period_us);
}

std::int64_t sample_access_delay(const ChannelModel& model, Rng& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::int64_t delay;
    if (uni(rng) < model.p_fast) {
        // DIFS makes the delay strictly positive on an idle channel.
        delay = model.fast_max_delay_us > 0
                    ? 1 + static_cast<std::int64_t>(uni(rng) * static_cast<double>(model.fast_max_delay_us - 1))
                    : 0;
    } else {
        std::exponential_distribution<double> tail(1.0 / model.tail_mean_us);
        delay = model.tail_floor_us + static_cast<std::int64_t>(tail(rng));
        delay = std::min(delay, model.tail_cap_us);
    }
    if (model.max_backoff_us > 0) {
        std::uniform_int_distribution<std::int64_t> backoff(0, model.max_backoff_us);
        delay += backoff(rng);
    }
    return delay;
}

namespace {

// 802.11 DCF spacing between queued packets: DIFS plus a random backoff.
constexpr std::int64_t kDifsUs = 34;
constexpr std::int64_t kSlotUs = 9;
constexpr std::int64_t kCwSlots = 15;

std::vector<BusyInterval> poisson_packets(const ChannelModel& model,
                                          std::int64_t duration_us, Rng& rng,
                                          double rate_per_us) {
    std::vector<BusyInterval> raw;
    if (rate_per_us <= 0.0 || duration_us <= 0) return raw;
    std::exponential_distribution<double> gap(rate_per_us);
    // Packet lengths are whole multiples of 128 us (one RSSI sample).
    std::uniform_int_distribution<std::int64_t> ks(model.min_packet_us / 128,
                                                   model.max_packet_us / 128);
    std::uniform_int_distribution<std::int64_t> slots(0, kCwSlots);
    // Start before 0 so the window boundary sees a stationary process.
    double t = -static_cast<double>(model.max_packet_us);
    std::int64_t t_free = static_cast<std::int64_t>(t) - 1;
    while (true) {
        t += gap(rng);
        if (t >= static_cast<double>(duration_us)) break;
        std::int64_t len = ks(rng) * 128;
        std::int64_t ifs = kDifsUs + kSlotUs * slots(rng);
        // CSMA: a packet that finds the medium busy queues and starts one
        // inter-frame space after it frees, so airtimes never overlap.
        std::int64_t a = std::max(static_cast<std::int64_t>(std::floor(t)), t_free + ifs);
        std::int64_t b = a + len;
        t_free = b;
        a = std::max<std::int64_t>(a, 0);
        b = std::min(b, duration_us);
        if (b > a) raw.push_back({a, b});
    }
    return raw;
}

std::vector<BusyInterval> merge_intervals(std::vector<BusyInterval> v) {
    std::sort(v.begin(), v.end(),
              [](const BusyInterval& a, const BusyInterval& b) { return a.begin_us < b.begin_us; });
    std::vector<BusyInterval> out;
    for (const auto& iv : v) {
        if (!out.empty() && iv.begin_us <= out.back().end_us)
            out.back().end_us = std::max(out.back().end_us, iv.end_us);
        else
            out.push_back(iv);
    }
    return out;
}

// Removes `holes` (sorted, disjoint) from `ivs` (sorted, disjoint).
std::vector<BusyInterval> subtract_intervals(const std::vector<BusyInterval>& ivs,
                                             const std::vector<BusyInterval>& holes) {
    std::vector<BusyInterval> out;
    std::size_t h = 0;
    for (auto iv : ivs) {
        while (h < holes.size() && holes[h].end_us <= iv.begin_us) ++h;
        std::size_t k = h;
        std::int64_t cur = iv.begin_us;
        while (k < holes.size() && holes[k].begin_us < iv.end_us) {
            if (holes[k].begin_us > cur) out.push_back({cur, holes[k].begin_us});
            cur = std::max(cur, holes[k].end_us);
            ++k;
        }
        if (cur < iv.end_us) out.push_back({cur, iv.end_us});
    }
    return out;
}

double busy_fraction(const std::vector<BusyInterval>& ivs, std::int64_t duration_us) {
    std::int64_t busy = 0;
    for (const auto& iv : ivs) busy += iv.end_us - iv.begin_us;
    return static_cast<double>(busy) / static_cast<double>(duration_us);
}

}  // namespace

double calibrate_noise_rate(const ChannelModel& model) {
    model.validate();
    const double B = model.occupancy;
    if (B == 0.0) return 0.0;
    if (B > 0.95) throw std::invalid_argument("occupancy above 0.95 is not calibratable");

    const double m = model.mean_packet_us();
    // With non-overlapping CSMA airtimes the busy fraction is rate * mean_len
    // while the queue is stable; start there and correct against a probe run.
    double rate = B / m;
    const std::int64_t probe_us = 50'000'000;
    double f = 0.0;
    for (int iter = 0; iter < 10; ++iter) {
        Rng rng(derive_seed(model.rng_seed, 0xca11b8a7eULL, static_cast<std::uint64_t>(iter)));
        auto ivs = merge_intervals(poisson_packets(model, probe_us, rng, rate));
        f = busy_fraction(ivs, probe_us);
        if (std::abs(f - B) <= 0.01 * B) return rate;
        if (f > 0.0) rate *= B / f;
    }
    if (std::abs(f - B) > 0.05 * B)
        throw std::invalid_argument("occupancy target is not reachable: inter-frame "
                                    "gaps cap the busy fraction below it");
    return rate;
}

std::vector<BusyInterval> gen_background(const ChannelModel& model,
                                         std::int64_t duration_us, Rng& rng,
                                         double rate_per_us) {
    model.validate();
    if (duration_us <= 0) throw std::invalid_argument("duration must be positive");
    if (model.occupancy == 0.0) return {};
    if (rate_per_us < 0.0) rate_per_us = calibrate_noise_rate(model);
    return merge_intervals(poisson_packets(model, duration_us, rng, rate_per_us));
}

RssiTrace render(const std::vector<BeaconSchedule>& schedules,
                 const ChannelModel& model, std::int64_t duration_us, Rng& rng,
                 const DutyCycleSchedule* duty, std::int64_t origin_time_us,
                 std::int64_t sample_period_us, double noise_rate_per_us) {
    model.validate();
    if (duty) duty->validate();
    if (duration_us <= 0 || sample_period_us <= 0)
        throw std::invalid_argument("bad render window");

    const std::int64_t end_us = origin_time_us + duration_us;
    for (const auto& sched : schedules)
        for (auto t : sched.times_us)
            if (t < origin_time_us || t >= end_us)
                throw std::invalid_argument("schedule exceeds the render window");

    std::vector<BusyInterval> background;
    if (model.occupancy > 0.0) {
        background = gen_background(model, duration_us, rng, noise_rate_per_us);
        for (auto& iv : background) {
            iv.begin_us += origin_time_us;
            iv.end_us += origin_time_us;
        }
    }

    // Access-delayed beacon airtimes, plus the idle window the sender saw
    // right before each transmission.
    std::vector<BusyInterval> beacons;
    std::vector<BusyInterval> vacancies;
    for (const auto& sched : schedules) {
        for (auto t : sched.times_us) {
            std::int64_t start = t + sample_access_delay(model, rng);
            beacons.push_back({start, start + sched.beacon_duration_us});
            if (model.vacancy_us > 0)
                vacancies.push_back({start - model.vacancy_us, start});
        }
    }
    beacons = merge_intervals(beacons);
    if (!vacancies.empty())
        background = subtract_intervals(background, merge_intervals(vacancies));

    RssiTrace out;
    out.sample_period_us = sample_period_us;
    out.origin_time_us = origin_time_us;
    const std::size_t n = static_cast<std::size_t>(duration_us / sample_period_us);
    out.samples.assign(n, 0);

    // Point sampling: bin j is busy iff the interval covers the instant
    // origin + j * sample_period.
    auto ceil_div = [](std::int64_t a, std::int64_t b) {
        return a / b + (a % b > 0 ? 1 : 0);
    };
    auto mark = [&](const std::vector<BusyInterval>& ivs) {
        for (const auto& iv : ivs) {
            std::int64_t j0 = ceil_div(iv.begin_us - origin_time_us, sample_period_us);
            std::int64_t j1 = ceil_div(iv.end_us - origin_time_us, sample_period_us);
            j0 = std::max<std::int64_t>(j0, 0);
            j1 = std::min<std::int64_t>(j1, static_cast<std::int64_t>(n));
            for (std::int64_t j = j0; j < j1; ++j) out.samples[static_cast<std::size_t>(j)] = 1;
        }
    };
    mark(background);
    mark(beacons);

    if (duty) {
        out.asleep.assign(n, 0);
        for (std::size_t j = 0; j < n; ++j) {
            std::int64_t bin_start = origin_time_us + static_cast<std::int64_t>(j) * sample_period_us;
            if (!duty->active_at(bin_start)) {
                out.asleep[j] = 1;
                out.samples[j] = 0;
            }
        }
    }
    return out;
}

}  // namespace beaconfold
