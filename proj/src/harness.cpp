#include "beaconfold/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace beaconfold {

namespace {

constexpr std::uint64_t kSweepStream = 0x5eeb;
constexpr std::uint64_t kMuxStream = 0x30c5;
constexpr std::uint64_t kDutyStream = 0xd007;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

int uniform_symbol(Variant variant, const IntervalConfig& cfg, Rng& rng) {
    if (variant == Variant::freebee) {
        std::uniform_int_distribution<int> d(freebee_min_shift(cfg.x),
                                             freebee_max_shift(cfg.x));
        return d(rng);
    }
    std::uniform_int_distribution<int> d(0, cfg.x - 1);
    return d(rng);
}

// Reference column of an unmodulated stream for a trace starting at
// origin samples past the sender's reference time.
int reference_column(int lambda, std::int64_t origin_bins) {
    return static_cast<int>((lambda - origin_bins % lambda) % lambda);
}

}  // namespace

double wilson_halfwidth(int errors, int trials) {
    if (trials <= 0) throw std::invalid_argument("trials must be positive");
    const double z = 1.959963984540054;  // 95%
    const double n = trials;
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    return (z / (1.0 + z2 / n)) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

void ExperimentConfig::validate() const {
    interval.validate();
    model.validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (rho_min < 1 || rho_max < rho_min) throw std::invalid_argument("bad rho range");
    if (occupancies.empty()) throw std::invalid_argument("occupancy list is empty");
    for (double b : occupancies)
        if (b < 0.0 || b >= 1.0) throw std::invalid_argument("occupancy must be in [0, 1)");
}

bool run_symbol_trial(Variant variant, const IntervalConfig& cfg,
                      const ChannelModel& model, int rho,
                      std::uint64_t trial_seed, double noise_rate_per_us) {
    cfg.validate();
    if (rho < 1) throw std::invalid_argument("rho must be >= 1");

    const std::int64_t T = cfg.interval_us();
    const std::int64_t sp = cfg.sample_period_us;
    Rng rng(trial_seed);
    Symbol sym{uniform_symbol(variant, cfg, rng), variant};

    try {
        if (variant == Variant::freebee) {
            BeaconSchedule sched = modulate_freebee(0, cfg, sym, rho, model.beacon_len_us);
            const int rows = std::max(rho, 2);  // the fold needs two intervals
            const std::int64_t origin = (T / 2 / sp) * sp;
            const std::int64_t duration = rows * T + 2 * sp;
            RssiTrace trace = render({sched}, model, duration, rng, nullptr, origin,
                                     sp, noise_rate_per_us);
            RssiTrace filtered = packet_edge_filter(trace);
            int ref = reference_column(cfg.lambda(), origin / sp);
            DemodResult res = demodulate_freebee(filtered, cfg, ref);
            return res.symbol.shift_units == sym.shift_units;
        }
        BeaconSchedule sched = modulate_afreebee(0, cfg, sym, rho, model.beacon_len_us);
        const int pairs = std::max(rho, 2);
        const std::int64_t duration = 2 * pairs * T + 2 * sp;
        RssiTrace trace = render({sched}, model, duration, rng, nullptr, 0, sp,
                                 noise_rate_per_us);
        RssiTrace filtered = packet_edge_filter(trace);
        DemodResult res = demodulate_afreebee(filtered, cfg);
        return res.symbol.shift_units == sym.shift_units;
    } catch (const NoSignalError&) {
        return false;
    }
}

std::uint64_t sweep_trial_seed(std::uint64_t root, std::uint64_t point_idx,
                               std::uint64_t t) {
    return derive_seed(root ^ kSweepStream, point_idx, t);
}

std::vector<SerPoint> ser_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<SerPoint> points;
    std::uint64_t point_idx = 0;
    for (int rho = cfg.rho_min; rho <= cfg.rho_max; ++rho) {
        for (double b : cfg.occupancies) {
            ChannelModel model = cfg.model;
            model.occupancy = b;
            const double rate = b > 0.0 ? calibrate_noise_rate(model) : 0.0;

            int errors = 0;
            const int trials = cfg.trials;
#pragma omp parallel for reduction(+ : errors) schedule(dynamic, 16)
            for (int t = 0; t < trials; ++t) {
                std::uint64_t s =
                    sweep_trial_seed(cfg.seed, point_idx, static_cast<std::uint64_t>(t));
                if (!run_symbol_trial(cfg.variant, cfg.interval, model, rho, s, rate))
                    ++errors;
            }

            SerPoint pt;
            pt.rho = rho;
            pt.occupancy = b;
            double T_s = static_cast<double>(cfg.interval.interval_us()) * 1e-6;
            pt.duration_s = cfg.variant == Variant::afreebee ? rho * 2.0 * T_s : rho * T_s;
            pt.trials = trials;
            pt.errors = errors;
            points.push_back(pt);
            ++point_idx;
        }
    }
    return points;
}

void write_ser_csv(const std::vector<SerPoint>& points, const ExperimentConfig& cfg,
                   std::ostream& out) {
    out << "variant,x,delta_us,rho,occupancy,duration_s,trials,errors,ser,wilson95\n";
    const char* v = cfg.variant == Variant::afreebee ? "afreebee" : "freebee";
    for (const auto& p : points) {
        out << v << ',' << cfg.interval.x << ',' << cfg.interval.delta_us << ','
            << p.rho << ',' << fmt_double(p.occupancy) << ','
            << fmt_double(p.duration_s) << ',' << p.trials << ',' << p.errors << ','
            << fmt_double(p.ser()) << ',' << fmt_double(p.wilson()) << '\n';
    }
}

std::vector<RateRow> throughput_report(const IntervalAssignment& assignment,
                                       int rho, Variant variant) {
    assignment.validate();
    if (rho < 1) throw std::invalid_argument("rho must be >= 1");
    std::vector<RateRow> rows;
    RateRow total;
    total.sender_id = -1;
    for (const auto& [id, cfg] : assignment.entries) {
        RateRow r;
        r.sender_id = id;
        r.x = cfg.x;
        r.interval_s = static_cast<double>(cfg.interval_us()) * 1e-6;
        r.bps_exact = bit_rate(cfg, rho, variant, false);
        r.bps_floor = bit_rate(cfg, rho, variant, true);
        total.bps_exact += r.bps_exact;
        total.bps_floor += r.bps_floor;
        rows.push_back(r);
    }
    rows.push_back(total);
    return rows;
}

void write_rate_csv(const std::vector<RateRow>& rows, Variant variant, int rho,
                    std::ostream& out) {
    out << "sender_id,variant,x,rho,interval_s,bps_exact,bps_floor\n";
    const char* v = variant == Variant::afreebee ? "afreebee" : "freebee";
    for (const auto& r : rows) {
        if (r.sender_id < 0)
            out << "aggregate," << v << ",," << rho << ",,";
        else
            out << r.sender_id << ',' << v << ',' << r.x << ',' << rho << ','
                << fmt_double(r.interval_s) << ',';
        out << fmt_double(r.bps_exact) << ',' << fmt_double(r.bps_floor) << '\n';
    }
}

MultiplexStats multiplex_trials(const IntervalAssignment& assignment,
                                const ChannelModel& model, int rho, int trials,
                                std::uint64_t seed, DemuxMode mode) {
    assignment.validate();
    model.validate();
    if (rho < 1 || trials < 1) throw std::invalid_argument("rho and trials must be >= 1");

    std::vector<std::pair<int, IntervalConfig>> senders(assignment.entries.begin(),
                                                        assignment.entries.end());
    std::int64_t t_max = 0;
    for (const auto& [id, cfg] : senders) t_max = std::max(t_max, cfg.interval_us());
    const std::int64_t sp = senders.front().second.sample_period_us;
    const std::int64_t duration = rho * t_max + 2 * sp;
    const double rate = model.occupancy > 0.0 ? calibrate_noise_rate(model) : 0.0;

    // Center each sender's reference half an interval before the trace so
    // every fold row holds exactly one beacon (no beacon-less noise rows).
    std::map<int, int> refs;
    for (const auto& [id, cfg] : senders)
        refs[id] = static_cast<int>((cfg.lambda() - (cfg.interval_us() / 2 / sp) % cfg.lambda()) %
                                    cfg.lambda());

    std::vector<int> errors(senders.size(), 0);
    const std::size_t n_senders = senders.size();
#pragma omp parallel
    {
        std::vector<int> local(n_senders, 0);
#pragma omp for schedule(dynamic, 4)
        for (int t = 0; t < trials; ++t) {
            Rng rng(derive_seed(seed ^ kMuxStream, static_cast<std::uint64_t>(t)));
            std::vector<BeaconSchedule> schedules;
            std::vector<int> sent(n_senders);
            schedules.reserve(n_senders);
            for (std::size_t i = 0; i < n_senders; ++i) {
                const auto& cfg = senders[i].second;
                sent[i] = uniform_symbol(Variant::freebee, cfg, rng);
                int rho_i = static_cast<int>(duration / cfg.interval_us());
                schedules.push_back(modulate_freebee(
                    -cfg.interval_us() / 2, cfg, Symbol{sent[i], Variant::freebee},
                    rho_i, model.beacon_len_us));
            }
            RssiTrace trace = render(schedules, model, duration, rng, nullptr, 0, sp, rate);
            RssiTrace filtered = packet_edge_filter(trace);
            auto decoded = demux(filtered, assignment, mode, &refs);
            for (std::size_t i = 0; i < n_senders; ++i) {
                const auto& entry = decoded.at(senders[i].first);
                if (!entry.ok || entry.symbol.shift_units != sent[i]) ++local[i];
            }
        }
#pragma omp critical
        for (std::size_t i = 0; i < n_senders; ++i) errors[i] += local[i];
    }

    MultiplexStats stats;
    stats.trials = trials;
    for (std::size_t i = 0; i < n_senders; ++i)
        stats.errors[senders[i].first] = errors[i];
    return stats;
}

namespace {

// One duty-cycled contact: all senders transmit A-FreeBee symbols for the
// whole window; success means every sender decodes correctly.
bool duty_trial(const std::vector<std::pair<int, IntervalConfig>>& senders,
                const ChannelModel& model, std::int64_t duration,
                const DutyCycleSchedule& duty_base, std::uint64_t trial_seed,
                double rate) {
    Rng rng(trial_seed);
    DutyCycleSchedule duty = duty_base;
    std::uniform_int_distribution<std::int64_t> phase(0, duty.period_us - 1);
    duty.phase_us = phase(rng);

    const std::int64_t sp = senders.front().second.sample_period_us;
    std::vector<BeaconSchedule> schedules;
    std::vector<int> sent(senders.size());
    for (std::size_t i = 0; i < senders.size(); ++i) {
        const auto& cfg = senders[i].second;
        sent[i] = uniform_symbol(Variant::afreebee, cfg, rng);
        int pairs = static_cast<int>(duration / (2 * cfg.interval_us()));
        if (pairs < 2) throw std::invalid_argument("insufficient contact window");
        schedules.push_back(modulate_afreebee(
            0, cfg, Symbol{sent[i], Variant::afreebee}, pairs, model.beacon_len_us));
    }
    RssiTrace trace = render(schedules, model, duration, rng, &duty, 0, sp, rate);
    RssiTrace filtered = packet_edge_filter(trace);
    for (std::size_t i = 0; i < senders.size(); ++i) {
        try {
            DemodResult res = demodulate_afreebee(filtered, senders[i].second);
            if (res.symbol.shift_units != sent[i]) return false;
        } catch (const NoSignalError&) {
            return false;
        }
    }
    return true;
}

}  // namespace

DutyResult duty_cycle_experiment(const IntervalAssignment& assignment,
                                 const ChannelModel& model, double contact_window_s,
                                 std::uint64_t seed, int trials_per_point,
                                 std::int64_t duty_period_us, double success_bar) {
    assignment.validate();
    model.validate();
    if (contact_window_s <= 0.0) throw std::invalid_argument("contact window must be positive");
    if (trials_per_point < 1) throw std::invalid_argument("trials must be >= 1");

    std::vector<std::pair<int, IntervalConfig>> senders(assignment.entries.begin(),
                                                        assignment.entries.end());
    const std::int64_t duration = static_cast<std::int64_t>(contact_window_s * 1e6);
    const double rate = model.occupancy > 0.0 ? calibrate_noise_rate(model) : 0.0;

    auto success = [&](int grid_step) {
        DutyCycleSchedule duty;
        duty.period_us = duty_period_us;
        duty.active_fraction = 0.005 * grid_step;
        int ok = 0;
        const int trials = trials_per_point;
#pragma omp parallel for reduction(+ : ok) schedule(dynamic, 4)
        for (int t = 0; t < trials; ++t) {
            std::uint64_t s = derive_seed(seed ^ kDutyStream,
                                          static_cast<std::uint64_t>(grid_step),
                                          static_cast<std::uint64_t>(t));
            if (duty_trial(senders, model, duration, duty, s, rate)) ++ok;
        }
        return static_cast<double>(ok) >= success_bar * trials;
    };

    DutyResult result;
    if (!success(200)) return result;  // even an always-on receiver fails
    // Required fraction is monotone in coverage; binary search the 0.5% grid.
    int lo = 1, hi = 200;
    while (lo < hi) {
        int mid = lo + (hi - lo) / 2;
        if (success(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    result.achieved = true;
    result.active_fraction = 0.005 * lo;
    return result;
}

OverheadReport overhead_report(const IntervalConfig& cfg, int rho, Variant variant) {
    cfg.validate();
    if (rho < 1) throw std::invalid_argument("rho must be >= 1");
    OverheadReport rep;
    rep.lambda = cfg.lambda();
    rep.rho = rho;
    const std::int64_t period = variant == Variant::afreebee ? 2LL * rep.lambda : rep.lambda;
    rep.storage_bits = static_cast<std::int64_t>(rho) * period;
    rep.storage_bytes = (rep.storage_bits + 7) / 8;
    rep.scan_ops = period;
    return rep;
}

OverheadReport overhead_report(const IntervalAssignment& assignment, int rho) {
    assignment.validate();
    int lambda_max = 0;
    for (const auto& [id, cfg] : assignment.entries)
        lambda_max = std::max(lambda_max, cfg.lambda());
    OverheadReport rep;
    rep.lambda = lambda_max;
    rep.rho = rho;
    rep.storage_bits = static_cast<std::int64_t>(rho) * lambda_max;
    rep.storage_bytes = (rep.storage_bits + 7) / 8;
    rep.scan_ops = lambda_max;
    return rep;
}

}  // namespace beaconfold
