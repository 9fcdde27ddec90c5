#include "beaconfold/multiplex.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace beaconfold {

void IntervalAssignment::validate() const {
    std::vector<int> xs;
    for (const auto& [id, cfg] : entries) {
        cfg.validate();
        xs.push_back(cfg.x);
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            if (xs[i] == xs[j])
                throw std::invalid_argument("duplicate interval multiple " + std::to_string(xs[i]));
            if (std::gcd(xs[i], xs[j]) != 1)
                throw std::invalid_argument("intervals " + std::to_string(xs[i]) + " and " +
                                            std::to_string(xs[j]) + " are not coprime");
        }
}

std::vector<int> primes_in_range(int lo, int hi) {
    std::vector<int> out;
    if (hi < 2) return out;
    std::vector<bool> composite(static_cast<std::size_t>(hi) + 1, false);
    for (int p = 2; p <= hi; ++p) {
        if (composite[static_cast<std::size_t>(p)]) continue;
        if (p >= lo) out.push_back(p);
        for (long long q = static_cast<long long>(p) * p; q <= hi; q += p)
            composite[static_cast<std::size_t>(q)] = true;
    }
    return out;
}

IntervalAssignment assign_intervals(int n, int x_min, int x_max,
                                    std::int64_t delta_us,
                                    std::int64_t sample_period_us) {
    if (n < 1) throw std::invalid_argument("sender count must be >= 1");
    if (x_min < 2) throw std::invalid_argument("x_min must be >= 2");
    auto primes = primes_in_range(x_min, x_max);
    if (static_cast<int>(primes.size()) < n)
        throw std::runtime_error("capacity error: only " + std::to_string(primes.size()) +
                                 " primes in [" + std::to_string(x_min) + ", " +
                                 std::to_string(x_max) + "], need " + std::to_string(n));
    IntervalAssignment out;
    for (int i = 0; i < n; ++i) {
        IntervalConfig cfg;
        cfg.x = primes[static_cast<std::size_t>(i)];
        cfg.delta_us = delta_us;
        cfg.sample_period_us = sample_period_us;
        out.entries[i] = cfg;
    }
    out.validate();
    return out;
}

bool verify_orthogonality(const std::vector<int>& xs,
                          std::int64_t trace_len_samples,
                          const IntervalConfig& common) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            if (std::gcd(xs[i], xs[j]) != 1) return false;
            IntervalConfig a = common, b = common;
            a.x = xs[i];
            b.x = xs[j];
            std::int64_t lcm_samples =
                std::lcm<std::int64_t>(a.lambda(), b.lambda());
            if (trace_len_samples >= lcm_samples) return false;
        }
    }
    return true;
}

RssiTrace cancel_beacons(const RssiTrace& trace, const IntervalConfig& cfg,
                         int peak_column) {
    cfg.validate();
    const int lambda = cfg.lambda();
    if (peak_column < 0 || peak_column >= lambda)
        throw std::invalid_argument("peak column out of [0, fold period)");
    RssiTrace out = trace;
    const std::size_t n = out.samples.size();
    for (std::size_t base = static_cast<std::size_t>(peak_column); base < n;
         base += static_cast<std::size_t>(lambda)) {
        out.samples[base] = 0;
        if (base + 1 < n) out.samples[base + 1] = 0;
    }
    return out;
}

std::map<int, DemuxEntry> demux(const RssiTrace& trace,
                                const IntervalAssignment& assignment,
                                DemuxMode mode,
                                const std::map<int, int>* reference_positions) {
    assignment.validate();

    std::vector<std::pair<int, const IntervalConfig*>> order;
    for (const auto& [id, cfg] : assignment.entries) order.emplace_back(id, &cfg);
    // Shorter intervals have more beacons in the trace and interfere most,
    // so cancelling mode removes them first.
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.second->x < b.second->x; });

    std::map<int, DemuxEntry> out;
    RssiTrace working = trace;
    for (const auto& [id, cfg] : order) {
        int ref = 0;
        if (reference_positions) {
            auto it = reference_positions->find(id);
            if (it != reference_positions->end()) ref = it->second;
        }
        const RssiTrace& src = (mode == DemuxMode::cancelling) ? working : trace;
        DemuxEntry entry;
        try {
            DemodResult res = demodulate_freebee(src, *cfg, ref);
            entry.ok = true;
            entry.symbol = res.symbol;
            entry.confidence = res.confidence;
            if (mode == DemuxMode::cancelling)
                working = cancel_beacons(working, *cfg, res.peak_column);
        } catch (const NoSignalError& e) {
            entry.error = e.what();
        }
        out[id] = entry;
    }
    return out;
}

IntervalAssignment read_assignment_csv(const std::string& path,
                                       std::int64_t sample_period_us) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    IntervalAssignment out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "sender_id,x,delta_us") continue;
        std::istringstream row(line);
        std::string id_s, x_s, delta_s;
        if (!std::getline(row, id_s, ',') || !std::getline(row, x_s, ',') ||
            !std::getline(row, delta_s))
            throw std::runtime_error("assignment parse error at line " + std::to_string(lineno));
        IntervalConfig cfg;
        cfg.sample_period_us = sample_period_us;
        try {
            int id = std::stoi(id_s);
            cfg.x = std::stoi(x_s);
            cfg.delta_us = std::stoll(delta_s);
            if (out.entries.count(id))
                throw std::runtime_error("duplicate sender id " + id_s);
            out.entries[id] = cfg;
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("assignment parse error at line " + std::to_string(lineno));
        }
    }
    out.validate();
    return out;
}

void write_assignment_csv(const IntervalAssignment& assignment,
                          const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "sender_id,x,delta_us\n";
    for (const auto& [id, cfg] : assignment.entries)
        f << id << ',' << cfg.x << ',' << cfg.delta_us << '\n';
}

}  // namespace beaconfold
