#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "beaconfold/modem.hpp"

namespace beaconfold {

// Concurrent senders keyed by id; the interval multiples must be pairwise
// coprime so folding isolates each sender (implicit addressing).
struct IntervalAssignment {
    std::map<int, IntervalConfig> entries;

    void validate() const;  // coprimality, no duplicate x
};

std::vector<int> primes_in_range(int lo, int hi);

// The n smallest primes in [x_min, x_max], one per sender id 0..n-1.
IntervalAssignment assign_intervals(int n, int x_min, int x_max,
                                    std::int64_t delta_us = 1024,
                                    std::int64_t sample_period_us = 128);

// True iff all pairs are coprime and the trace is shorter than every
// pairwise LCM of the interval lengths in samples, so a fold for one
// sender bounds every other sender's column sums by 1.
bool verify_orthogonality(const std::vector<int>& xs,
                          std::int64_t trace_len_samples,
                          const IntervalConfig& common);

enum class DemuxMode { plain, cancelling };

struct DemuxEntry {
    bool ok = false;
    Symbol symbol;
    double confidence = 0.0;
    std::string error;  // set when ok == false (per-sender no-signal)
};

// Recovers one FreeBee symbol per sender. Plain mode folds independently;
// cancelling mode goes through senders by ascending x and zeroes each
// sender's recovered beacon footprint before folding for the next.
// reference_positions defaults to column 0 for every sender.
std::map<int, DemuxEntry> demux(const RssiTrace& trace,
                                const IntervalAssignment& assignment,
                                DemuxMode mode,
                                const std::map<int, int>* reference_positions = nullptr);

// Copy of the trace with the two edge-filtered beacon samples zeroed at
// (row * lambda + peak_column) for every folded row.
RssiTrace cancel_beacons(const RssiTrace& trace, const IntervalConfig& cfg,
                         int peak_column);

// CSV serialization: header "sender_id,x,delta_us".
IntervalAssignment read_assignment_csv(const std::string& path,
                                       std::int64_t sample_period_us = 128);
void write_assignment_csv(const IntervalAssignment& assignment,
                          const std::string& path);

}  // namespace beaconfold
