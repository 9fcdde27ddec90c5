#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "beaconfold/signal.hpp"

namespace beaconfold {

enum class Variant { freebee, afreebee };

// Thrown when a trace carries no decodable beacon signal.
struct NoSignalError : std::runtime_error {
    explicit NoSignalError(const std::string& what) : std::runtime_error(what) {}
};

// A sender's timing parameters. The beacon interval is T = x * delta_us;
// lambda is the number of receiver sample bins spanning one interval.
struct IntervalConfig {
    std::int64_t delta_us = 1024;  // shift granularity (WiFi 1024, ZigBee 15360, BT 625)
    int x = 2;                     // interval multiple, T = x * delta
    std::int64_t sample_period_us = 128;

    std::int64_t interval_us() const { return delta_us * static_cast<std::int64_t>(x); }
    int lambda() const;
    double samples_per_delta() const;
    void validate() const;
};

// An integer timing shift, the unit of transmitted information.
// FreeBee range: -x/2 < s <= x/2. A-FreeBee range: 0 <= s <= x-1.
struct Symbol {
    int shift_units = 0;
    Variant variant = Variant::freebee;
};

bool symbol_in_range(const Symbol& sym, const IntervalConfig& cfg);
int freebee_min_shift(int x);  // smallest valid FreeBee shift
int freebee_max_shift(int x);  // largest valid FreeBee shift (= x/2)

// Ideal beacon emission times before channel effects.
struct BeaconSchedule {
    std::vector<std::int64_t> times_us;  // strictly increasing
    std::int64_t beacon_duration_us = 256;
};

// Column-wise sums of the trace folded into rows of `period` samples.
struct FoldSums {
    std::vector<std::uint32_t> sums;
    int period = 0;
    std::size_t rows = 0;
};

// Emits rho beacons at reference + k*T + s*delta, k = 1..rho.
// Consecutive gaps all equal T, so the average interval is unchanged.
BeaconSchedule modulate_freebee(std::int64_t reference_time_us,
                                const IntervalConfig& cfg, const Symbol& sym,
                                int rho, std::int64_t beacon_duration_us = 256);

// Emits rho pairs forming two interleaved period-2T streams: base beacons at
// reference + k*2T and shifted beacons at reference + k*2T + T - s*delta.
BeaconSchedule modulate_afreebee(std::int64_t reference_time_us,
                                 const IntervalConfig& cfg, const Symbol& sym,
                                 int rho, std::int64_t beacon_duration_us = 256);

// Folds the maximal prefix of floor(len/period)*period samples;
// sums[c] = sum over rows r of trace[r*period + c].
FoldSums fold_serial(const RssiTrace& trace, int period);
FoldSums fold_parallel(const RssiTrace& trace, int period);
FoldSums fold(const RssiTrace& trace, int period);  // dispatches on trace size

struct DemodResult {
    Symbol symbol;
    double confidence = 0.0;  // peak fold sum / folded rows
    int peak_column = -1;
    int second_column = -1;  // A-FreeBee only
};

// Phase of an unmodulated beacon stream: argmax column of fold(trace, lambda).
int learn_reference(const RssiTrace& trace, const IntervalConfig& cfg);

// Folds with P = lambda, picks the peak column (ties: smallest index),
// maps its offset from the reference position into (-lambda/2, lambda/2]
// and rounds to the nearest shift unit (ties toward smaller |s|).
// rho_hint > 1 restricts folding to the first rho_hint intervals.
DemodResult demodulate_freebee(const RssiTrace& trace, const IntervalConfig& cfg,
                               int reference_position, int rho_hint = 0);

// Folds with P = 2*lambda, finds the two highest-sum columns and decodes the
// shift from the minimal cyclic arc between them; needs no reference position.
DemodResult demodulate_afreebee(const RssiTrace& trace, const IntervalConfig& cfg);

// Bit packing over the 2^floor(log2 x) lowest-magnitude valid shifts.
int bits_per_symbol(const IntervalConfig& cfg);  // floor(log2 x)
std::string symbol_to_bits(const Symbol& sym, const IntervalConfig& cfg);
Symbol bits_to_symbol(const std::string& bits, const IntervalConfig& cfg,
                      Variant variant);

// R = log2(x) / (T_seconds * rho), halved for A-FreeBee; floor_bits uses
// floor(log2 x) in the numerator.
double bit_rate(const IntervalConfig& cfg, int rho, Variant variant,
                bool floor_bits = false);

}  // namespace beaconfold
