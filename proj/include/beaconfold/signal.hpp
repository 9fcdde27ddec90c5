#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace beaconfold {

// Binary channel-occupancy trace: one sample per receiver RSSI read,
// 0 = idle, 1 = busy.
struct RssiTrace {
    std::vector<std::uint8_t> samples;
    std::int64_t sample_period_us = 128;
    std::int64_t origin_time_us = 0;
    // Non-empty iff the receiver was duty cycled while recording;
    // asleep[i] == 1 marks bins where the radio was off (sample forced 0).
    std::vector<std::uint8_t> asleep;

    std::size_t size() const { return samples.size(); }
    bool operator==(const RssiTrace&) const = default;

    void validate() const;  // throws std::invalid_argument on bad fields
};

struct QuantizerConfig {
    double threshold_dbm = -75.0;
};

// Energy detection: busy iff power >= threshold.
RssiTrace quantize(const std::vector<double>& power_dbm,
                   const QuantizerConfig& cfg,
                   std::int64_t sample_period_us = 128,
                   std::int64_t origin_time_us = 0);

// Keeps the first two samples of every maximal busy run, zeroes the rest.
// Idempotent; never sets a sample the input had clear.
RssiTrace packet_edge_filter(const RssiTrace& trace);

// Text trace format, versioned ("beaconfold-trace v1"). Round-trips
// bit-exactly including sample_period_us and origin_time_us.
void write_trace(const RssiTrace& trace, std::ostream& out);
void write_trace_file(const RssiTrace& trace, const std::string& path);
RssiTrace read_trace(std::istream& in);
RssiTrace read_trace_file(const std::string& path);

}  // namespace beaconfold
