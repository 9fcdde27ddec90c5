#include "beaconfold/signal.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace beaconfold {

void RssiTrace::validate() const {
    if (sample_period_us <= 0)
        throw std::invalid_argument("sample_period_us must be positive");
    if (origin_time_us < 0)
        throw std::invalid_argument("origin_time_us must be non-negative");
    for (auto s : samples)
        if (s > 1) throw std::invalid_argument("samples must be 0 or 1");
    if (!asleep.empty() && asleep.size() != samples.size())
        throw std::invalid_argument("asleep mask length mismatch");
}

RssiTrace quantize(const std::vector<double>& power_dbm,
                   const QuantizerConfig& cfg,
                   std::int64_t sample_period_us,
                   std::int64_t origin_time_us) {
    if (power_dbm.empty()) throw std::invalid_argument("empty trace");
    if (!std::isfinite(cfg.threshold_dbm))
        throw std::invalid_argument("threshold must be finite");
    RssiTrace out;
    out.sample_period_us = sample_period_us;
    out.origin_time_us = origin_time_us;
    out.samples.reserve(power_dbm.size());
    for (double p : power_dbm)
        out.samples.push_back(p >= cfg.threshold_dbm ? 1 : 0);
    out.validate();
    return out;
}

RssiTrace packet_edge_filter(const RssiTrace& trace) {
    trace.validate();
    RssiTrace out = trace;
    std::size_t run = 0;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        if (out.samples[i]) {
            ++run;
            if (run > 2) out.samples[i] = 0;
        } else {
            run = 0;
        }
    }
    return out;
}

void write_trace(const RssiTrace& trace, std::ostream& out) {
    trace.validate();
    out << "beaconfold-trace v1\n";
    out << "sample_period_us=" << trace.sample_period_us << '\n';
    out << "origin_time_us=" << trace.origin_time_us << '\n';
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        out << char('0' + trace.samples[i]);
        if ((i + 1) % 80 == 0) out << '\n';
    }
    if (trace.samples.size() % 80 != 0) out << '\n';
}

void write_trace_file(const RssiTrace& trace, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    write_trace(trace, f);
    if (!f) throw std::runtime_error("write failed: " + path);
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
    std::ostringstream msg;
    msg << "trace parse error at line " << line << ": " << what;
    throw std::runtime_error(msg.str());
}

std::int64_t parse_header_int(const std::string& line, const std::string& key,
                              int lineno) {
    auto prefix = key + "=";
    if (line.rfind(prefix, 0) != 0) parse_fail(lineno, "expected " + prefix + "<int>");
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(line.substr(prefix.size()), &pos);
        if (pos != line.size() - prefix.size()) parse_fail(lineno, "trailing junk after " + key);
        return v;
    } catch (const std::invalid_argument&) {
        parse_fail(lineno, "bad integer for " + key);
    } catch (const std::out_of_range&) {
        parse_fail(lineno, "integer out of range for " + key);
    }
}

}  // namespace

RssiTrace read_trace(std::istream& in) {
    std::string line;
    int lineno = 0;

    if (!std::getline(in, line)) parse_fail(1, "missing magic line");
    ++lineno;
    if (line != "beaconfold-trace v1") parse_fail(lineno, "bad magic, expected 'beaconfold-trace v1'");

    if (!std::getline(in, line)) parse_fail(2, "missing sample_period_us");
    ++lineno;
    std::int64_t period = parse_header_int(line, "sample_period_us", lineno);
    if (period <= 0) parse_fail(lineno, "sample_period_us must be positive");

    if (!std::getline(in, line)) parse_fail(3, "missing origin_time_us");
    ++lineno;
    std::int64_t origin = parse_header_int(line, "origin_time_us", lineno);
    if (origin < 0) parse_fail(lineno, "origin_time_us must be non-negative");

    RssiTrace out;
    out.sample_period_us = period;
    out.origin_time_us = origin;
    while (std::getline(in, line)) {
        ++lineno;
        for (char c : line) {
            if (c == '0' || c == '1')
                out.samples.push_back(static_cast<std::uint8_t>(c - '0'));
            else if (c == '\r')
                continue;
            else
                parse_fail(lineno, std::string("non-binary sample character '") + c + "'");
        }
    }
    return out;
}

RssiTrace read_trace_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return read_trace(f);
}

}  // namespace beaconfold
