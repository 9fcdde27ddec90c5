#include "beaconfold/modem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace beaconfold {

int IntervalConfig::lambda() const {
    return static_cast<int>(std::llround(
        static_cast<double>(interval_us()) / static_cast<double>(sample_period_us)));
}

double IntervalConfig::samples_per_delta() const {
    return static_cast<double>(delta_us) / static_cast<double>(sample_period_us);
}

void IntervalConfig::validate() const {
    if (x < 2) throw std::invalid_argument("interval multiple x must be >= 2");
    if (delta_us <= 0) throw std::invalid_argument("delta_us must be positive");
    if (sample_period_us <= 0) throw std::invalid_argument("sample_period_us must be positive");
    if (lambda() < 2) throw std::invalid_argument("lambda must be >= 2");
}

int freebee_min_shift(int x) { return -(x / 2) + (x % 2 == 0 ? 1 : 0); }
int freebee_max_shift(int x) { return x / 2; }

bool symbol_in_range(const Symbol& sym, const IntervalConfig& cfg) {
    if (sym.variant == Variant::freebee)
        return 2 * sym.shift_units > -cfg.x && 2 * sym.shift_units <= cfg.x;
    return sym.shift_units >= 0 && sym.shift_units <= cfg.x - 1;
}

namespace {

void require_in_range(const Symbol& sym, const IntervalConfig& cfg) {
    if (!symbol_in_range(sym, cfg))
        throw std::out_of_range("symbol shift " + std::to_string(sym.shift_units) +
                                " out of range for x=" + std::to_string(cfg.x));
}

// Shift space is cyclic modulo x, so out-of-range candidates wrap around
// rather than clamp (a delayed boundary symbol must not flip sign).
int wrap_shift(int s, int x, Variant variant) {
    s %= x;
    if (variant == Variant::freebee) {
        if (2 * s <= -x) s += x;
        if (2 * s > x) s -= x;
    } else {
        if (s < 0) s += x;
    }
    return s;
}

// Nearest shift unit to a signed offset in microseconds; equidistant
// offsets resolve toward the smaller magnitude after wrapping.
int round_to_shift_units(double offset_us, std::int64_t delta_us,
                         const IntervalConfig& cfg, Variant variant) {
    double s_real = offset_us / static_cast<double>(delta_us);
    int a = static_cast<int>(std::floor(s_real));
    int b = static_cast<int>(std::ceil(s_real));
    double ea = std::abs(offset_us - static_cast<double>(a) * delta_us);
    double eb = std::abs(offset_us - static_cast<double>(b) * delta_us);
    int wa = wrap_shift(a, cfg.x, variant);
    int wb = wrap_shift(b, cfg.x, variant);
    if (ea < eb) return wa;
    if (eb < ea) return wb;
    return std::abs(wa) <= std::abs(wb) ? wa : wb;
}

}  // namespace

BeaconSchedule modulate_freebee(std::int64_t reference_time_us,
                                const IntervalConfig& cfg, const Symbol& sym,
                                int rho, std::int64_t beacon_duration_us) {
    cfg.validate();
    if (sym.variant != Variant::freebee)
        throw std::invalid_argument("expected a FreeBee symbol");
    require_in_range(sym, cfg);
    if (rho < 1) throw std::invalid_argument("rho must be >= 1");

    const std::int64_t T = cfg.interval_us();
    BeaconSchedule out;
    out.beacon_duration_us = beacon_duration_us;
    out.times_us.reserve(rho);
    for (int k = 1; k <= rho; ++k)
        out.times_us.push_back(reference_time_us + k * T + sym.shift_units * cfg.delta_us);
    return out;
}

BeaconSchedule modulate_afreebee(std::int64_t reference_time_us,
                                 const IntervalConfig& cfg, const Symbol& sym,
                                 int rho, std::int64_t beacon_duration_us) {
    cfg.validate();
    if (sym.variant != Variant::afreebee)
        throw std::invalid_argument("expected an A-FreeBee symbol");
    require_in_range(sym, cfg);
    if (rho < 1) throw std::invalid_argument("rho must be >= 1");

    const std::int64_t T = cfg.interval_us();
    BeaconSchedule out;
    out.beacon_duration_us = beacon_duration_us;
    out.times_us.reserve(2 * rho);
    for (int k = 0; k < rho; ++k) {
        out.times_us.push_back(reference_time_us + k * 2 * T);
        out.times_us.push_back(reference_time_us + k * 2 * T + T - sym.shift_units * cfg.delta_us);
    }
    return out;
}

FoldSums fold_serial(const RssiTrace& trace, int period) {
    if (period < 2) throw std::invalid_argument("fold period must be >= 2");
    if (trace.samples.size() < static_cast<std::size_t>(period))
        throw std::invalid_argument("trace shorter than fold period");
    FoldSums out;
    out.period = period;
    out.rows = trace.samples.size() / static_cast<std::size_t>(period);
    out.sums.assign(static_cast<std::size_t>(period), 0);
    const std::uint8_t* s = trace.samples.data();
    for (std::size_t r = 0; r < out.rows; ++r) {
        const std::uint8_t* row = s + r * static_cast<std::size_t>(period);
        for (int c = 0; c < period; ++c) out.sums[static_cast<std::size_t>(c)] += row[c];
    }
    return out;
}

FoldSums fold_parallel(const RssiTrace& trace, int period) {
    if (period < 2) throw std::invalid_argument("fold period must be >= 2");
    if (trace.samples.size() < static_cast<std::size_t>(period))
        throw std::invalid_argument("trace shorter than fold period");
    FoldSums out;
    out.period = period;
    out.rows = trace.samples.size() / static_cast<std::size_t>(period);
    out.sums.assign(static_cast<std::size_t>(period), 0);
    const std::uint8_t* s = trace.samples.data();
    const auto rows = static_cast<std::ptrdiff_t>(out.rows);
    std::uint32_t* acc = out.sums.data();
    // Row-major accumulation keeps the walk sequential; the integer array
    // reduction is exact, so any thread count gives identical sums.
#pragma omp parallel for schedule(static) reduction(+ : acc[ : period])
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const std::uint8_t* row = s + static_cast<std::size_t>(r) * static_cast<std::size_t>(period);
        for (int c = 0; c < period; ++c) acc[c] += row[c];
    }
    return out;
}

FoldSums fold(const RssiTrace& trace, int period) {
    // Column sums are exact integer adds, so both paths are bit-identical.
    if (trace.samples.size() >= (1u << 16)) return fold_parallel(trace, period);
    return fold_serial(trace, period);
}

namespace {

std::size_t argmax_first(const std::vector<std::uint32_t>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

RssiTrace truncated_to(const RssiTrace& trace, std::size_t n) {
    RssiTrace t = trace;
    t.samples.resize(n);
    if (!t.asleep.empty()) t.asleep.resize(n);
    return t;
}

}  // namespace

int learn_reference(const RssiTrace& trace, const IntervalConfig& cfg) {
    cfg.validate();
    FoldSums fs = fold(trace, cfg.lambda());
    std::size_t peak = argmax_first(fs.sums);
    if (fs.sums[peak] == 0) throw NoSignalError("no signal: all-zero trace");
    return static_cast<int>(peak);
}

DemodResult demodulate_freebee(const RssiTrace& trace, const IntervalConfig& cfg,
                               int reference_position, int rho_hint) {
    cfg.validate();
    const int lambda = cfg.lambda();
    if (reference_position < 0 || reference_position >= lambda)
        throw std::invalid_argument("reference position out of [0, lambda)");
    if (trace.samples.size() < 2 * static_cast<std::size_t>(lambda))
        throw std::invalid_argument("trace too short: need at least 2 intervals");

    const RssiTrace* src = &trace;
    RssiTrace clipped;
    if (rho_hint >= 2) {
        std::size_t want = static_cast<std::size_t>(rho_hint) * static_cast<std::size_t>(lambda);
        if (want < trace.samples.size()) {
            clipped = truncated_to(trace, want);
            src = &clipped;
        }
    }

    FoldSums fs = fold(*src, lambda);
    std::size_t peak = argmax_first(fs.sums);
    if (fs.sums[peak] == 0) throw NoSignalError("no signal: all-zero trace");

    int offset_bins = static_cast<int>((static_cast<int>(peak) - reference_position + lambda) % lambda);
    if (2 * offset_bins > lambda) offset_bins -= lambda;  // map into (-lambda/2, lambda/2]

    DemodResult res;
    res.symbol.variant = Variant::freebee;
    res.symbol.shift_units = round_to_shift_units(
        static_cast<double>(offset_bins) * static_cast<double>(cfg.sample_period_us),
        cfg.delta_us, cfg, Variant::freebee);
    res.confidence = static_cast<double>(fs.sums[peak]) / static_cast<double>(fs.rows);
    res.peak_column = static_cast<int>(peak);
    return res;
}

DemodResult demodulate_afreebee(const RssiTrace& trace, const IntervalConfig& cfg) {
    cfg.validate();
    const int lambda = cfg.lambda();
    const int period = 2 * lambda;
    if (trace.samples.size() < 2 * static_cast<std::size_t>(period))
        throw std::invalid_argument("trace too short: need at least 2 double intervals");

    FoldSums fs = fold(trace, period);
    std::size_t c1 = argmax_first(fs.sums);
    if (fs.sums[c1] == 0) throw NoSignalError("no signal: all-zero trace");

    // Heavy-noise ambiguity: three or more columns tied at the top value.
    std::uint32_t top = fs.sums[c1];
    int at_top = 0;
    for (auto v : fs.sums) at_top += (v == top);
    if (at_top >= 3) throw NoSignalError("no signal: ambiguous fold peaks");

    std::size_t c2 = fs.sums.size();
    std::uint32_t second = 0;
    for (std::size_t i = 0; i < fs.sums.size(); ++i) {
        if (i == c1) continue;
        if (fs.sums[i] > second) {
            second = fs.sums[i];
            c2 = i;
        }
    }
    if (c2 == fs.sums.size() || second == 0)
        throw NoSignalError("no signal: fewer than two busy columns");

    int d = static_cast<int>((static_cast<int>(c2) - static_cast<int>(c1) + period) % period);
    int d_min = std::min(d, period - d);
    int shift_bins = lambda - d_min;

    DemodResult res;
    res.symbol.variant = Variant::afreebee;
    res.symbol.shift_units = round_to_shift_units(
        static_cast<double>(shift_bins) * static_cast<double>(cfg.sample_period_us),
        cfg.delta_us, cfg, Variant::afreebee);
    res.confidence = static_cast<double>(std::min(top, second)) / static_cast<double>(fs.rows);
    res.peak_column = static_cast<int>(std::min(c1, c2));
    res.second_column = static_cast<int>(std::max(c1, c2));
    return res;
}

int bits_per_symbol(const IntervalConfig& cfg) {
    cfg.validate();
    int w = 0;
    while ((1 << (w + 1)) <= cfg.x) ++w;
    return w;
}

std::string symbol_to_bits(const Symbol& sym, const IntervalConfig& cfg) {
    require_in_range(sym, cfg);
    const int w = bits_per_symbol(cfg);
    const int count = 1 << w;
    int index;
    if (sym.variant == Variant::freebee) {
        // Two's-complement layout over the lowest-magnitude shifts,
        // s in [-(2^(w-1) - 1), 2^(w-1)].
        if (sym.shift_units > (count >> 1) || sym.shift_units < -(count >> 1) + 1)
            throw std::out_of_range("symbol not in the encodable subset");
        index = sym.shift_units >= 0 ? sym.shift_units : sym.shift_units + count;
    } else {
        if (sym.shift_units >= count)
            throw std::out_of_range("symbol not in the encodable subset");
        index = sym.shift_units;
    }
    std::string bits(static_cast<std::size_t>(w), '0');
    for (int b = 0; b < w; ++b)
        if (index & (1 << (w - 1 - b))) bits[static_cast<std::size_t>(b)] = '1';
    return bits;
}

Symbol bits_to_symbol(const std::string& bits, const IntervalConfig& cfg,
                      Variant variant) {
    const int w = bits_per_symbol(cfg);
    if (static_cast<int>(bits.size()) != w)
        throw std::invalid_argument("expected " + std::to_string(w) + " bits");
    int index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("bits must be 0/1");
        index = (index << 1) | (c - '0');
    }
    Symbol sym;
    sym.variant = variant;
    if (variant == Variant::freebee) {
        const int count = 1 << w;
        sym.shift_units = index <= (count >> 1) ? index : index - count;
    } else {
        sym.shift_units = index;
    }
    require_in_range(sym, cfg);
    return sym;
}

double bit_rate(const IntervalConfig& cfg, int rho, Variant variant,
                bool floor_bits) {
    cfg.validate();
    if (rho < 1) throw std::invalid_argument("rho must be >= 1");
    double bits = floor_bits ? static_cast<double>(bits_per_symbol(cfg))
                             : std::log2(static_cast<double>(cfg.x));
    double duration_s = static_cast<double>(cfg.interval_us()) * 1e-6 * rho;
    if (variant == Variant::afreebee) duration_s *= 2.0;
    return bits / duration_s;
}

}  // namespace beaconfold
