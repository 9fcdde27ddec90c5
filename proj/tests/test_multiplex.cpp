#include <numeric>

#include "beaconfold/channel.hpp"
#include "beaconfold/multiplex.hpp"
#include "doctest.h"

using namespace beaconfold;

namespace {

IntervalConfig unit_cfg(int x) {
    IntervalConfig cfg;
    cfg.x = x;
    cfg.delta_us = 128;
    cfg.sample_period_us = 128;
    return cfg;
}

// Beacon-only trace for one sender: a single busy sample every x bins.
RssiTrace periodic_trace(int x, std::size_t len, std::size_t phase = 0) {
    RssiTrace t;
    t.samples.assign(len, 0);
    for (std::size_t i = phase; i < len; i += static_cast<std::size_t>(x))
        t.samples[i] = 1;
    return t;
}

}  // namespace

TEST_CASE("assign_intervals picks the smallest primes in range") {
    auto two = assign_intervals(2, 3, 10);
    REQUIRE(two.entries.size() == 2);
    CHECK(two.entries.at(0).x == 3);
    CHECK(two.entries.at(1).x == 5);

    CHECK(primes_in_range(53, 149).size() == 20);

    auto five = assign_intervals(5, 89, 149);
    std::vector<int> xs;
    for (const auto& [id, cfg] : five.entries) xs.push_back(cfg.x);
    CHECK(xs == std::vector<int>{89, 97, 101, 103, 107});
}

TEST_CASE("assign_intervals reports capacity exhaustion") {
    CHECK_THROWS_WITH_AS(assign_intervals(21, 53, 149),
                         "capacity error: only 20 primes in [53, 149], need 21",
                         std::runtime_error);
}

TEST_CASE("assignment validation rejects non-coprime or duplicate intervals") {
    IntervalAssignment bad;
    bad.entries[0] = unit_cfg(4);
    bad.entries[1] = unit_cfg(6);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    IntervalAssignment dup;
    dup.entries[0] = unit_cfg(5);
    dup.entries[1] = unit_cfg(5);
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}

TEST_CASE("verify_orthogonality checks coprimality and trace length") {
    auto common = unit_cfg(3);
    CHECK(verify_orthogonality({3, 5}, 14, common));
    CHECK_FALSE(verify_orthogonality({2, 4}, 7, common));
    CHECK_FALSE(verify_orthogonality({3, 5}, 15, common));  // at the LCM
    CHECK(verify_orthogonality({3, 5, 7}, 14, common));
    CHECK_FALSE(verify_orthogonality({3, 5, 7}, 15, common));
}

TEST_CASE("coprime folding bounds cross fold sums by 1 (small cases)") {
    // A sender with interval x2, folded at a coprime x1, spreads across
    // columns as long as the trace is shorter than x1*x2.
    for (auto [x1, x2] : {std::pair{3, 5}, {5, 7}, {4, 9}}) {
        auto t = periodic_trace(x2, static_cast<std::size_t>(x1 * x2 - 1));
        auto sums = fold(t, x1).sums;
        for (auto v : sums) CHECK(v <= 1);
    }
    // the non-coprime counter-example
    auto t = periodic_trace(4, 7);
    auto sums = fold(t, 2).sums;
    CHECK(*std::max_element(sums.begin(), sums.end()) > 1);
}

TEST_CASE("cancel_beacons removes the recovered footprint") {
    auto cfg = unit_cfg(5);
    // beacons at column 2, two samples wide, over 4 rows
    RssiTrace t;
    t.samples.assign(20, 0);
    for (int r = 0; r < 4; ++r) {
        t.samples[static_cast<std::size_t>(r * 5 + 2)] = 1;
        t.samples[static_cast<std::size_t>(r * 5 + 3)] = 1;
    }
    auto cancelled = cancel_beacons(t, cfg, 2);
    for (auto s : cancelled.samples) CHECK(s == 0);
    // original untouched
    CHECK(t.samples[2] == 1);

    RssiTrace zero;
    zero.samples.assign(20, 0);
    auto still_zero = cancel_beacons(zero, cfg, 0);
    for (auto s : still_zero.samples) CHECK(s == 0);

    CHECK_THROWS_AS(cancel_beacons(t, cfg, 5), std::invalid_argument);
}

TEST_CASE("cancelling one sender restores the other's clean fold") {
    auto c1 = unit_cfg(3);
    auto c2 = unit_cfg(5);
    std::size_t len = 60;
    auto t1 = periodic_trace(3, len, 1);
    auto t2 = periodic_trace(5, len, 2);
    RssiTrace merged;
    merged.samples.assign(len, 0);
    for (std::size_t i = 0; i < len; ++i)
        merged.samples[i] = t1.samples[i] | t2.samples[i];

    auto res1 = demodulate_freebee(merged, c1, 0);
    auto after = cancel_beacons(merged, c1, res1.peak_column);
    auto sums_after = fold(after, 5).sums;
    auto sums_alone = fold(t2, 5).sums;
    // brute-force comparison: same peak as sender 2 alone
    CHECK(std::distance(sums_after.begin(),
                        std::max_element(sums_after.begin(), sums_after.end())) ==
          std::distance(sums_alone.begin(),
                        std::max_element(sums_alone.begin(), sums_alone.end())));
}

TEST_CASE("demux recovers two noiseless senders independently") {
    auto model = ChannelModel::ideal();
    model.beacon_len_us = 128;
    IntervalAssignment assignment;
    assignment.entries[0] = unit_cfg(89);
    assignment.entries[1] = unit_cfg(97);

    std::vector<BeaconSchedule> schedules;
    schedules.push_back(modulate_freebee(0, assignment.entries[0],
                                         Symbol{-11, Variant::freebee}, 6, 128));
    schedules.push_back(modulate_freebee(0, assignment.entries[1],
                                         Symbol{23, Variant::freebee}, 6, 128));
    Rng rng(1);
    std::int64_t duration = 7 * assignment.entries[1].interval_us() + 256;
    auto trace = render(schedules, model, duration, rng);

    for (auto mode : {DemuxMode::plain, DemuxMode::cancelling}) {
        auto out = demux(trace, assignment, mode);
        REQUIRE(out.size() == 2);
        CHECK(out.at(0).ok);
        CHECK(out.at(0).symbol.shift_units == -11);
        CHECK(out.at(1).ok);
        CHECK(out.at(1).symbol.shift_units == 23);
    }
}

TEST_CASE("single-sender demux reduces to plain demodulation") {
    auto model = ChannelModel::ideal();
    IntervalAssignment assignment;
    assignment.entries[7] = unit_cfg(53);
    auto sched = modulate_freebee(0, assignment.entries[7], Symbol{9, Variant::freebee}, 5);
    Rng rng(2);
    auto trace = render({sched}, model, 6 * assignment.entries[7].interval_us(), rng);
    auto filtered = packet_edge_filter(trace);

    auto out = demux(filtered, assignment, DemuxMode::plain);
    auto direct = demodulate_freebee(filtered, assignment.entries[7], 0);
    REQUIRE(out.at(7).ok);
    CHECK(out.at(7).symbol.shift_units == direct.symbol.shift_units);
    CHECK(out.at(7).confidence == doctest::Approx(direct.confidence));
    // implicit addressing: only assigned ids appear
    CHECK(out.size() == 1);
    CHECK(out.count(7) == 1);
}

TEST_CASE("demux records per-sender no-signal instead of failing") {
    IntervalAssignment assignment;
    assignment.entries[0] = unit_cfg(3);
    RssiTrace silent;
    silent.samples.assign(30, 0);
    auto out = demux(silent, assignment, DemuxMode::plain);
    CHECK_FALSE(out.at(0).ok);
    CHECK(!out.at(0).error.empty());
}

TEST_CASE("assignment CSV round-trips") {
    IntervalAssignment a;
    a.entries[0] = unit_cfg(89);
    a.entries[1] = unit_cfg(97);
    a.entries[1].delta_us = 1024;
    const std::string path = "test_assignment.csv";
    write_assignment_csv(a, path);
    auto b = read_assignment_csv(path);
    REQUIRE(b.entries.size() == 2);
    CHECK(b.entries.at(0).x == 89);
    CHECK(b.entries.at(1).x == 97);
    CHECK(b.entries.at(1).delta_us == 1024);
    std::remove(path.c_str());
}
