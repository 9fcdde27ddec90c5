// Command-line front end: Monte-Carlo SER sweeps, rate reports, multiplexed
// reception trials, duty-cycle studies, trace demodulation, and receiver
// overhead accounting.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "beaconfold/harness.hpp"

using namespace beaconfold;

namespace {

// "a..b" or a single integer.
void parse_rho_range(const std::string& text, int& lo, int& hi) {
    auto pos = text.find("..");
    if (pos == std::string::npos) {
        lo = hi = std::stoi(text);
        return;
    }
    lo = std::stoi(text.substr(0, pos));
    hi = std::stoi(text.substr(pos + 2));
}

int cmd_ser_sweep(const std::string& variant, int x, std::int64_t delta_us,
                  const std::string& rho, const std::vector<double>& occupancy,
                  int trials, std::uint64_t seed, const std::string& out_path) {
    ExperimentConfig cfg;
    cfg.variant = variant == "afreebee" ? Variant::afreebee : Variant::freebee;
    cfg.interval.x = x;
    cfg.interval.delta_us = delta_us;
    parse_rho_range(rho, cfg.rho_min, cfg.rho_max);
    cfg.occupancies = occupancy;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.model.rng_seed = seed;
    cfg.out_path = out_path;

    auto points = ser_sweep(cfg);
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot open for writing: " << out_path << "\n";
        return 1;
    }
    write_ser_csv(points, cfg, out);
    std::cerr << "wrote " << points.size() << " grid points to " << out_path << "\n";
    return 0;
}

int cmd_rate(int x, std::int64_t delta_us, int rho, bool use_floor) {
    IntervalConfig cfg;
    cfg.x = x;
    cfg.delta_us = delta_us;
    std::cout << "variant,x,delta_us,rho,interval_s,bps\n";
    for (Variant v : {Variant::freebee, Variant::afreebee}) {
        std::cout << (v == Variant::freebee ? "freebee" : "afreebee") << ',' << x << ','
                  << delta_us << ',' << rho << ','
                  << static_cast<double>(cfg.interval_us()) * 1e-6 << ','
                  << bit_rate(cfg, rho, v, use_floor) << '\n';
    }
    return 0;
}

int cmd_multiplex(const std::string& assignment_path, double occupancy, int trials,
                  std::uint64_t seed, bool cancel, int rho) {
    auto assignment = read_assignment_csv(assignment_path);
    ChannelModel model;
    model.occupancy = occupancy;
    model.rng_seed = seed;
    auto stats = multiplex_trials(assignment, model, rho, trials, seed,
                                  cancel ? DemuxMode::cancelling : DemuxMode::plain);
    std::cout << "sender_id,x,trials,errors,ser,wilson95\n";
    for (const auto& [id, errs] : stats.errors) {
        std::cout << id << ',' << assignment.entries.at(id).x << ',' << stats.trials
                  << ',' << errs << ','
                  << static_cast<double>(errs) / stats.trials << ','
                  << wilson_halfwidth(errs, stats.trials) << '\n';
    }
    return 0;
}

int cmd_duty(double contact_s, const std::string& senders_path, std::uint64_t seed,
             double occupancy, int trials) {
    auto assignment = read_assignment_csv(senders_path);
    ChannelModel model;
    model.occupancy = occupancy;
    model.rng_seed = seed;
    auto result = duty_cycle_experiment(assignment, model, contact_s, seed, trials);
    std::cout << "contact_s,occupancy,achieved,active_fraction\n";
    std::cout << contact_s << ',' << occupancy << ',' << (result.achieved ? 1 : 0) << ',';
    if (result.achieved)
        std::cout << result.active_fraction << '\n';
    else
        std::cout << "insufficient contact\n";
    return result.achieved ? 0 : 2;
}

int cmd_demod(const std::string& trace_path, int x, std::int64_t delta_us,
              int reference, bool afreebee) {
    RssiTrace trace = read_trace_file(trace_path);
    IntervalConfig cfg;
    cfg.x = x;
    cfg.delta_us = delta_us;
    cfg.sample_period_us = trace.sample_period_us;
    RssiTrace filtered = packet_edge_filter(trace);
    DemodResult res = afreebee ? demodulate_afreebee(filtered, cfg)
                               : demodulate_freebee(filtered, cfg, reference);
    std::cout << "variant,x,delta_us,shift_units,confidence,peak_column\n";
    std::cout << (afreebee ? "afreebee" : "freebee") << ',' << x << ',' << delta_us
              << ',' << res.symbol.shift_units << ',' << res.confidence << ','
              << res.peak_column << '\n';
    return 0;
}

int cmd_overhead(int x, std::int64_t delta_us, int rho, bool afreebee) {
    IntervalConfig cfg;
    cfg.x = x;
    cfg.delta_us = delta_us;
    auto rep = overhead_report(cfg, rho,
                               afreebee ? Variant::afreebee : Variant::freebee);
    std::cout << "lambda,rho,storage_bits,storage_bytes,ops_per_sample,scan_ops\n";
    std::cout << rep.lambda << ',' << rep.rho << ',' << rep.storage_bits << ','
              << rep.storage_bytes << ',' << rep.ops_per_sample << ','
              << rep.scan_ops << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Timing-based cross-technology modem and channel simulator"};
    app.require_subcommand(1);

    // ser-sweep
    auto* sweep = app.add_subcommand("ser-sweep", "Monte-Carlo symbol error rate sweep");
    sweep->set_config("--config");
    std::string variant = "freebee", rho_range = "1..8", out_path = "ser.csv";
    int x = 97, trials = 1000;
    std::int64_t delta_us = 1024;
    std::vector<double> occupancy{0.1};
    std::uint64_t seed = 1;
    sweep->add_option("--variant", variant)->check(CLI::IsMember({"freebee", "afreebee"}));
    sweep->add_option("--x", x)->required();
    sweep->add_option("--delta-us", delta_us);
    sweep->add_option("--rho", rho_range, "rho range a..b or single value");
    sweep->add_option("--occupancy", occupancy)->delimiter(',');
    sweep->add_option("--trials", trials);
    sweep->add_option("--seed", seed);
    sweep->add_option("--out", out_path)->required();

    // rate
    auto* rate = app.add_subcommand("rate", "Analytic bit rate");
    rate->set_config("--config");
    int rate_x = 100, rate_rho = 1;
    std::int64_t rate_delta = 1024;
    bool rate_floor = false;
    rate->add_option("--x", rate_x)->required();
    rate->add_option("--delta-us", rate_delta);
    rate->add_option("--rho", rate_rho)->required();
    rate->add_flag("--floor", rate_floor, "use floor(log2 x) bits per symbol");

    // multiplex
    auto* mux = app.add_subcommand("multiplex", "Concurrent-sender reception trials");
    mux->set_config("--config");
    std::string mux_assignment;
    double mux_b = 0.1;
    int mux_trials = 100, mux_rho = 5;
    std::uint64_t mux_seed = 1;
    bool mux_cancel = false;
    mux->add_option("--assignment", mux_assignment)->required()->check(CLI::ExistingFile);
    mux->add_option("--occupancy", mux_b);
    mux->add_option("--trials", mux_trials);
    mux->add_option("--seed", mux_seed);
    mux->add_option("--rho", mux_rho);
    mux->add_flag("--cancel", mux_cancel, "cancel decoded beacons in ascending interval order");

    // duty
    auto* duty = app.add_subcommand("duty", "Minimum duty cycle for full reception");
    duty->set_config("--config");
    double duty_contact = 10.0, duty_b = 0.05;
    std::string duty_senders;
    std::uint64_t duty_seed = 1;
    int duty_trials = 100;
    duty->add_option("--contact-s", duty_contact)->required();
    duty->add_option("--senders", duty_senders)->required()->check(CLI::ExistingFile);
    duty->add_option("--seed", duty_seed);
    duty->add_option("--occupancy", duty_b);
    duty->add_option("--trials", duty_trials);

    // demod
    auto* demod = app.add_subcommand("demod", "Demodulate a recorded trace file");
    demod->set_config("--config");
    std::string demod_trace;
    int demod_x = 97, demod_ref = 0;
    std::int64_t demod_delta = 1024;
    bool demod_afree = false;
    demod->add_option("--trace", demod_trace)->required()->check(CLI::ExistingFile);
    demod->add_option("--x", demod_x)->required();
    demod->add_option("--delta-us", demod_delta);
    auto* ref_opt = demod->add_option("--reference", demod_ref, "reference column (FreeBee)");
    auto* afree_flag = demod->add_flag("--afreebee", demod_afree, "asynchronous variant");
    ref_opt->excludes(afree_flag);

    // overhead
    auto* over = app.add_subcommand("overhead", "Receiver storage and compute accounting");
    over->set_config("--config");
    int over_x = 97, over_rho = 5;
    std::int64_t over_delta = 1024;
    bool over_afree = false;
    over->add_option("--x", over_x)->required();
    over->add_option("--delta-us", over_delta);
    over->add_option("--rho", over_rho)->required();
    over->add_flag("--afreebee", over_afree);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed())
            return cmd_ser_sweep(variant, x, delta_us, rho_range, occupancy, trials,
                                 seed, out_path);
        if (rate->parsed()) return cmd_rate(rate_x, rate_delta, rate_rho, rate_floor);
        if (mux->parsed())
            return cmd_multiplex(mux_assignment, mux_b, mux_trials, mux_seed,
                                 mux_cancel, mux_rho);
        if (duty->parsed())
            return cmd_duty(duty_contact, duty_senders, duty_seed, duty_b, duty_trials);
        if (demod->parsed())
            return cmd_demod(demod_trace, demod_x, demod_delta, demod_ref, demod_afree);
        if (over->parsed()) return cmd_overhead(over_x, over_delta, over_rho, over_afree);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
