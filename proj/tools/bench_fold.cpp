// Compares the serial reference fold against the OpenMP kernel, and a serial
// trial loop against the parallel sweep path.

#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "beaconfold/harness.hpp"

using namespace beaconfold;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled (serial build)\n");
#endif

    // Fold kernel on a large trace.
    RssiTrace trace;
    trace.samples.resize(64u << 20);
    std::mt19937_64 rng(7);
    std::bernoulli_distribution busy(0.05);
    for (auto& s : trace.samples) s = busy(rng) ? 1 : 0;

    const int period = 776;
    auto t0 = Clock::now();
    FoldSums serial = fold_serial(trace, period);
    double t_serial = seconds_since(t0);

    t0 = Clock::now();
    FoldSums parallel = fold_parallel(trace, period);
    double t_parallel = seconds_since(t0);

    bool match = serial.sums == parallel.sums;
    std::printf("fold %zu samples, P=%d: serial %.3fs, openmp %.3fs, speedup %.2fx, %s\n",
                trace.samples.size(), period, t_serial, t_parallel,
                t_serial / t_parallel, match ? "results match" : "MISMATCH");

    // Monte-Carlo trial loop: serial baseline vs the OpenMP sweep.
    IntervalConfig cfg;
    cfg.x = 97;
    ChannelModel model;
    model.occupancy = 0.3;
    double rate = calibrate_noise_rate(model);
    const int trials = 2000;

    ExperimentConfig sweep_cfg;
    sweep_cfg.interval = cfg;
    sweep_cfg.rho_min = sweep_cfg.rho_max = 5;
    sweep_cfg.occupancies = {0.3};
    sweep_cfg.trials = trials;

    // Serial reference loop with the sweep's own per-trial seeds, so the two
    // paths must agree exactly, not just statistically.
    t0 = Clock::now();
    int errors = 0;
    for (int t = 0; t < trials; ++t)
        if (!run_symbol_trial(Variant::freebee, cfg, model, 5,
                              sweep_trial_seed(sweep_cfg.seed, 0,
                                               static_cast<std::uint64_t>(t)),
                              rate))
            ++errors;
    double t_loop_serial = seconds_since(t0);

    t0 = Clock::now();
    auto points = ser_sweep(sweep_cfg);
    double t_loop_parallel = seconds_since(t0);

    bool trials_match = errors == points[0].errors;
    std::printf("%d trials at B=0.3 rho=5: serial loop %.3fs (SER %.4f), "
                "sweep %.3fs (SER %.4f), speedup %.2fx, %s\n",
                trials, t_loop_serial, static_cast<double>(errors) / trials,
                t_loop_parallel, points[0].ser(), t_loop_serial / t_loop_parallel,
                trials_match ? "error counts match" : "MISMATCH");
    return match && trials_match ? 0 : 1;
}
