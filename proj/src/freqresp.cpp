#include "erva/freqresp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "erva/errors.hpp"
#include "erva/road.hpp"

namespace erva {

namespace {

int steps_per_period(double frequency, const FrSweepConfig& cfg) {
    const double period = 1.0 / frequency;
    return std::max(cfg.min_steps_per_period,
                    static_cast<int>(std::ceil(period / cfg.max_dt - 1e-9)));
}

}  // namespace

template <int Dim>
SteadyStateMetrics steady_state_metrics(const BasicTrajectory<Dim>& traj, double frequency,
                                        int settle_periods, int measure_periods) {
    if (traj.size() == 0 || !(frequency > 0.0) || settle_periods < 0 || measure_periods < 1) {
        throw InsufficientDuration("empty trajectory or invalid measurement window");
    }
    const double t_start = traj.times.front() + settle_periods / frequency;
    const double t_end = t_start + measure_periods / frequency;
    // Allow for the rounding of the last recorded time.
    const double slack = 1e-9 * std::max(1.0, t_end);
    if (traj.times.back() < t_end - slack) {
        throw InsufficientDuration("trajectory ends at " + std::to_string(traj.times.back()) +
                                   " s, measurement window needs " + std::to_string(t_end) + " s");
    }

    double sum_sq = 0.0;
    double sum_power = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        if (t < t_start - slack || t >= t_end - slack) continue;
        sum_sq += traj.accelerations[k] * traj.accelerations[k];
        sum_power += traj.power[k];
        ++count;
    }
    if (count == 0) throw InsufficientDuration("no samples inside the measurement window");
    return {std::sqrt(2.0 * sum_sq / static_cast<double>(count)),
            sum_power / static_cast<double>(count)};
}

template SteadyStateMetrics steady_state_metrics<6>(const BasicTrajectory<6>&, double, int, int);
template SteadyStateMetrics steady_state_metrics<4>(const BasicTrajectory<4>&, double, int, int);

std::vector<double> sweep_frequencies(const FrSweepConfig& cfg) {
    std::vector<double> out(static_cast<std::size_t>(std::max(cfg.n_points, 0)));
    if (out.size() == 1) {
        out[0] = cfg.f_min;
        return out;
    }
    const double intervals = static_cast<double>(out.size() - 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double step = static_cast<double>(i);
        if (cfg.spacing == Spacing::linear) {
            out[i] = cfg.f_min + (cfg.f_max - cfg.f_min) * step / intervals;
        } else {
            out[i] = cfg.f_min * std::pow(cfg.f_max / cfg.f_min, step / intervals);
        }
    }
    return out;
}

SimConfig tone_sim_config(double frequency, const FrSweepConfig& cfg) {
    const int per_period = steps_per_period(frequency, cfg);
    const int periods = cfg.settle_periods + cfg.measure_periods;
    SimConfig sim;
    sim.t0 = 0.0;
    sim.dt = 1.0 / (frequency * per_period);
    sim.t1 = periods / frequency;
    sim.record_stride = 1;
    return sim;
}

FrPoint frequency_point(SweepModel model, double frequency, const FrSweepConfig& cfg,
                        const SuspensionParams& p) {
    const RoadSignal road = tone(frequency, cfg.amplitude);
    const SimConfig sim = tone_sim_config(frequency, cfg);
    SteadyStateMetrics m{};
    if (model == SweepModel::erva_passive) {
        const auto traj =
            simulate(ErvaState::Zero(), constant_controller(cfg.u_const), road, sim, p);
        m = steady_state_metrics(traj, frequency, cfg.settle_periods, cfg.measure_periods);
    } else {
        const auto traj = simulate_benchmark(BenchmarkState::Zero(), cfg.u_const, road, sim, p);
        m = steady_state_metrics(traj, frequency, cfg.settle_periods, cfg.measure_periods);
    }
    return {frequency, m.accel_amplitude, m.mean_power};
}

std::vector<FrPoint> sweep(SweepModel model, const FrSweepConfig& cfg, const SuspensionParams& p) {
    const auto freqs = sweep_frequencies(cfg);
    std::vector<FrPoint> out(freqs.size());
    const auto n = static_cast<long>(freqs.size());
    // Low frequencies need the longest runs; dynamic scheduling balances them.
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            frequency_point(model, freqs[static_cast<std::size_t>(i)], cfg, p);
    }
    return out;
}

std::vector<FrPoint> sweep_serial(SweepModel model, const FrSweepConfig& cfg,
                                  const SuspensionParams& p) {
    std::vector<FrPoint> out;
    for (double f : sweep_frequencies(cfg)) out.push_back(frequency_point(model, f, cfg, p));
    return out;
}

std::vector<std::size_t> acceleration_peaks(std::span<const FrPoint> points) {
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < points.size(); ++i) {
        const double a = points[i].accel_amplitude;
        if (a > points[i - 1].accel_amplitude && a > points[i + 1].accel_amplitude) {
            peaks.push_back(i);
        }
    }
    return peaks;
}

void write_freqresp_csv(const std::string& path, std::span<const FrPoint> erva,
                        std::span<const FrPoint> benchmark) {
    if (erva.size() != benchmark.size()) throw Error("frequency grids differ in length");
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << "frequency,accel_amplitude_erva,power_erva,accel_amplitude_benchmark,power_benchmark\n";
    char buf[160];
    for (std::size_t i = 0; i < erva.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", erva[i].frequency,
                      erva[i].accel_amplitude, erva[i].mean_power, benchmark[i].accel_amplitude,
                      benchmark[i].mean_power);
        os << buf;
    }
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace erva
