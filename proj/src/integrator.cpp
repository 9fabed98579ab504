#include "erva/integrator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace erva {

Controller constant_controller(ControlInput u) {
    return {[u](double, const ErvaState&) { return u; }, 0.0};
}

ErvaState rk4_step(const ErvaState& x, ControlInput u_hold, const RoadSignal& road, double t,
                   double dt, const SuspensionParams& p) {
    return rk4(x, t, dt, [&](double ts, const ErvaState& xs) -> ErvaState {
        return state_derivative(xs, u_hold, sample(road, ts), p);
    });
}

BenchmarkState benchmark_rk4_step(const BenchmarkState& x, ControlInput u_hold,
                                  const RoadSignal& road, double t, double dt,
                                  const SuspensionParams& p) {
    return rk4(x, t, dt, [&](double ts, const BenchmarkState& xs) -> BenchmarkState {
        return benchmark_derivative(xs, u_hold, sample(road, ts), p);
    });
}

int prediction_substeps(double sample_time, double dt_pred) {
    if (!(dt_pred > 0.0)) dt_pred = sample_time / 4.0;
    return std::max(1, static_cast<int>(std::lround(sample_time / dt_pred)));
}

ErvaState discrete_step(const ErvaState& x, ControlInput u, double w_hold,
                        const SuspensionParams& p, double sample_time, double dt_pred) {
    const int substeps = prediction_substeps(sample_time, dt_pred);
    const double h = sample_time / substeps;
    ErvaState next = x;
    for (int i = 0; i < substeps; ++i) {
        next = rk4(next, 0.0, h, [&](double, const ErvaState& xs) -> ErvaState {
            return state_derivative(xs, u, w_hold, p);
        });
    }
    return next;
}

std::size_t step_count(const SimConfig& cfg) {
    return static_cast<std::size_t>(std::llround((cfg.t1 - cfg.t0) / cfg.dt));
}

Trajectory simulate(const ErvaState& x0, const Controller& controller, const RoadSignal& road,
                    const SimConfig& cfg, const SuspensionParams& p) {
    const std::size_t steps = step_count(cfg);
    const auto stride = static_cast<std::size_t>(std::max(1, cfg.record_stride));
    const std::size_t hold_steps =
        controller.update_period > 0.0
            ? std::max<std::size_t>(1, std::llround(controller.update_period / cfg.dt))
            : 1;

    Trajectory traj;
    traj.reserve(steps / stride + 1);

    ErvaState x = x0;
    ControlInput u = 0.0;
    double t = cfg.t0;
    for (std::size_t k = 0; k <= steps; ++k) {
        t = cfg.t0 + static_cast<double>(k) * cfg.dt;
        try {
            if (k < steps && k % hold_steps == 0) u = controller.law(t, x);
            if (k % stride == 0 || k == steps) {
                const double w = sample(road, t);
                traj.times.push_back(t);
                traj.states.push_back(x);
                traj.controls.push_back(u);
                traj.accelerations.push_back(sprung_acceleration(x, u, w, p));
                traj.power.push_back(instantaneous_power(x, u));
                traj.road.push_back(w);
                if (std::abs(x(0) - x(2)) > kTravelWarningLimit) traj.travel_warning = true;
            }
            if (k < steps) x = rk4_step(x, u, road, t, cfg.dt, p);
        } catch (const Error& e) {
            throw SimulationError(e.what(), t);
        }
    }
    return traj;
}

BenchmarkTrajectory simulate_benchmark(const BenchmarkState& x0, ControlInput u,
                                       const RoadSignal& road, const SimConfig& cfg,
                                       const SuspensionParams& p) {
    const std::size_t steps = step_count(cfg);
    const auto stride = static_cast<std::size_t>(std::max(1, cfg.record_stride));

    BenchmarkTrajectory traj;
    traj.reserve(steps / stride + 1);

    BenchmarkState x = x0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = cfg.t0 + static_cast<double>(k) * cfg.dt;
        try {
            if (k % stride == 0 || k == steps) {
                const double w = sample(road, t);
                traj.times.push_back(t);
                traj.states.push_back(x);
                traj.controls.push_back(u);
                traj.accelerations.push_back(benchmark_derivative(x, u, w, p)(1));
                traj.power.push_back(benchmark_power(x, u));
                traj.road.push_back(w);
                if (std::abs(x(0) - x(2)) > kTravelWarningLimit) traj.travel_warning = true;
            }
            if (k < steps) x = benchmark_rk4_step(x, u, road, t, cfg.dt, p);
        } catch (const Error& e) {
            throw SimulationError(e.what(), t);
        }
    }
    return traj;
}

namespace {

void put(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

}  // namespace

template <int Dim>
void write_csv(std::ostream& os, const BasicTrajectory<Dim>& traj) {
    os << "t";
    for (int i = 1; i <= Dim; ++i) os << ",x" << i;
    os << ",u,acc,power,w\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        put(os, traj.times[k]);
        for (int i = 0; i < Dim; ++i) {
            os << ',';
            put(os, traj.states[k](i));
        }
        for (double v : {traj.controls[k], traj.accelerations[k], traj.power[k], traj.road[k]}) {
            os << ',';
            put(os, v);
        }
        os << '\n';
    }
}

template void write_csv<6>(std::ostream&, const BasicTrajectory<6>&);
template void write_csv<4>(std::ostream&, const BasicTrajectory<4>&);

namespace {

template <int Dim>
void write_file(const std::string& path, const BasicTrajectory<Dim>& traj) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_csv(os, traj);
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    write_file(path, traj);
}

void write_trajectory_csv(const std::string& path, const BenchmarkTrajectory& traj) {
    write_file(path, traj);
}

}  // namespace erva
