#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "erva/dynamics.hpp"
#include "erva/errors.hpp"
#include "erva/params.hpp"
#include "erva/road.hpp"

namespace erva {

struct SimConfig {
    double t0 = 0.0;
    double t1 = 4.0;
    double dt = 1e-3;
    int record_stride = 1;  // integration steps per recorded sample
};

/// Time-indexed record of a run. For the benchmark, Dim = 4.
template <int Dim>
struct BasicTrajectory {
    using State = Eigen::Matrix<double, Dim, 1>;

    std::vector<double> times;
    std::vector<State> states;
    std::vector<double> controls;
    std::vector<double> accelerations;
    std::vector<double> power;
    std::vector<double> road;
    /// Set when |x1 - x3| exceeded kTravelWarningLimit at any recorded sample.
    bool travel_warning = false;

    std::size_t size() const { return times.size(); }

    void reserve(std::size_t n) {
        times.reserve(n);
        states.reserve(n);
        controls.reserve(n);
        accelerations.reserve(n);
        power.reserve(n);
        road.reserve(n);
    }
};

using Trajectory = BasicTrajectory<6>;
using BenchmarkTrajectory = BasicTrajectory<4>;

/// State feedback law. update_period > 0 means the law is sampled at the
/// boundaries t0 + k * update_period and held in between (zero-order hold);
/// otherwise it is re-evaluated every integration step.
struct Controller {
    std::function<ControlInput(double t, const ErvaState& x)> law;
    double update_period = 0.0;
};

Controller constant_controller(ControlInput u);

/// Classical RK4 over any xdot = f(t, x). Throws NonFiniteState.
template <typename State, typename Derivative>
State rk4(const State& x, double t, double dt, Derivative&& f) {
    const State k1 = f(t, x);
    const State k2 = f(t + 0.5 * dt, State(x + 0.5 * dt * k1));
    const State k3 = f(t + 0.5 * dt, State(x + 0.5 * dt * k2));
    const State k4 = f(t + dt, State(x + dt * k3));
    State next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) throw NonFiniteState("non-finite state after RK4 step");
    return next;
}

/// One RK4 step of the ERVA model; u is held, the road is sampled at the
/// stage times t, t + dt/2, t + dt.
ErvaState rk4_step(const ErvaState& x, ControlInput u_hold, const RoadSignal& road, double t,
                   double dt, const SuspensionParams& p);

BenchmarkState benchmark_rk4_step(const BenchmarkState& x, ControlInput u_hold,
                                  const RoadSignal& road, double t, double dt,
                                  const SuspensionParams& p);

/// Number of RK4 substeps used by discrete_step for a prediction step dt_pred.
int prediction_substeps(double sample_time, double dt_pred);

/// Sampled model x_{k+1} = F_d(x_k, u_k, w_k): prediction_substeps RK4 steps
/// with u and w held over the sampling interval. dt_pred <= 0 means T_s / 4.
ErvaState discrete_step(const ErvaState& x, ControlInput u, double w_hold,
                        const SuspensionParams& p, double sample_time, double dt_pred = 0.0);

/// Integrates from x0 over [cfg.t0, cfg.t1]. Errors are rethrown as
/// SimulationError carrying the failing time.
Trajectory simulate(const ErvaState& x0, const Controller& controller, const RoadSignal& road,
                    const SimConfig& cfg, const SuspensionParams& p);

/// Benchmark run under a constant electrical damping u.
BenchmarkTrajectory simulate_benchmark(const BenchmarkState& x0, ControlInput u,
                                       const RoadSignal& road, const SimConfig& cfg,
                                       const SuspensionParams& p);

/// Number of integration steps covering [t0, t1] at dt.
std::size_t step_count(const SimConfig& cfg);

/// CSV with header t,x1..xN,u,acc,power,w and 17 significant digits.
template <int Dim>
void write_csv(std::ostream& os, const BasicTrajectory<Dim>& traj);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const BenchmarkTrajectory& traj);

}  // namespace erva
