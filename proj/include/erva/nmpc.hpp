#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "erva/integrator.hpp"
#include "erva/params.hpp"
#include "erva/road.hpp"

namespace erva {

enum class PreviewMode { full_preview, no_preview };

struct MpcConfig {
    int horizon = 10;            // N
    double sample_time = 0.02;   // T_s [s]
    double alpha1 = 1.0;         // acceleration weight
    double alpha2 = 0.0;         // harvested-power weight
    double u_min = 0.0;          // [N s/m]
    double u_max = 20.0e3;       // [N s/m]
    int max_iters = 30;
    double grad_tol = 1e-9;
    PreviewMode preview = PreviewMode::full_preview;
    bool preview_nominal_only = false;  // preview the tone without its noise
    double dt_pred = 0.0;               // prediction RK4 step, <= 0 means T_s / 4
    double warm_start = kNominalElectricalDamping;
    bool screen_starts = true;  // also sweep from a constant sequence at every level
    int coordinate_passes = 2;  // discrete level sweeps before the gradient descent
    int coordinate_levels = 5;  // evenly spaced levels from u_min to u_max
};

enum class SolveStatus {
    converged,       // projected-gradient norm below grad_tol
    max_iterations,
    stalled,         // line search failed after at least one accepted step
    not_improved,    // no descent step found from the warm start
};

const char* to_string(SolveStatus status);

struct HorizonSolution {
    std::vector<double> u_seq;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    SolveStatus status = SolveStatus::not_improved;
};

/// (alpha1 / T_s^2) (x2(k) - x2(k-1))^2 - alpha2 u(k) (x6(k) - (x2(k) - x4(k)))^2.
/// The sprung velocity stands in for x_a, so the difference over T_s is the
/// acceleration estimate.
double stage_cost(const ErvaState& x_k, double x_prev_vel, ControlInput u_k, const MpcConfig& cfg);

/// Predicted states x_1..x_N of the sampled model.
std::vector<ErvaState> rollout(const ErvaState& x0, std::span<const double> u_seq,
                               std::span<const double> w_seq, const MpcConfig& cfg,
                               const SuspensionParams& p);

/// J = sum_k stage_cost(x_{k+1}, x2(k), u_k): the stage for control u_k is
/// charged on the state it produces. x_prev_vel is the sprung velocity of
/// the sample preceding x_1 (the measured x0 velocity in closed loop).
double horizon_cost(const ErvaState& x0, double x_prev_vel, std::span<const double> u_seq,
                    std::span<const double> w_seq, const MpcConfig& cfg,
                    const SuspensionParams& p);

/// dJ/du_k by central differences, step max(1, |u_k|) * rel_step.
/// Perturbed rollouts reuse the unperturbed prefix and run in parallel.
std::vector<double> horizon_gradient(const ErvaState& x0, double x_prev_vel,
                                     std::span<const double> u_seq, std::span<const double> w_seq,
                                     const MpcConfig& cfg, const SuspensionParams& p,
                                     double rel_step = 1e-5);

/// Reference for horizon_gradient: two full horizon_cost rollouts per
/// component, in order. Results are bit-identical to the parallel kernel.
std::vector<double> horizon_gradient_serial(const ErvaState& x0, double x_prev_vel,
                                            std::span<const double> u_seq,
                                            std::span<const double> w_seq, const MpcConfig& cfg,
                                            const SuspensionParams& p, double rel_step = 1e-5);

/// Projected gradient descent with Armijo backtracking on [u_min, u_max]^N.
/// The warm start is clamped into the box; the returned cost never exceeds
/// the warm-start cost.
HorizonSolution solve_horizon(const ErvaState& x0, double x_prev_vel, std::span<const double> w_seq,
                              std::span<const double> u_warm, const MpcConfig& cfg,
                              const SuspensionParams& p);

struct SolverLogEntry {
    double time;
    double u_applied;
    double cost;
    int iterations;
    bool converged;
    SolveStatus status;
    bool fallback;  // previous control reused because the solve did not improve
};

/// Receding-horizon controller. Stateful (warm start, last control); one
/// instance per simulation.
class MpcController {
public:
    MpcController(RoadSignal road, MpcConfig cfg, SuspensionParams params);

    ControlInput operator()(double t, const ErvaState& x);

    /// Disturbance sequence the controller assumes at control instant t.
    std::vector<double> preview_sequence(double t) const;

    const std::vector<SolverLogEntry>& log() const { return log_; }
    const MpcConfig& config() const { return cfg_; }

private:
    RoadSignal road_;
    RoadSignal preview_road_;
    MpcConfig cfg_;
    SuspensionParams params_;
    std::vector<double> warm_;
    ControlInput last_applied_;
    std::vector<SolverLogEntry> log_;
};

/// Wraps a controller instance as a zero-order-hold callback at T_s.
Controller mpc_controller(std::shared_ptr<MpcController> mpc);

Controller mpc_controller(const RoadSignal& road, const MpcConfig& cfg, const SuspensionParams& p);

void write_solver_log(const std::string& path, std::span<const SolverLogEntry> log);

}  // namespace erva
