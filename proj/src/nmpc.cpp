#include "erva/nmpc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace erva {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;

double perturbation(double u, double rel_step) {
    return std::max(1.0, std::abs(u)) * rel_step;
}

void check_lengths(std::span<const double> u_seq, std::span<const double> w_seq,
                   const MpcConfig& cfg) {
    const auto n = static_cast<std::size_t>(cfg.horizon);
    if (u_seq.size() != n || w_seq.size() != n) {
        throw Error("horizon sequences must have length N = " + std::to_string(cfg.horizon));
    }
}

// Cost of the tail k..N-1 given the state x_k, previous velocity and the
// accumulated prefix; u_k is replaced by u_k_override.
double tail_cost(ErvaState x, double prefix, std::size_t k, double u_k_override,
                 std::span<const double> u_seq, std::span<const double> w_seq,
                 const MpcConfig& cfg, const SuspensionParams& p, double prev_vel) {
    double cost = prefix;
    for (std::size_t j = k; j < u_seq.size(); ++j) {
        const double u = j == k ? u_k_override : u_seq[j];
        const ErvaState next = discrete_step(x, u, w_seq[j], p, cfg.sample_time, cfg.dt_pred);
        cost += stage_cost(next, prev_vel, u, cfg);
        prev_vel = next(1);
        x = next;
    }
    return cost;
}

std::vector<double> clamp_to_box(std::span<const double> u, const MpcConfig& cfg) {
    std::vector<double> out(u.begin(), u.end());
    for (double& v : out) v = std::clamp(v, cfg.u_min, cfg.u_max);
    return out;
}

double projected_gradient_norm(std::span<const double> u, std::span<const double> g,
                               const MpcConfig& cfg) {
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const bool blocked = (u[i] <= cfg.u_min && g[i] > 0.0) || (u[i] >= cfg.u_max && g[i] < 0.0);
        if (!blocked) sum += g[i] * g[i];
    }
    return std::sqrt(sum);
}

// coordinate_levels evenly spaced controls from u_min to u_max.
std::vector<double> control_levels(const MpcConfig& cfg) {
    const int n = std::max(2, cfg.coordinate_levels);
    std::vector<double> levels(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        levels[static_cast<std::size_t>(j)] =
            j == n - 1 ? cfg.u_max : cfg.u_min + (cfg.u_max - cfg.u_min) * j / (n - 1);
    }
    return levels;
}

// Coordinate sweep over the discrete control levels: each u_k in turn takes
// whichever level (or its current value) gives the lowest cost with the
// other controls fixed. Tail costs reuse the running prefix.
void coordinate_sweep(std::vector<double>& u, double& cost, std::span<const double> levels,
                      const ErvaState& x0, double x_prev_vel, std::span<const double> w_seq,
                      const MpcConfig& cfg, const SuspensionParams& p) {
    for (int pass = 0; pass < cfg.coordinate_passes; ++pass) {
        bool changed = false;
        ErvaState x = x0;
        double vel = x_prev_vel;
        double prefix = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            for (double level : levels) {
                if (level == u[k]) continue;
                const double c = tail_cost(x, prefix, k, level, u, w_seq, cfg, p, vel);
                if (c < cost) {
                    cost = c;
                    u[k] = level;
                    changed = true;
                }
            }
            const ErvaState next = discrete_step(x, u[k], w_seq[k], p, cfg.sample_time, cfg.dt_pred);
            prefix += stage_cost(next, vel, u[k], cfg);
            vel = next(1);
            x = next;
        }
        if (!changed) break;
    }
}

}  // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iterations: return "max_iterations";
        case SolveStatus::stalled: return "stalled";
        case SolveStatus::not_improved: return "not_improved";
    }
    return "unknown";
}

double stage_cost(const ErvaState& x_k, double x_prev_vel, ControlInput u_k, const MpcConfig& cfg) {
    const double dv = x_k(1) - x_prev_vel;
    const double rel = absorber_relative_velocity(x_k);
    return cfg.alpha1 / (cfg.sample_time * cfg.sample_time) * dv * dv - cfg.alpha2 * u_k * rel * rel;
}

std::vector<ErvaState> rollout(const ErvaState& x0, std::span<const double> u_seq,
                               std::span<const double> w_seq, const MpcConfig& cfg,
                               const SuspensionParams& p) {
    check_lengths(u_seq, w_seq, cfg);
    std::vector<ErvaState> states;
    states.reserve(u_seq.size());
    ErvaState x = x0;
    for (std::size_t k = 0; k < u_seq.size(); ++k) {
        x = discrete_step(x, u_seq[k], w_seq[k], p, cfg.sample_time, cfg.dt_pred);
        states.push_back(x);
    }
    return states;
}

double horizon_cost(const ErvaState& x0, double x_prev_vel, std::span<const double> u_seq,
                    std::span<const double> w_seq, const MpcConfig& cfg,
                    const SuspensionParams& p) {
    check_lengths(u_seq, w_seq, cfg);
    return tail_cost(x0, 0.0, 0, u_seq[0], u_seq, w_seq, cfg, p, x_prev_vel);
}

std::vector<double> horizon_gradient(const ErvaState& x0, double x_prev_vel,
                                     std::span<const double> u_seq, std::span<const double> w_seq,
                                     const MpcConfig& cfg, const SuspensionParams& p,
                                     double rel_step) {
    check_lengths(u_seq, w_seq, cfg);
    const std::size_t n = u_seq.size();

    // Unperturbed prefix: state entering step k, the velocity before it and
    // the cost accumulated over steps 0..k-1.
    std::vector<ErvaState> entry(n);
    std::vector<double> entry_vel(n);
    std::vector<double> prefix(n);
    ErvaState x = x0;
    double vel = x_prev_vel;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        entry[k] = x;
        entry_vel[k] = vel;
        prefix[k] = acc;
        if (k + 1 == n) break;
        const ErvaState next = discrete_step(x, u_seq[k], w_seq[k], p, cfg.sample_time, cfg.dt_pred);
        acc += stage_cost(next, vel, u_seq[k], cfg);
        vel = next(1);
        x = next;
    }

    std::vector<double> shifted(2 * n);
    const auto tasks = static_cast<long>(2 * n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long task = 0; task < tasks; ++task) {
        const auto k = static_cast<std::size_t>(task / 2);
        const double h = perturbation(u_seq[k], rel_step);
        const double u = (task % 2 == 0) ? u_seq[k] + h : u_seq[k] - h;
        shifted[static_cast<std::size_t>(task)] =
            tail_cost(entry[k], prefix[k], k, u, u_seq, w_seq, cfg, p, entry_vel[k]);
    }

    std::vector<double> grad(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double h = perturbation(u_seq[k], rel_step);
        grad[k] = (shifted[2 * k] - shifted[2 * k + 1]) / (2.0 * h);
    }
    return grad;
}

std::vector<double> horizon_gradient_serial(const ErvaState& x0, double x_prev_vel,
                                            std::span<const double> u_seq,
                                            std::span<const double> w_seq, const MpcConfig& cfg,
                                            const SuspensionParams& p, double rel_step) {
    check_lengths(u_seq, w_seq, cfg);
    std::vector<double> grad(u_seq.size());
    std::vector<double> probe(u_seq.begin(), u_seq.end());
    for (std::size_t k = 0; k < u_seq.size(); ++k) {
        const double h = perturbation(u_seq[k], rel_step);
        probe[k] = u_seq[k] + h;
        const double up = horizon_cost(x0, x_prev_vel, probe, w_seq, cfg, p);
        probe[k] = u_seq[k] - h;
        const double down = horizon_cost(x0, x_prev_vel, probe, w_seq, cfg, p);
        probe[k] = u_seq[k];
        grad[k] = (up - down) / (2.0 * h);
    }
    return grad;
}

HorizonSolution solve_horizon(const ErvaState& x0, double x_prev_vel, std::span<const double> w_seq,
                              std::span<const double> u_warm, const MpcConfig& cfg,
                              const SuspensionParams& p) {
    HorizonSolution sol;
    sol.u_seq = clamp_to_box(u_warm, cfg);
    sol.cost = horizon_cost(x0, x_prev_vel, sol.u_seq, w_seq, cfg, p);
    const double warm_cost = sol.cost;

    // Coordinate sweeps from the warm start and, when screening, from the
    // constant sequence at every control level. The gradient descent
    // continues from the cheapest result.
    const auto levels = control_levels(cfg);
    std::vector<std::vector<double>> starts{sol.u_seq};
    if (cfg.screen_starts) {
        for (double level : levels) starts.emplace_back(sol.u_seq.size(), level);
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
        auto& u = starts[i];
        double cost = i == 0 ? warm_cost : horizon_cost(x0, x_prev_vel, u, w_seq, cfg, p);
        coordinate_sweep(u, cost, levels, x0, x_prev_vel, w_seq, cfg, p);
        if (cost < sol.cost) {
            sol.u_seq = std::move(u);
            sol.cost = cost;
        }
    }

    const double span = cfg.u_max - cfg.u_min;
    const double min_move = 1e-9 * std::max(1.0, span);
    double step = 0.0;
    std::vector<double> trial(sol.u_seq.size());
    std::vector<double> prev_u;
    std::vector<double> prev_grad;

    for (int it = 0; it < cfg.max_iters; ++it) {
        const auto grad = horizon_gradient(x0, x_prev_vel, sol.u_seq, w_seq, cfg, p);
        const double pg_norm = projected_gradient_norm(sol.u_seq, grad, cfg);
        if (pg_norm < cfg.grad_tol || pg_norm == 0.0) {
            sol.status = SolveStatus::converged;
            sol.converged = true;
            return sol;
        }
        const double gmax = std::abs(*std::max_element(
            grad.begin(), grad.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }));
        if (!prev_u.empty()) {
            // Barzilai-Borwein step from the last accepted move.
            double ss = 0.0;
            double sy = 0.0;
            for (std::size_t i = 0; i < grad.size(); ++i) {
                const double s = sol.u_seq[i] - prev_u[i];
                ss += s * s;
                sy += s * (grad[i] - prev_grad[i]);
            }
            step = sy > 0.0 ? ss / sy : 2.0 * step;
        }
        // Cap (and seed) the trial so the largest component moves at most a
        // quarter of the box.
        step = std::min(step > 0.0 ? step : HUGE_VAL, 0.25 * std::max(1.0, span) / gmax);

        bool accepted = false;
        while (true) {
            double slope = 0.0;
            double move = 0.0;
            for (std::size_t i = 0; i < trial.size(); ++i) {
                trial[i] = std::clamp(sol.u_seq[i] - step * grad[i], cfg.u_min, cfg.u_max);
                const double d = trial[i] - sol.u_seq[i];
                slope += grad[i] * d;
                move = std::max(move, std::abs(d));
            }
            if (move < min_move) break;
            const double cost = horizon_cost(x0, x_prev_vel, trial, w_seq, cfg, p);
            if (cost <= sol.cost + kArmijo * slope && cost < sol.cost) {
                prev_u = sol.u_seq;
                prev_grad = grad;
                sol.u_seq = trial;
                sol.cost = cost;
                accepted = true;
                break;
            }
            step *= kBacktrack;
        }
        sol.iterations = it + 1;
        if (!accepted) {
            sol.status = sol.cost < warm_cost ? SolveStatus::stalled : SolveStatus::not_improved;
            return sol;
        }
    }
    sol.status = SolveStatus::max_iterations;
    return sol;
}

MpcController::MpcController(RoadSignal road, MpcConfig cfg, SuspensionParams params)
    : road_(std::move(road)),
      preview_road_(cfg.preview_nominal_only ? road_.nominal() : road_),
      cfg_(cfg),
      params_(params),
      warm_(static_cast<std::size_t>(cfg.horizon),
            std::clamp(cfg.warm_start, cfg.u_min, cfg.u_max)),
      last_applied_(std::clamp(cfg.warm_start, cfg.u_min, cfg.u_max)) {}

std::vector<double> MpcController::preview_sequence(double t) const {
    std::vector<double> w(static_cast<std::size_t>(cfg_.horizon), 0.0);
    if (cfg_.preview == PreviewMode::full_preview) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = sample(preview_road_, t + static_cast<double>(i) * cfg_.sample_time);
        }
    }
    return w;
}

ControlInput MpcController::operator()(double t, const ErvaState& x) {
    const auto w = preview_sequence(t);
    HorizonSolution sol = solve_horizon(x, x(1), w, warm_, cfg_, params_);

    const bool fallback = sol.status == SolveStatus::not_improved;
    const ControlInput u = fallback ? last_applied_ : sol.u_seq.front();

    // Shift left, duplicating the final element.
    std::rotate(sol.u_seq.begin(), sol.u_seq.begin() + 1, sol.u_seq.end());
    sol.u_seq.back() = sol.u_seq[sol.u_seq.size() >= 2 ? sol.u_seq.size() - 2 : 0];
    warm_ = std::move(sol.u_seq);
    last_applied_ = u;

    log_.push_back({t, u, sol.cost, sol.iterations, sol.converged, sol.status, fallback});
    return u;
}

Controller mpc_controller(std::shared_ptr<MpcController> mpc) {
    const double period = mpc->config().sample_time;
    return {[mpc = std::move(mpc)](double t, const ErvaState& x) { return (*mpc)(t, x); }, period};
}

Controller mpc_controller(const RoadSignal& road, const MpcConfig& cfg, const SuspensionParams& p) {
    return mpc_controller(std::make_shared<MpcController>(road, cfg, p));
}

void write_solver_log(const std::string& path, std::span<const SolverLogEntry> log) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << "t,u_applied,cost,iterations,converged,status,fallback\n";
    char buf[96];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", e.time, e.u_applied, e.cost);
        os << buf << e.iterations << ',' << (e.converged ? 1 : 0) << ',' << to_string(e.status)
           << ',' << (e.fallback ? 1 : 0) << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace erva
