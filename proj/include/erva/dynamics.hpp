#pragma once

#include <Eigen/Core>

#include "erva/params.hpp"

namespace erva {

/// Radial guide shape r1(phi) = phi^2 and its first two derivatives.
struct GuideProfile {
    double r1;
    double r1_prime;
    double r1_double_prime;
};

GuideProfile guide_profile(double phi);

/// State-dependent inertia and velocity coefficients of the absorber
/// equations. C == -2 B by construction.
struct Coefficients {
    double h;
    double g;
    double A;
    double B;
    double C;
    double D;
    double E;
};

/// Relative guide angle phi = (x5 - (x1 - x3)) / l.
double relative_angle(const ErvaState& x, const SuspensionParams& p);

Coefficients coefficients(const ErvaState& x, const SuspensionParams& p);

using MassMatrix = Eigen::Matrix<double, 6, 6>;
using StateVector = Eigen::Matrix<double, 6, 1>;

MassMatrix mass_matrix(const ErvaState& x, const SuspensionParams& p);

/// f(x, u, w) of Phi(x) xdot = f.
StateVector rhs(const ErvaState& x, ControlInput u, double w, const SuspensionParams& p);

/// Solves Phi(x) xdot = f by partial-pivot LU. Rows 1, 3, 5 are copied
/// from the state so the kinematic identities hold exactly.
/// Throws SingularMassMatrix when the reciprocal condition estimate < 1e-12.
StateVector state_derivative(const ErvaState& x, ControlInput u, double w,
                             const SuspensionParams& p);

double sprung_acceleration(const ErvaState& x, ControlInput u, double w,
                           const SuspensionParams& p);

/// Absorber velocity relative to the suspension stroke, x6 - (x2 - x4).
inline double absorber_relative_velocity(const ErvaState& x) {
    return x(5) - (x(1) - x(3));
}

/// Regenerated electrical power P = u (x6 - (x2 - x4))^2 [W].
inline double instantaneous_power(const ErvaState& x, ControlInput u) {
    const double v = absorber_relative_velocity(x);
    return u * v * v;
}

/// Kinetic plus potential energy of the quarter car with absorber [J],
/// including the tire spring measured against road height w.
double mechanical_energy(const ErvaState& x, double w, const SuspensionParams& p);

// Linear benchmark: the screw drives the rotor rigidly, inertance m_b + m_r + m_d.

using BenchmarkMatrix = Eigen::Matrix<double, 4, 4>;

BenchmarkMatrix benchmark_mass_matrix(const SuspensionParams& p);

BenchmarkState benchmark_derivative(const BenchmarkState& x, ControlInput u, double w,
                                    const SuspensionParams& p);

/// Benchmark harvested power u (x2 - x4)^2 [W].
inline double benchmark_power(const BenchmarkState& x, ControlInput u) {
    const double v = x(1) - x(3);
    return u * v * v;
}

/// Undamped natural frequencies [Hz] of the benchmark (ascending).
Eigen::Vector2d benchmark_natural_frequencies(const SuspensionParams& p);

/// Angular accelerations of the screw (theta) and rotor (psi) from the
/// rotational-coordinate absorber model, driven by terminal force F.
/// u is the translated electrical damping; the rotational value is u l^2.
/// Used only to cross-check the quarter-car form.
struct RotationalAccel {
    double theta_ddot;
    double psi_ddot;
};

RotationalAccel rotational_oracle_derivative(double theta, double theta_dot, double psi,
                                             double psi_dot, double force, ControlInput u,
                                             const SuspensionParams& p);

/// |x1 - x3| above which the suspension stroke is considered implausible [m].
inline constexpr double kTravelWarningLimit = 0.2;

}  // namespace erva
