#pragma once

#include <Eigen/Core>

namespace erva {

/// Quarter car + absorber constants. Absorber quantities are already
/// translated to the suspension coordinate (m_r = J_r/l^2, m_b = J_b/l^2,
/// m_d = m r0^2/l^2, k_d = kbar_d/l^2, epsilon = lambda/r0).
/// Defaults are the nominal vehicle used throughout the experiments.
struct SuspensionParams {
    double M_s = 250.0;      // sprung mass [kg]
    double M_us = 35.0;      // unsprung mass [kg]
    double k_s = 55.0e3;     // suspension stiffness [N/m]
    double k_t = 150.0e3;    // tire stiffness [N/m]
    double c = 70.71;        // viscous damper [N s/m]
    double k_d = 24.09e3;    // torsion spring, translated [N/m]
    double l = 0.16;         // moment arm [m/rad]
    double m_r = 14.42;      // rotor inertia, translated [kg]
    double m_b = 21.31;      // ball-screw inertia, translated [kg]
    double m_d = 129.78;     // sliding mass inertia, translated [kg]
    double epsilon = 0.1;    // guide-shape ratio lambda/r0

    /// Inertance of the rigid linear benchmark device.
    double benchmark_inertance() const { return m_b + m_r + m_d; }
};

/// Passive electrical damping coefficient c_e0 [N s/m].
inline constexpr double kNominalElectricalDamping = 10.0e3;

/// x1 = z_s, x2 = dz_s, x3 = z_us, x4 = dz_us, x5 = z_d, x6 = dz_d.
/// States are deviations from static equilibrium (no gravity terms).
using ErvaState = Eigen::Matrix<double, 6, 1>;

/// First four components of ErvaState, for the rigid benchmark.
using BenchmarkState = Eigen::Matrix<double, 4, 1>;

/// Electrical damping c_e = kappa^2 / R(t) [N s/m], translated like the
/// other absorber quantities. Semi-active: must be >= 0.
using ControlInput = double;

}  // namespace erva
