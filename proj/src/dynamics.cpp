#include "erva/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "erva/errors.hpp"

namespace erva {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;

}  // namespace

GuideProfile guide_profile(double phi) {
    return {phi * phi, 2.0 * phi, 2.0};
}

double relative_angle(const ErvaState& x, const SuspensionParams& p) {
    return (x(4) - (x(0) - x(2))) / p.l;
}

Coefficients coefficients(const ErvaState& x, const SuspensionParams& p) {
    const auto [r1, r1p, r1pp] = guide_profile(relative_angle(x, p));
    const double eps = p.epsilon;
    const double eps2 = eps * eps;
    const double stretch = 1.0 + eps * r1;

    Coefficients k{};
    k.h = 2.0 * p.m_d * (eps * r1p + eps2 * r1 * r1p) / p.l;
    k.g = p.m_r + p.m_d * stretch * stretch;
    k.A = k.g + p.m_d * eps2 * r1p * r1p;
    k.B = p.m_d * (eps * r1p + eps2 * (r1 * r1p + r1p * r1pp)) / p.l;
    k.C = -2.0 * k.B;
    k.D = p.m_d * eps2 * r1p * r1pp / p.l;
    k.E = -p.m_d * eps2 * r1p * r1p;
    return k;
}

namespace {

// Rows 2, 4, 6 of Phi restricted to the velocity columns 2, 4, 6. The
// remaining rows and columns of Phi form an identity block.
Eigen::Matrix3d velocity_block(const Coefficients& k, const SuspensionParams& p) {
    Eigen::Matrix3d m;
    m << p.M_s + p.m_b, -p.m_b, k.g,
         -p.m_b, p.M_us + p.m_b, -k.g,
         k.E, -k.E, k.A;
    return m;
}

StateVector forcing(const ErvaState& x, ControlInput u, double w, const SuspensionParams& p,
                    const Coefficients& k) {
    const double stroke = x(0) - x(2);
    const double stroke_rate = x(1) - x(3);
    const double coupling = k.h * x(5) * (x(5) - stroke_rate) + p.c * stroke_rate + p.k_s * stroke;

    StateVector f;
    f(0) = x(1);
    f(1) = -coupling;
    f(2) = x(3);
    f(3) = coupling - p.k_t * x(2) + p.k_t * w;
    f(4) = x(5);
    f(5) = -k.B * x(5) * x(5) - k.C * x(5) * stroke_rate - k.D * stroke_rate * stroke_rate -
           u * (x(5) - stroke_rate) - p.k_d * (x(4) - stroke);
    return f;
}

}  // namespace

MassMatrix mass_matrix(const ErvaState& x, const SuspensionParams& p) {
    const Eigen::Matrix3d m = velocity_block(coefficients(x, p), p);
    MassMatrix phi = MassMatrix::Identity();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) phi(2 * i + 1, 2 * j + 1) = m(i, j);
    }
    return phi;
}

StateVector rhs(const ErvaState& x, ControlInput u, double w, const SuspensionParams& p) {
    return forcing(x, u, w, p, coefficients(x, p));
}

StateVector state_derivative(const ErvaState& x, ControlInput u, double w,
                             const SuspensionParams& p) {
    // Phi is a permutation of diag(I3, M) with M the velocity block, so the
    // partial-pivot solve runs on M alone. The 1-norm condition number of Phi
    // follows from M's: norms of both Phi and its inverse are max(1, .).
    const Coefficients k = coefficients(x, p);
    const Eigen::Matrix3d m = velocity_block(k, p);
    const Eigen::PartialPivLU<Eigen::Matrix3d> lu(m);
    // For a 3x3 block the exact 1-norm of M^-1 (unit columns through the
    // same factors) is cheaper than the generic estimator.
    const double norm_m = m.cwiseAbs().colwise().sum().maxCoeff();
    const double norm_inv =
        Eigen::Matrix3d(lu.solve(Eigen::Matrix3d::Identity())).cwiseAbs().colwise().sum().maxCoeff();
    const double rcond = std::isfinite(norm_inv)
                             ? 1.0 / (std::max(1.0, norm_m) * std::max(1.0, norm_inv))
                             : 0.0;
    if (!(rcond >= kMinReciprocalCondition)) {
        throw SingularMassMatrix("mass matrix is singular (rcond = " + std::to_string(rcond) + ")");
    }
    const StateVector f = forcing(x, u, w, p, k);
    const Eigen::Vector3d v = lu.solve(Eigen::Vector3d(f(1), f(3), f(5)));
    StateVector xdot;
    xdot << x(1), v(0), x(3), v(1), x(5), v(2);
    return xdot;
}

double sprung_acceleration(const ErvaState& x, ControlInput u, double w,
                           const SuspensionParams& p) {
    return state_derivative(x, u, w, p)(1);
}

double mechanical_energy(const ErvaState& x, double w, const SuspensionParams& p) {
    const auto [r1, r1p, r1pp] = guide_profile(relative_angle(x, p));
    (void)r1pp;
    const double stroke = x(0) - x(2);
    const double stroke_rate = x(1) - x(3);
    const double rel = absorber_relative_velocity(x);
    const double stretch = 1.0 + p.epsilon * r1;

    const double kinetic =
        0.5 * p.M_s * x(1) * x(1) + 0.5 * p.M_us * x(3) * x(3) +
        0.5 * p.m_b * stroke_rate * stroke_rate + 0.5 * p.m_r * x(5) * x(5) +
        0.5 * p.m_d * (stretch * stretch * x(5) * x(5) + p.epsilon * p.epsilon * r1p * r1p * rel * rel);
    const double tire = x(2) - w;
    const double spring = x(4) - stroke;
    const double potential =
        0.5 * p.k_s * stroke * stroke + 0.5 * p.k_t * tire * tire + 0.5 * p.k_d * spring * spring;
    return kinetic + potential;
}

BenchmarkMatrix benchmark_mass_matrix(const SuspensionParams& p) {
    const double mx = p.benchmark_inertance();
    BenchmarkMatrix m = BenchmarkMatrix::Identity();
    m.row(1) << 0.0, p.M_s + mx, 0.0, -mx;
    m.row(3) << 0.0, -mx, 0.0, p.M_us + mx;
    return m;
}

BenchmarkState benchmark_derivative(const BenchmarkState& x, ControlInput u, double w,
                                    const SuspensionParams& p) {
    const double damping = p.c + u;
    BenchmarkState f;
    f(0) = x(1);
    f(1) = damping * (x(3) - x(1)) + p.k_s * (x(2) - x(0));
    f(2) = x(3);
    f(3) = damping * (x(1) - x(3)) + p.k_s * (x(0) - x(2)) - p.k_t * x(2) + p.k_t * w;
    BenchmarkState xdot = benchmark_mass_matrix(p).partialPivLu().solve(f);
    xdot(0) = x(1);
    xdot(2) = x(3);
    return xdot;
}

Eigen::Vector2d benchmark_natural_frequencies(const SuspensionParams& p) {
    const double mx = p.benchmark_inertance();
    Eigen::Matrix2d mass;
    mass << p.M_s + mx, -mx, -mx, p.M_us + mx;
    Eigen::Matrix2d stiffness;
    stiffness << p.k_s, -p.k_s, -p.k_s, p.k_s + p.k_t;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(stiffness, mass,
                                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseSqrt() / (2.0 * M_PI);
}

RotationalAccel rotational_oracle_derivative(double theta, double theta_dot, double psi,
                                             double psi_dot, double force, ControlInput u,
                                             const SuspensionParams& p) {
    // Only m r0^2 and lambda/r0 are identifiable from the translated
    // parameters, so take r0 = l and m = m_d.
    const double r0 = p.l;
    const double m = p.m_d;
    const double lambda = p.epsilon * r0;
    const double l2 = p.l * p.l;
    const double J_r = p.m_r * l2;
    const double J_b = p.m_b * l2;
    const double kbar_d = p.k_d * l2;
    const double ce = u * l2;

    const auto [r1, r1p, r1pp] = guide_profile(psi - theta);
    const double r = r0 + lambda * r1;
    const double dr = lambda * r1p;
    const double ddr = lambda * r1pp;
    const double J_eff = m * (r * r + dr * dr);
    const double r_eff = r * dr + dr * ddr;

    // psi equation:  (J_r + J_eff) psi'' - m r'^2 theta'' = -(velocity terms)
    // theta equation: (J_r + m r^2) psi'' + J_b theta''   = F l - 2 m r r' (psi'^2 - psi' theta')
    Eigen::Matrix2d inertia;
    inertia << -m * dr * dr, J_r + J_eff, J_b, J_r + m * r * r;
    Eigen::Vector2d load;
    load(0) = -(m * r_eff * psi_dot * psi_dot - 2.0 * m * r_eff * theta_dot * psi_dot +
                m * dr * ddr * theta_dot * theta_dot + kbar_d * (psi - theta) +
                ce * (psi_dot - theta_dot));
    load(1) = force * p.l - 2.0 * m * r * dr * (psi_dot * psi_dot - psi_dot * theta_dot);

    const Eigen::PartialPivLU<Eigen::Matrix2d> lu(inertia);
    if (!(lu.rcond() >= kMinReciprocalCondition)) {
        throw SingularMassMatrix("rotational inertia matrix is singular");
    }
    const Eigen::Vector2d acc = lu.solve(load);
    return {acc(0), acc(1)};
}

}  // namespace erva
