#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "erva/errors.hpp"
#include "erva/freqresp.hpp"
#include "oracles.hpp"

using namespace erva;

namespace {

constexpr double kPi = std::numbers::pi;

Trajectory synthetic(double frequency, double amplitude, double t1, double dt) {
    Trajectory tr;
    const auto n = static_cast<std::size_t>(std::llround(t1 / dt));
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * dt;
        tr.times.push_back(t);
        tr.states.push_back(ErvaState::Zero());
        tr.controls.push_back(0.0);
        tr.accelerations.push_back(amplitude * std::sin(2.0 * kPi * frequency * t));
        tr.power.push_back(0.0);
        tr.road.push_back(0.0);
    }
    return tr;
}

}  // namespace

TEST(SteadyState, RmsIdentity) {
    auto tr = synthetic(2.3, 0.7, 30.0 / 2.3, 1e-4);
    auto m = steady_state_metrics(tr, 2.3, 20, 10);
    EXPECT_NEAR(m.accel_amplitude, 0.7, 0.005 * 0.7);
    EXPECT_EQ(m.mean_power, 0.0);
}

TEST(SteadyState, ZeroTrajectory) {
    auto tr = synthetic(1.0, 0.0, 30.0, 1e-2);
    auto m = steady_state_metrics(tr, 1.0, 20, 10);
    EXPECT_EQ(m.accel_amplitude, 0.0);
    EXPECT_EQ(m.mean_power, 0.0);
}

TEST(SteadyState, InsufficientDuration) {
    auto tr = synthetic(1.0, 1.0, 25.0, 1e-2);
    EXPECT_THROW(steady_state_metrics(tr, 1.0, 20, 10), InsufficientDuration);
    EXPECT_THROW(steady_state_metrics(Trajectory{}, 1.0, 20, 10), InsufficientDuration);
}

TEST(Sweep, Frequencies) {
    FrSweepConfig cfg;
    auto f = sweep_frequencies(cfg);
    ASSERT_EQ(f.size(), 91u);
    EXPECT_EQ(f.front(), 1.0);
    EXPECT_EQ(f.back(), 10.0);
    EXPECT_NEAR(f[27], 3.7, 1e-12);
    cfg.spacing = Spacing::logarithmic;
    cfg.n_points = 3;
    f = sweep_frequencies(cfg);
    EXPECT_NEAR(f[1], std::sqrt(10.0), 1e-12);
}

TEST(Sweep, ToneRunsCoverWholePeriods) {
    FrSweepConfig cfg;
    for (double f : {1.0, 3.7, 10.0}) {
        SimConfig sim = tone_sim_config(f, cfg);
        EXPECT_LE(sim.dt, cfg.max_dt);
        EXPECT_NEAR(sim.t1, 30.0 / f, 1e-12);
        const double steps = sim.t1 / sim.dt;
        EXPECT_NEAR(steps, std::round(steps), 1e-6);
    }
}

TEST(Sweep, BenchmarkMatchesAnalyticResponse) {
    SuspensionParams p;
    FrSweepConfig cfg;
    auto pts = sweep(SweepModel::benchmark, cfg, p);
    for (const auto& pt : pts) {
        const double ref = oracle::benchmark_accel_amplitude(pt.frequency, cfg.amplitude, cfg.u_const, p);
        ASSERT_NEAR(pt.accel_amplitude, ref, 0.02 * ref) << "f = " << pt.frequency;
    }
}

TEST(Sweep, PassiveErvaHarvestsAtEveryTone) {
    SuspensionParams p;
    FrSweepConfig cfg;
    cfg.n_points = 10;
    for (const auto& pt : sweep(SweepModel::erva_passive, cfg, p)) {
        EXPECT_GT(pt.mean_power, 0.0) << pt.frequency;
        EXPECT_GT(pt.accel_amplitude, 0.0) << pt.frequency;
    }
}

TEST(Sweep, ParallelEqualsSerial) {
    SuspensionParams p;
    FrSweepConfig cfg;
    cfg.f_min = 2.0;
    cfg.f_max = 6.0;
    cfg.n_points = 5;
    for (auto model : {SweepModel::erva_passive, SweepModel::benchmark}) {
        auto a = sweep(model, cfg, p);
        auto b = sweep_serial(model, cfg, p);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].frequency, b[i].frequency);
            EXPECT_EQ(a[i].accel_amplitude, b[i].accel_amplitude);
            EXPECT_EQ(a[i].mean_power, b[i].mean_power);
        }
    }
}

TEST(Sweep, FinerGridRefinesCoarseGrid) {
    SuspensionParams p;
    FrSweepConfig coarse;
    coarse.n_points = 10;
    FrSweepConfig fine = coarse;
    fine.n_points = 19;
    auto a = sweep(SweepModel::benchmark, coarse, p);
    auto b = sweep(SweepModel::benchmark, fine, p);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].frequency, b[2 * i].frequency);
        EXPECT_EQ(a[i].accel_amplitude, b[2 * i].accel_amplitude);
        EXPECT_EQ(a[i].mean_power, b[2 * i].mean_power);
    }
}

TEST(Peaks, StrictInteriorMaxima) {
    std::vector<FrPoint> pts;
    for (double a : {1.0, 3.0, 2.0, 2.0, 5.0, 4.0, 6.0})
        pts.push_back({0.0, a, 0.0});
    auto peaks = acceleration_peaks(pts);
    ASSERT_EQ(peaks.size(), 2u);
    EXPECT_EQ(peaks[0], 1u);
    EXPECT_EQ(peaks[1], 4u);
}
