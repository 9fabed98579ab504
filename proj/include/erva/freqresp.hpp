#pragma once

#include <span>
#include <string>
#include <vector>

#include "erva/integrator.hpp"
#include "erva/params.hpp"

namespace erva {

enum class SweepModel { erva_passive, benchmark };
enum class Spacing { linear, logarithmic };

struct FrSweepConfig {
    double f_min = 1.0;    // [Hz]
    double f_max = 10.0;   // [Hz]
    int n_points = 91;
    Spacing spacing = Spacing::linear;
    double amplitude = 1e-3;  // road tone amplitude [m]
    int settle_periods = 20;
    int measure_periods = 10;
    double u_const = kNominalElectricalDamping;
    /// Upper bound on the integration step; each run uses an integer number
    /// of steps per period (at least min_steps_per_period).
    double max_dt = 1e-3;
    int min_steps_per_period = 200;
};

struct FrPoint {
    double frequency;        // [Hz]
    double accel_amplitude;  // sinusoid-equivalent chassis acceleration [m/s^2]
    double mean_power;       // [W]
};

struct SteadyStateMetrics {
    double accel_amplitude;
    double mean_power;
};

/// Drops the first settle_periods of the tone, then reports sqrt(2) * RMS of
/// the acceleration channel and the mean power over the next
/// measure_periods. Samples in [t_settle, t_settle + t_measure) are used.
/// Throws InsufficientDuration if the record ends before the window does.
template <int Dim>
SteadyStateMetrics steady_state_metrics(const BasicTrajectory<Dim>& traj, double frequency,
                                        int settle_periods, int measure_periods);

std::vector<double> sweep_frequencies(const FrSweepConfig& cfg);

/// Integration settings used for one tone.
SimConfig tone_sim_config(double frequency, const FrSweepConfig& cfg);

FrPoint frequency_point(SweepModel model, double frequency, const FrSweepConfig& cfg,
                        const SuspensionParams& p);

/// One open-loop tone simulation per frequency, run in parallel; results are
/// ordered by frequency.
std::vector<FrPoint> sweep(SweepModel model, const FrSweepConfig& cfg, const SuspensionParams& p);

/// In-order reference for sweep(); bit-identical output.
std::vector<FrPoint> sweep_serial(SweepModel model, const FrSweepConfig& cfg,
                                  const SuspensionParams& p);

/// Indices of strict interior local maxima of the acceleration amplitude.
std::vector<std::size_t> acceleration_peaks(std::span<const FrPoint> points);

/// CSV: frequency,accel_amplitude_erva,power_erva,accel_amplitude_benchmark,power_benchmark.
void write_freqresp_csv(const std::string& path, std::span<const FrPoint> erva,
                        std::span<const FrPoint> benchmark);

}  // namespace erva
