#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "erva/freqresp.hpp"
#include "erva/integrator.hpp"
#include "erva/nmpc.hpp"
#include "erva/params.hpp"
#include "erva/road.hpp"

namespace erva {

enum class ExperimentKind { freqresp, passive, mpc, compare };

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);
const char* to_string(ExperimentKind kind);

/// Road used by the time-domain experiments. duration <= 0 means "cover the
/// simulation plus one MPC horizon".
struct RoadSpec {
    RoadKind kind = RoadKind::noisy_tone;
    double frequency = 1.7;     // [Hz]
    double amplitude = 1e-3;    // [m]
    double snr_db = 7.0;
    double cutoff = 10.0;       // [Hz]
    double sample_rate = 1000;  // [Hz]
    std::uint64_t seed = 42;
    double duration = 0.0;      // [s]
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::compare;
    SuspensionParams params;
    SimConfig sim;
    MpcConfig mpc;
    RoadSpec road;
    FrSweepConfig freqresp;
    double passive_u = kNominalElectricalDamping;
    std::string output_dir = "out";
};

/// Flat "section.key" -> value map from a config file: `[section]` headers,
/// `key = value` lines, `#` or `;` comments.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Sets one dotted key. Throws ConfigError naming the key on unknown keys or
/// unparsable values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Defaults, then the file (if any), then `key=value` overrides in order.
ExperimentConfig load_config(const std::optional<std::string>& path,
                             const std::vector<std::string>& overrides);

/// Every `key = value` pair that load_config understands, with current values.
std::string dump_config(const ExperimentConfig& cfg);

struct Violation {
    std::string key;
    std::string value;
    std::string constraint;
};

/// Empty iff every invariant holds. Never throws.
std::vector<Violation> validate_config(const ExperimentConfig& cfg);

double effective_road_duration(const ExperimentConfig& cfg);
RoadSignal build_road(const ExperimentConfig& cfg);

/// Integration steps per control period T_s.
int steps_per_period(const ExperimentConfig& cfg);

struct VariantMetrics {
    std::string variant;
    double accel_l2 = 0.0;     // 2-norm of interval-mean accelerations [m/s^2]
    double mean_power = 0.0;   // harvested energy over elapsed time [W]
    double peak_accel = 0.0;   // max |interval-mean acceleration| [m/s^2]
    std::uint64_t road_checksum = 0;
};

/// 100 (a - b) / b, with b named as the baseline.
struct PercentDelta {
    std::string quantity;
    std::string variant;
    std::string baseline;
    double percent;
};

struct MetricsSummary {
    ExperimentKind kind = ExperimentKind::passive;
    std::vector<VariantMetrics> variants;
    std::vector<PercentDelta> deltas;
    /// freqresp only: acceleration peaks per model.
    std::vector<std::pair<std::string, FrPoint>> peaks;
};

/// Metrics of a trajectory recorded on a grid that divides T_s. The
/// acceleration sequence is (x2(t_{k+1}) - x2(t_k)) / T_s on the T_s grid: the
/// interval-mean acceleration, which does not sample the jump a held control
/// causes at its update instants. Mean power is the trapezoid integral of
/// u_k * (x6 - (x2 - x4))^2 over each recorded interval with the control held at u_k,
/// divided by the elapsed time, for the same reason.
VariantMetrics trajectory_metrics(const std::string& variant, const Trajectory& traj,
                                  double sample_time);

double percent_delta(double value, double baseline);

struct VariantRun {
    std::string name;
    Trajectory trajectory;
    std::vector<SolverLogEntry> solver_log;
    std::uint64_t road_checksum = 0;
};

/// passive, MPC without preview and MPC with preview on one road. Variants
/// run in parallel; each gets its own controller.
std::vector<VariantRun> run_compare_variants(const ExperimentConfig& cfg, const RoadSignal& road);

VariantRun run_passive(const ExperimentConfig& cfg, const RoadSignal& road);
VariantRun run_mpc(const ExperimentConfig& cfg, const RoadSignal& road, PreviewMode preview);

/// Runs the configured experiment, writes its artifacts into output_dir and
/// returns the summary. Throws ConfigError when validation fails.
MetricsSummary run_experiment(const ExperimentConfig& cfg);

std::string format_summary(const MetricsSummary& summary);
void write_summary(const std::string& dir, const MetricsSummary& summary);

}  // namespace erva
