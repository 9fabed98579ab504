#include "erva/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "erva/errors.hpp"

namespace erva {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || end != s.c_str() + s.size() || errno == ERANGE) {
        throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" +
                          text + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + text + "'");
}

struct Setting {
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string& key, const std::string&)> set;
};

#define ERVA_DOUBLE(field)                                                               \
    Setting {                                                                            \
        [](const ExperimentConfig& c) { return format_double(c.field); },                \
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {        \
                c.field = parse_double(k, v);                                            \
            }                                                                            \
    }
#define ERVA_INT(field)                                                                  \
    Setting {                                                                            \
        [](const ExperimentConfig& c) { return std::to_string(c.field); },               \
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {        \
                c.field = static_cast<int>(parse_integer(k, v));                         \
            }                                                                            \
    }

const std::map<std::string, Setting>& settings() {
    static const std::map<std::string, Setting> table = {
        {"params.M_s", ERVA_DOUBLE(params.M_s)},
        {"params.M_us", ERVA_DOUBLE(params.M_us)},
        {"params.k_s", ERVA_DOUBLE(params.k_s)},
        {"params.k_t", ERVA_DOUBLE(params.k_t)},
        {"params.c", ERVA_DOUBLE(params.c)},
        {"params.k_d", ERVA_DOUBLE(params.k_d)},
        {"params.l", ERVA_DOUBLE(params.l)},
        {"params.m_r", ERVA_DOUBLE(params.m_r)},
        {"params.m_b", ERVA_DOUBLE(params.m_b)},
        {"params.m_d", ERVA_DOUBLE(params.m_d)},
        {"params.epsilon", ERVA_DOUBLE(params.epsilon)},
        {"sim.t0", ERVA_DOUBLE(sim.t0)},
        {"sim.t1", ERVA_DOUBLE(sim.t1)},
        {"sim.dt", ERVA_DOUBLE(sim.dt)},
        {"mpc.N", ERVA_INT(mpc.horizon)},
        {"mpc.T_s", ERVA_DOUBLE(mpc.sample_time)},
        {"mpc.alpha1", ERVA_DOUBLE(mpc.alpha1)},
        {"mpc.alpha2", ERVA_DOUBLE(mpc.alpha2)},
        {"mpc.u_min", ERVA_DOUBLE(mpc.u_min)},
        {"mpc.u_max", ERVA_DOUBLE(mpc.u_max)},
        {"mpc.max_iters", ERVA_INT(mpc.max_iters)},
        {"mpc.grad_tol", ERVA_DOUBLE(mpc.grad_tol)},
        {"mpc.dt_pred", ERVA_DOUBLE(mpc.dt_pred)},
        {"mpc.warm_start", ERVA_DOUBLE(mpc.warm_start)},
        {"mpc.coordinate_passes", ERVA_INT(mpc.coordinate_passes)},
        {"mpc.coordinate_levels", ERVA_INT(mpc.coordinate_levels)},
        {"mpc.screen_starts",
         {[](const ExperimentConfig& c) { return std::string(c.mpc.screen_starts ? "true" : "false"); },
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.mpc.screen_starts = parse_bool(k, v);
          }}},
        {"mpc.preview",
         {[](const ExperimentConfig& c) {
              return std::string(c.mpc.preview == PreviewMode::full_preview ? "full" : "none");
          },
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              const std::string s = trim(v);
              if (s == "full") {
                  c.mpc.preview = PreviewMode::full_preview;
              } else if (s == "none") {
                  c.mpc.preview = PreviewMode::no_preview;
              } else {
                  throw ConfigError("config key '" + k + "': expected full or none, got '" + v + "'");
              }
          }}},
        {"mpc.preview_source",
         {[](const ExperimentConfig& c) {
              return std::string(c.mpc.preview_nominal_only ? "nominal" : "true");
          },
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              const std::string s = trim(v);
              if (s == "true") {
                  c.mpc.preview_nominal_only = false;
              } else if (s == "nominal") {
                  c.mpc.preview_nominal_only = true;
              } else {
                  throw ConfigError("config key '" + k + "': expected true or nominal, got '" + v + "'");
              }
          }}},
        {"road.kind",
         {[](const ExperimentConfig& c) {
              switch (c.road.kind) {
                  case RoadKind::zero: return std::string("zero");
                  case RoadKind::tone: return std::string("tone");
                  case RoadKind::noisy_tone: break;
              }
              return std::string("noisy_tone");
          },
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              const std::string s = trim(v);
              if (s == "zero") {
                  c.road.kind = RoadKind::zero;
              } else if (s == "tone") {
                  c.road.kind = RoadKind::tone;
              } else if (s == "noisy_tone") {
                  c.road.kind = RoadKind::noisy_tone;
              } else {
                  throw ConfigError("config key '" + k + "': expected zero, tone or noisy_tone, got '" +
                                    v + "'");
              }
          }}},
        {"road.frequency", ERVA_DOUBLE(road.frequency)},
        {"road.amplitude", ERVA_DOUBLE(road.amplitude)},
        {"road.snr_db", ERVA_DOUBLE(road.snr_db)},
        {"road.cutoff", ERVA_DOUBLE(road.cutoff)},
        {"road.sample_rate", ERVA_DOUBLE(road.sample_rate)},
        {"road.duration", ERVA_DOUBLE(road.duration)},
        {"road.seed",
         {[](const ExperimentConfig& c) { return std::to_string(c.road.seed); },
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.road.seed = parse_unsigned(k, v);
          }}},
        {"passive.u", ERVA_DOUBLE(passive_u)},
        {"freqresp.f_min", ERVA_DOUBLE(freqresp.f_min)},
        {"freqresp.f_max", ERVA_DOUBLE(freqresp.f_max)},
        {"freqresp.n_points", ERVA_INT(freqresp.n_points)},
        {"freqresp.spacing",
         {[](const ExperimentConfig& c) {
              return std::string(c.freqresp.spacing == Spacing::linear ? "linear" : "log");
          },
          [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              const std::string s = trim(v);
              if (s == "linear") {
                  c.freqresp.spacing = Spacing::linear;
              } else if (s == "log") {
                  c.freqresp.spacing = Spacing::logarithmic;
              } else {
                  throw ConfigError("config key '" + k + "': expected linear or log, got '" + v + "'");
              }
          }}},
        {"freqresp.amplitude", ERVA_DOUBLE(freqresp.amplitude)},
        {"freqresp.settle_periods", ERVA_INT(freqresp.settle_periods)},
        {"freqresp.measure_periods", ERVA_INT(freqresp.measure_periods)},
        {"freqresp.u_const", ERVA_DOUBLE(freqresp.u_const)},
        {"freqresp.max_dt", ERVA_DOUBLE(freqresp.max_dt)},
        {"output.dir",
         {[](const ExperimentConfig& c) { return c.output_dir; },
          [](ExperimentConfig& c, const std::string&, const std::string& v) {
              c.output_dir = trim(v);
          }}},
    };
    return table;
}

#undef ERVA_DOUBLE
#undef ERVA_INT

bool is_integer_multiple(double whole, double part) {
    const double ratio = whole / part;
    return std::abs(ratio - std::round(ratio)) < 1e-9 * std::max(1.0, ratio);
}

}  // namespace

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
    if (name == "freqresp") return ExperimentKind::freqresp;
    if (name == "passive") return ExperimentKind::passive;
    if (name == "mpc") return ExperimentKind::mpc;
    if (name == "compare") return ExperimentKind::compare;
    return std::nullopt;
}

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::freqresp: return "freqresp";
        case ExperimentKind::passive: return "passive";
        case ExperimentKind::mpc: return "mpc";
        case ExperimentKind::compare: return "compare";
    }
    return "unknown";
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        out[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const auto it = settings().find(key);
    if (it == settings().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(cfg, key, value);
}

ExperimentConfig load_config(const std::optional<std::string>& path,
                             const std::vector<std::string>& overrides) {
    ExperimentConfig cfg;
    if (path) {
        std::ifstream in(*path);
        if (!in) throw IoError("cannot read config file " + *path);
        std::stringstream buf;
        buf << in.rdbuf();
        for (const auto& [key, value] : parse_config_text(buf.str())) apply_setting(cfg, key, value);
    }
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + item + "' is not of the form key=value");
        }
        apply_setting(cfg, trim(item.substr(0, eq)), item.substr(eq + 1));
    }
    return cfg;
}

std::string dump_config(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [key, setting] : settings()) out += key + " = " + setting.get(cfg) + "\n";
    return out;
}

std::vector<Violation> validate_config(const ExperimentConfig& cfg) {
    std::vector<Violation> out;
    const auto require = [&](bool ok, const std::string& key, double value,
                             const std::string& constraint) {
        if (!ok) out.push_back({key, format_double(value), constraint});
    };

    const SuspensionParams& p = cfg.params;
    for (const auto& [key, value] :
         {std::pair{"params.M_s", p.M_s}, {"params.M_us", p.M_us}, {"params.k_s", p.k_s},
          {"params.k_t", p.k_t}, {"params.k_d", p.k_d}, {"params.m_r", p.m_r},
          {"params.m_b", p.m_b}, {"params.m_d", p.m_d}, {"params.l", p.l}}) {
        require(value > 0.0 && std::isfinite(value), key, value, "must be finite and > 0");
    }
    require(p.c >= 0.0 && std::isfinite(p.c), "params.c", p.c, "must be finite and >= 0");
    require(p.epsilon >= 0.0 && std::isfinite(p.epsilon), "params.epsilon", p.epsilon,
            "must be finite and >= 0");

    const SimConfig& s = cfg.sim;
    require(s.t1 > s.t0, "sim.t1", s.t1, "must exceed sim.t0");
    require(s.dt > 0.0, "sim.dt", s.dt, "must be > 0");

    const MpcConfig& m = cfg.mpc;
    require(m.horizon >= 1, "mpc.N", m.horizon, "must be >= 1");
    require(m.sample_time > 0.0, "mpc.T_s", m.sample_time, "must be > 0");
    if (s.dt > 0.0 && m.sample_time > 0.0) {
        require(s.dt <= m.sample_time && is_integer_multiple(m.sample_time, s.dt), "sim.dt", s.dt,
                "must divide mpc.T_s into an integer number of steps");
    }
    require(m.alpha1 >= 0.0, "mpc.alpha1", m.alpha1, "must be >= 0");
    require(m.alpha2 >= 0.0, "mpc.alpha2", m.alpha2, "must be >= 0");
    require(m.u_min >= 0.0, "mpc.u_min", m.u_min, "must be >= 0 (semi-active)");
    require(m.u_min <= m.u_max, "mpc.u_max", m.u_max, "must be >= mpc.u_min");
    require(m.max_iters >= 0, "mpc.max_iters", m.max_iters, "must be >= 0");
    require(m.grad_tol >= 0.0, "mpc.grad_tol", m.grad_tol, "must be >= 0");
    require(m.coordinate_passes >= 0, "mpc.coordinate_passes", m.coordinate_passes, "must be >= 0");
    require(m.coordinate_levels >= 2, "mpc.coordinate_levels", m.coordinate_levels, "must be >= 2");
    require(m.dt_pred <= m.sample_time, "mpc.dt_pred", m.dt_pred, "must not exceed mpc.T_s");
    require(m.warm_start >= 0.0, "mpc.warm_start", m.warm_start, "must be >= 0");
    require(cfg.passive_u >= 0.0, "passive.u", cfg.passive_u, "must be >= 0 (semi-active)");

    const RoadSpec& r = cfg.road;
    if (r.kind != RoadKind::zero) {
        require(r.frequency > 0.0 && r.frequency <= 50.0, "road.frequency", r.frequency,
                "must lie in (0, 50] Hz");
        require(r.amplitude >= 0.0 && std::isfinite(r.amplitude), "road.amplitude", r.amplitude,
                "must be finite and >= 0");
    }
    if (r.kind == RoadKind::noisy_tone) {
        require(!std::isnan(r.snr_db) && r.snr_db > -HUGE_VAL, "road.snr_db", r.snr_db,
                "must be finite or +inf");
        require(r.cutoff > 0.0, "road.cutoff", r.cutoff, "must be > 0");
        require(r.sample_rate >= 10.0 * r.cutoff, "road.sample_rate", r.sample_rate,
                "must be >= 10 x road.cutoff");
        if (r.duration > 0.0) {
            const double needed = s.t1 + m.horizon * m.sample_time;
            require(r.duration >= needed, "road.duration", r.duration,
                    "must cover sim.t1 + N * T_s = " + format_double(needed) + " s");
        }
    }

    const FrSweepConfig& f = cfg.freqresp;
    require(f.f_min > 0.0, "freqresp.f_min", f.f_min, "must be > 0");
    require(f.f_max > f.f_min, "freqresp.f_max", f.f_max, "must exceed freqresp.f_min");
    require(f.f_max <= 50.0, "freqresp.f_max", f.f_max, "must be <= 50 Hz");
    require(f.n_points >= 2, "freqresp.n_points", f.n_points, "must be >= 2");
    require(f.amplitude >= 0.0, "freqresp.amplitude", f.amplitude, "must be >= 0");
    require(f.settle_periods >= 0, "freqresp.settle_periods", f.settle_periods, "must be >= 0");
    require(f.measure_periods >= 1, "freqresp.measure_periods", f.measure_periods, "must be >= 1");
    require(f.u_const >= 0.0, "freqresp.u_const", f.u_const, "must be >= 0");
    require(f.max_dt > 0.0, "freqresp.max_dt", f.max_dt, "must be > 0");

    require(!cfg.output_dir.empty(), "output.dir", 0.0, "must not be empty");
    return out;
}

double effective_road_duration(const ExperimentConfig& cfg) {
    if (cfg.road.duration > 0.0) return cfg.road.duration;
    // One extra sample period of margin past the last preview instant.
    return cfg.sim.t1 + (cfg.mpc.horizon + 1) * cfg.mpc.sample_time;
}

RoadSignal build_road(const ExperimentConfig& cfg) {
    const RoadSpec& r = cfg.road;
    switch (r.kind) {
        case RoadKind::zero: return zero_road();
        case RoadKind::tone: return tone(r.frequency, r.amplitude);
        case RoadKind::noisy_tone: break;
    }
    return noisy_tone(r.frequency, r.amplitude, r.snr_db, r.cutoff, r.seed, r.sample_rate,
                      effective_road_duration(cfg));
}

int steps_per_period(const ExperimentConfig& cfg) {
    return std::max(1, static_cast<int>(std::lround(cfg.mpc.sample_time / cfg.sim.dt)));
}

VariantMetrics trajectory_metrics(const std::string& variant, const Trajectory& traj,
                                  double sample_time) {
    VariantMetrics m;
    m.variant = variant;
    const std::size_t n = traj.size();
    if (n < 2) return m;
    const double spacing = traj.times[1] - traj.times[0];
    const auto stride =
        static_cast<std::size_t>(std::max(1L, std::lround(sample_time / spacing)));
    double sum_sq = 0.0;
    for (std::size_t k = 0; k + stride < n; k += stride) {
        const double a = (traj.states[k + stride](1) - traj.states[k](1)) / sample_time;
        sum_sq += a * a;
        m.peak_accel = std::max(m.peak_accel, std::abs(a));
    }
    m.accel_l2 = std::sqrt(sum_sq);
    double energy = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double u = traj.controls[k];
        energy += 0.5 *
                  (instantaneous_power(traj.states[k], u) +
                   instantaneous_power(traj.states[k + 1], u)) *
                  (traj.times[k + 1] - traj.times[k]);
    }
    m.mean_power = energy / (traj.times[n - 1] - traj.times[0]);
    return m;
}

double percent_delta(double value, double baseline) {
    return 100.0 * (value - baseline) / baseline;
}

VariantRun run_passive(const ExperimentConfig& cfg, const RoadSignal& road) {
    SimConfig sim = cfg.sim;
    sim.record_stride = 1;
    VariantRun run;
    run.name = "passive";
    run.trajectory =
        simulate(ErvaState::Zero(), constant_controller(cfg.passive_u), road, sim, cfg.params);
    run.road_checksum = road.checksum();
    return run;
}

VariantRun run_mpc(const ExperimentConfig& cfg, const RoadSignal& road, PreviewMode preview) {
    SimConfig sim = cfg.sim;
    sim.record_stride = 1;
    MpcConfig mpc = cfg.mpc;
    mpc.preview = preview;
    auto controller = std::make_shared<MpcController>(road, mpc, cfg.params);
    VariantRun run;
    run.name = preview == PreviewMode::full_preview ? "mpc_preview" : "mpc_no_preview";
    run.trajectory = simulate(ErvaState::Zero(), mpc_controller(controller), road, sim, cfg.params);
    run.solver_log = controller->log();
    run.road_checksum = road.checksum();
    return run;
}

std::vector<VariantRun> run_compare_variants(const ExperimentConfig& cfg, const RoadSignal& road) {
    std::vector<VariantRun> runs(3);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < 3; ++i) {
        try {
            if (i == 0) {
                runs[0] = run_passive(cfg, road);
            } else {
                runs[static_cast<std::size_t>(i)] =
                    run_mpc(cfg, road, i == 1 ? PreviewMode::no_preview : PreviewMode::full_preview);
            }
        } catch (...) {
#pragma omp critical(erva_compare_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return runs;
}

namespace {

void add_deltas(MetricsSummary& summary, const VariantMetrics& a, const VariantMetrics& b) {
    summary.deltas.push_back({"accel_l2", a.variant, b.variant, percent_delta(a.accel_l2, b.accel_l2)});
    summary.deltas.push_back(
        {"mean_power", a.variant, b.variant, percent_delta(a.mean_power, b.mean_power)});
    summary.deltas.push_back(
        {"peak_accel", a.variant, b.variant, percent_delta(a.peak_accel, b.peak_accel)});
}

std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void write_variant(const std::string& dir, const VariantRun& run) {
    write_trajectory_csv(join(dir, "trajectory_" + run.name + ".csv"), run.trajectory);
}

}  // namespace

MetricsSummary run_experiment(const ExperimentConfig& cfg) {
    const auto violations = validate_config(cfg);
    if (!violations.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  " + v.key + " = " + v.value + ": " + v.constraint;
        throw ConfigError(msg);
    }

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.output_dir + ": " + ec.message());

    MetricsSummary summary;
    summary.kind = cfg.kind;

    switch (cfg.kind) {
        case ExperimentKind::freqresp: {
            const auto erva = sweep(SweepModel::erva_passive, cfg.freqresp, cfg.params);
            const auto bench = sweep(SweepModel::benchmark, cfg.freqresp, cfg.params);
            write_freqresp_csv(join(cfg.output_dir, "freqresp.csv"), erva, bench);
            for (std::size_t i : acceleration_peaks(erva)) summary.peaks.emplace_back("erva", erva[i]);
            for (std::size_t i : acceleration_peaks(bench)) {
                summary.peaks.emplace_back("benchmark", bench[i]);
            }
            break;
        }
        case ExperimentKind::passive: {
            const RoadSignal road = build_road(cfg);
            const VariantRun run = run_passive(cfg, road);
            write_variant(cfg.output_dir, run);
            VariantMetrics m = trajectory_metrics(run.name, run.trajectory, cfg.mpc.sample_time);
            m.road_checksum = run.road_checksum;
            summary.variants.push_back(m);
            break;
        }
        case ExperimentKind::mpc: {
            const RoadSignal road = build_road(cfg);
            const VariantRun run = run_mpc(cfg, road, cfg.mpc.preview);
            write_variant(cfg.output_dir, run);
            write_solver_log(join(cfg.output_dir, "solver_log.csv"), run.solver_log);
            VariantMetrics m = trajectory_metrics(run.name, run.trajectory, cfg.mpc.sample_time);
            m.road_checksum = run.road_checksum;
            summary.variants.push_back(m);
            break;
        }
        case ExperimentKind::compare: {
            const RoadSignal road = build_road(cfg);
            const auto runs = run_compare_variants(cfg, road);
            for (const auto& run : runs) {
                write_variant(cfg.output_dir, run);
                if (!run.solver_log.empty()) {
                    write_solver_log(join(cfg.output_dir, "solver_log_" + run.name + ".csv"),
                                     run.solver_log);
                }
                VariantMetrics m = trajectory_metrics(run.name, run.trajectory, cfg.mpc.sample_time);
                m.road_checksum = run.road_checksum;
                summary.variants.push_back(m);
            }
            add_deltas(summary, summary.variants[2], summary.variants[1]);
            add_deltas(summary, summary.variants[2], summary.variants[0]);
            add_deltas(summary, summary.variants[1], summary.variants[0]);
            break;
        }
    }
    write_summary(cfg.output_dir, summary);
    return summary;
}

std::string format_summary(const MetricsSummary& summary) {
    std::ostringstream os;
    char buf[256];
    os << "experiment: " << to_string(summary.kind) << "\n";
    if (!summary.peaks.empty()) {
        os << "acceleration peaks:\n";
        for (const auto& [model, point] : summary.peaks) {
            std::snprintf(buf, sizeof buf, "  %-10s f = %6.3f Hz  accel = %.6g m/s^2  power = %.6g W\n",
                          model.c_str(), point.frequency, point.accel_amplitude, point.mean_power);
            os << buf;
        }
    }
    for (const auto& v : summary.variants) {
        std::snprintf(buf, sizeof buf,
                      "%-15s accel_l2 = %.6f m/s^2  mean_power = %.6f W  peak_accel = %.6f m/s^2  "
                      "road = %016llx\n",
                      v.variant.c_str(), v.accel_l2, v.mean_power, v.peak_accel,
                      static_cast<unsigned long long>(v.road_checksum));
        os << buf;
    }
    for (const auto& d : summary.deltas) {
        std::snprintf(buf, sizeof buf, "%-10s %s vs %s (baseline): %+.2f %%\n", d.quantity.c_str(),
                      d.variant.c_str(), d.baseline.c_str(), d.percent);
        os << buf;
    }
    return os.str();
}

void write_summary(const std::string& dir, const MetricsSummary& summary) {
    {
        std::ofstream os(join(dir, "summary.txt"));
        if (!os) throw IoError("cannot write summary.txt in " + dir);
        os << format_summary(summary);
    }
    std::ofstream os(join(dir, "summary.csv"));
    if (!os) throw IoError("cannot write summary.csv in " + dir);
    os << "row,variant,baseline,quantity,value,road_checksum\n";
    char buf[64];
    const auto put = [&](const char* row, const std::string& variant, const std::string& baseline,
                         const std::string& quantity, double value, std::uint64_t checksum) {
        std::snprintf(buf, sizeof buf, "%.17g", value);
        os << row << ',' << variant << ',' << baseline << ',' << quantity << ',' << buf << ',';
        if (checksum != 0) {
            char hex[24];
            std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(checksum));
            os << hex;
        }
        os << '\n';
    };
    for (const auto& [model, point] : summary.peaks) {
        put("peak", model, "", "frequency", point.frequency, 0);
        put("peak", model, "", "accel_amplitude", point.accel_amplitude, 0);
    }
    for (const auto& v : summary.variants) {
        put("metric", v.variant, "", "accel_l2", v.accel_l2, v.road_checksum);
        put("metric", v.variant, "", "mean_power", v.mean_power, v.road_checksum);
        put("metric", v.variant, "", "peak_accel", v.peak_accel, v.road_checksum);
    }
    for (const auto& d : summary.deltas) {
        put("delta_pct", d.variant, d.baseline, d.quantity, d.percent, 0);
    }
    if (!os) throw IoError("write failed: summary.csv");
}

}  // namespace erva
