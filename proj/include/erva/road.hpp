#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace erva {

enum class RoadKind { zero, tone, noisy_tone };

/// Road height w(t) [m]. Immutable; copies share the precomputed noise series.
///
/// Noisy signals carry a sampled noise series n[i] at t = i / sample_rate.
/// Between grid points the noise is linearly interpolated; the tone part is
/// always evaluated analytically.
class RoadSignal {
public:
    RoadSignal() = default;

    RoadKind kind() const { return kind_; }
    double amplitude() const { return amplitude_; }
    double frequency() const { return frequency_; }
    double snr_db() const { return snr_db_; }
    double noise_cutoff() const { return cutoff_; }
    std::uint64_t seed() const { return seed_; }
    double sample_rate() const { return sample_rate_; }

    /// Largest valid sample time for noisy signals, +inf otherwise.
    double duration() const;

    std::span<const double> noise() const;

    /// Tone-only part of this signal (the nominal road without noise).
    RoadSignal nominal() const;

    /// 64-bit FNV-1a digest of the signal definition and noise samples.
    std::uint64_t checksum() const;

    friend RoadSignal zero_road();
    friend RoadSignal tone(double frequency, double amplitude);
    friend RoadSignal noisy_tone(double frequency, double amplitude, double snr_db, double cutoff,
                                 std::uint64_t seed, double sample_rate, double duration);

private:
    RoadKind kind_ = RoadKind::zero;
    double amplitude_ = 0.0;
    double frequency_ = 0.0;
    double snr_db_ = std::numeric_limits<double>::infinity();
    double cutoff_ = 0.0;
    std::uint64_t seed_ = 0;
    double sample_rate_ = 0.0;
    std::shared_ptr<const std::vector<double>> noise_;
};

RoadSignal zero_road();

/// w(t) = amplitude sin(2 pi frequency t). frequency must lie in (0, 50] Hz.
RoadSignal tone(double frequency, double amplitude);

/// Tone plus seeded low-pass Gaussian noise scaled so that the empirical
/// tone-to-noise power ratio over the generated samples equals snr_db.
/// snr_db = +inf returns the plain tone. The Gaussian source is mt19937_64
/// with a Box-Muller transform, so the series is bit-exact across platforms.
RoadSignal noisy_tone(double frequency, double amplitude, double snr_db, double cutoff,
                      std::uint64_t seed, double sample_rate, double duration);

/// w(t). Throws OutOfRange when t is outside [0, duration] of a noisy signal.
double sample(const RoadSignal& signal, double t);

/// Tone part sampled on the noise grid, used for SNR bookkeeping.
std::vector<double> tone_samples(const RoadSignal& signal);

/// Empirical 10 log10(P_tone / P_noise) over the stored grid.
double measured_snr_db(const RoadSignal& signal);

}  // namespace erva
