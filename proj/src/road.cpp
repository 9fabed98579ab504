#include "erva/road.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "erva/errors.hpp"

namespace erva {

namespace {

constexpr double kMaxToneFrequency = 50.0;
constexpr double kTimeSlack = 1e-9;

// 53-bit uniform in (0, 1]; avoids the implementation-defined std distributions.
double unit_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

std::vector<double> gaussian_series(std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; i += 2) {
        const double radius = std::sqrt(-2.0 * std::log(unit_uniform(rng)));
        const double angle = 2.0 * std::numbers::pi * unit_uniform(rng);
        out[i] = radius * std::cos(angle);
        if (i + 1 < count) out[i + 1] = radius * std::sin(angle);
    }
    return out;
}

double tone_value(double amplitude, double frequency, double t) {
    return amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
}

void validate_tone(double frequency, double amplitude) {
    if (!(frequency > 0.0 && frequency <= kMaxToneFrequency)) {
        throw InvalidFrequency("tone frequency must lie in (0, 50] Hz, got " +
                               std::to_string(frequency));
    }
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
        throw InvalidFrequency("tone amplitude must be finite and >= 0");
    }
}

void fnv_mix(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
}

}  // namespace

double RoadSignal::duration() const {
    if (kind_ != RoadKind::noisy_tone) return std::numeric_limits<double>::infinity();
    return static_cast<double>(noise_->size() - 1) / sample_rate_;
}

std::span<const double> RoadSignal::noise() const {
    if (!noise_) return {};
    return {noise_->data(), noise_->size()};
}

RoadSignal RoadSignal::nominal() const {
    if (kind_ == RoadKind::zero) return zero_road();
    return tone(frequency_, amplitude_);
}

std::uint64_t RoadSignal::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const int kind = static_cast<int>(kind_);
    fnv_mix(h, &kind, sizeof kind);
    for (double v : {amplitude_, frequency_, snr_db_, cutoff_, sample_rate_}) fnv_mix(h, &v, sizeof v);
    fnv_mix(h, &seed_, sizeof seed_);
    if (noise_) fnv_mix(h, noise_->data(), noise_->size() * sizeof(double));
    return h;
}

RoadSignal zero_road() {
    return RoadSignal{};
}

RoadSignal tone(double frequency, double amplitude) {
    validate_tone(frequency, amplitude);
    RoadSignal s;
    s.kind_ = RoadKind::tone;
    s.frequency_ = frequency;
    s.amplitude_ = amplitude;
    return s;
}

RoadSignal noisy_tone(double frequency, double amplitude, double snr_db, double cutoff,
                      std::uint64_t seed, double sample_rate, double duration) {
    validate_tone(frequency, amplitude);
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
        throw InvalidSnr("snr_db must be finite or +inf");
    }
    if (snr_db == std::numeric_limits<double>::infinity()) return tone(frequency, amplitude);
    if (!(cutoff > 0.0) || !(sample_rate >= 10.0 * cutoff)) {
        throw InvalidFrequency("noise sample rate must be at least 10x the cutoff");
    }
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw InvalidFrequency("noise duration must be positive");
    }

    const auto count = static_cast<std::size_t>(std::ceil(duration * sample_rate - 1e-9)) + 1;
    // Burn-in of five filter time constants so the series starts stationary.
    const double decay = std::exp(-2.0 * std::numbers::pi * cutoff / sample_rate);
    const auto burn_in = static_cast<std::size_t>(
        std::ceil(5.0 * sample_rate / (2.0 * std::numbers::pi * cutoff)));
    const std::vector<double> white = gaussian_series(seed, count + burn_in);

    std::vector<double> noise(count);
    double state = 0.0;
    for (std::size_t i = 0; i < white.size(); ++i) {
        state = decay * state + (1.0 - decay) * white[i];
        if (i >= burn_in) noise[i - burn_in] = state;
    }

    double tone_power = 0.0;
    double noise_power = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double v = tone_value(amplitude, frequency, static_cast<double>(i) / sample_rate);
        tone_power += v * v;
        noise_power += noise[i] * noise[i];
    }
    if (!(noise_power > 0.0)) throw InvalidSnr("generated noise has zero power");
    const double scale = std::sqrt(tone_power / noise_power * std::pow(10.0, -snr_db / 10.0));
    for (double& v : noise) v *= scale;

    RoadSignal s;
    s.kind_ = RoadKind::noisy_tone;
    s.frequency_ = frequency;
    s.amplitude_ = amplitude;
    s.snr_db_ = snr_db;
    s.cutoff_ = cutoff;
    s.seed_ = seed;
    s.sample_rate_ = sample_rate;
    s.noise_ = std::make_shared<const std::vector<double>>(std::move(noise));
    return s;
}

double sample(const RoadSignal& signal, double t) {
    switch (signal.kind()) {
        case RoadKind::zero:
            return 0.0;
        case RoadKind::tone:
            return tone_value(signal.amplitude(), signal.frequency(), t);
        case RoadKind::noisy_tone:
            break;
    }
    const auto noise = signal.noise();
    const double pos = t * signal.sample_rate();
    const double last = static_cast<double>(noise.size() - 1);
    if (!(pos >= -kTimeSlack) || !(pos <= last + kTimeSlack)) {
        throw OutOfRange("road sampled at t = " + std::to_string(t) +
                         " s outside [0, " + std::to_string(signal.duration()) + "] s");
    }
    const double clamped = std::clamp(pos, 0.0, last);
    const auto i = std::min(static_cast<std::size_t>(clamped), noise.size() - 1);
    const double frac = clamped - static_cast<double>(i);
    double n = noise[i];
    if (frac > 0.0) n += frac * (noise[i + 1] - noise[i]);
    return tone_value(signal.amplitude(), signal.frequency(), t) + n;
}

std::vector<double> tone_samples(const RoadSignal& signal) {
    std::vector<double> out(signal.noise().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = tone_value(signal.amplitude(), signal.frequency(),
                            static_cast<double>(i) / signal.sample_rate());
    }
    return out;
}

double measured_snr_db(const RoadSignal& signal) {
    const auto noise = signal.noise();
    if (noise.empty()) return std::numeric_limits<double>::infinity();
    const auto tones = tone_samples(signal);
    double pt = 0.0;
    double pn = 0.0;
    for (std::size_t i = 0; i < noise.size(); ++i) {
        pt += tones[i] * tones[i];
        pn += noise[i] * noise[i];
    }
    return 10.0 * std::log10(pt / pn);
}

}  // namespace erva
