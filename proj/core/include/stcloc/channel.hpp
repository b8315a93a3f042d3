// SPDX-License-Identifier: Apache-2.0
//
// Complex-baseband synthesis of the signal a receiver at a given azimuth observes
// from a time-modulated RIS, plus channel impairments.

#ifndef STCLOC_CHANNEL_HPP
#define STCLOC_CHANNEL_HPP

#include "stcloc/array.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace stcloc {

struct MultipathTap
{
    double delay = 0.0;          // [s], >= 0
    cplx gain{0.0, 0.0};         // relative to the direct path
    double arrival_angle = 0.0;  // azimuth at which the tap leaves the RIS [deg]
};

struct ChannelConfig
{
    // Total direct-path harmonic power over noise power inside the (2 n_max + 1) f0
    // comb bandwidth. Empty means noiseless.
    std::optional<double> snr_db;
    double carrier_leak = 0.0; // unmodulated tone at zero offset (linear amplitude)
    std::vector<MultipathTap> multipath_taps;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

enum class SynthesisMode
{
    harmonic_domain,
    time_domain
};

/// Uniformly sampled complex baseband record. Sample i represents the interval
/// [i/fs, (i+1)/fs) and is stamped at its centre, t_i = (i + 1/2) / fs.
struct Waveform
{
    std::vector<cplx> samples;
    double sample_rate = 0.0;
    // Nominal code parameters of the generating RIS (f0 may be unknown to a receiver).
    double modulation_frequency = 0.0;
    int code_length = 0;
    int n_max = 0;

    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
    double time(std::size_t i) const { return (static_cast<double>(i) + 0.5) / sample_rate; }
};

/// ON/OFF state of every element during one bit slot.
struct StateMatrix
{
    std::size_t rows = 0;
    std::size_t columns = 0;
    std::vector<std::uint8_t> states; // row-major

    std::uint8_t at(std::size_t r, std::size_t c) const { return states[r * columns + c]; }
};

// Column q holds base-code bit (frame - shift_q) mod L, identical down each column.
StateMatrix state_matrix(const CodeSchedule &schedule, long frame, std::size_t num_rows);

// Analytic complex amplitude of every radiating line n = -n_max..n_max toward `angle_deg`.
std::vector<cplx> harmonic_lines(const RisConfig &ris, const CodeSchedule &schedule, double angle_deg,
                                 ElementTaper taper = ElementTaper::none);

// Sum of |line|^2 over the radiating orders: the SNR reference power.
double total_harmonic_power(const RisConfig &ris, const CodeSchedule &schedule, double angle_deg,
                            ElementTaper taper = ElementTaper::none);

/// Received baseband waveform at `rx_angle_deg`.
///
/// harmonic_domain sums the radiating lines |n| <= n_max analytically; time_domain
/// evaluates the instantaneous column states sample by sample, so it also carries the
/// non-radiating orders. Their radiating lines differ only by the sample-and-hold factor
/// x / sin(x), x = pi n f0 / fs. Throws std::invalid_argument when duration < 2 T0, the
/// sample rate is at or below 4 f0 n_max, or the angle leaves [-90, 90].
Waveform synthesize_received(const RisConfig &ris, const CodeSchedule &schedule, double rx_angle_deg,
                             const ChannelConfig &channel, double duration, double sample_rate,
                             SynthesisMode mode = SynthesisMode::harmonic_domain,
                             ElementTaper taper = ElementTaper::none);

// Adds circular white Gaussian noise so that reference_power / (noise power in
// `bandwidth`) equals snr_db.
void add_noise(Waveform &w, double snr_db, double reference_power, double bandwidth, std::uint64_t seed);

// Multiplies by exp(j 2 pi offset t): moves the whole comb by `offset_hz`.
void frequency_shift(Waveform &w, double offset_hz);

} // namespace stcloc

#endif
