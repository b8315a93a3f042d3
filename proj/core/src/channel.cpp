// SPDX-License-Identifier: Apache-2.0

#include "stcloc/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace stcloc {

namespace {

constexpr double deg2rad = pi / 180.0;

// exp(j 2 pi x) with x reduced to its fractional part first.
cplx turn(double x)
{
    return std::polar(1.0, 2.0 * pi * (x - std::floor(x)));
}

// Per-bit-slot sum of column reflection coefficients with their spatial phase.
std::vector<cplx> frame_sums(const RisConfig &ris, const CodeSchedule &schedule, double angle_deg,
                             ElementTaper taper)
{
    const std::size_t L = schedule.code_length();
    const double psi = 2.0 * pi * ris.spacing_over_wavelength() * std::sin(angle_deg * deg2rad);
    double gain = static_cast<double>(ris.num_rows);
    if (taper == ElementTaper::cosine)
        gain *= std::max(0.0, std::cos(angle_deg * deg2rad));

    std::vector<cplx> sums(L);
    for (std::size_t f = 0; f < L; ++f)
    {
        cplx s{0.0, 0.0};
        for (std::size_t q = 0; q < schedule.num_columns(); ++q)
            s += ris.reflection_map(schedule.column_state(q, static_cast<long>(f))) *
                 std::polar(1.0, psi * static_cast<double>(q));
        sums[f] = s * gain;
    }
    return sums;
}

void add_lines(std::vector<cplx> &out, const std::vector<cplx> &lines, int n_max, double f0, double fs, cplx scale,
               double delay)
{
    for (int n = -n_max; n <= n_max; ++n)
    {
        const cplx a = lines[static_cast<std::size_t>(n + n_max)] * scale;
        if (a == cplx(0.0))
            continue;
        for (std::size_t i = 0; i < out.size(); ++i)
        {
            const double t = (static_cast<double>(i) + 0.5) / fs - delay;
            out[i] += a * turn(n * f0 * t);
        }
    }
}

void add_frames(std::vector<cplx> &out, const std::vector<cplx> &sums, double tau, double fs, cplx scale,
                double delay)
{
    const long L = static_cast<long>(sums.size());
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        const double t = (static_cast<double>(i) + 0.5) / fs - delay;
        long frame = static_cast<long>(std::floor(t / tau)) % L;
        if (frame < 0)
            frame += L;
        out[i] += sums[static_cast<std::size_t>(frame)] * scale;
    }
}

} // namespace

void ChannelConfig::validate() const
{
    if (snr_db && !std::isfinite(*snr_db))
        throw std::invalid_argument("ChannelConfig: snr_db must be finite");
    if (!std::isfinite(carrier_leak))
        throw std::invalid_argument("ChannelConfig: carrier_leak must be finite");
    for (const auto &tap : multipath_taps)
    {
        if (!(tap.delay >= 0.0))
            throw std::invalid_argument("ChannelConfig: multipath delays must be >= 0");
        if (!(tap.arrival_angle >= -90.0 && tap.arrival_angle <= 90.0))
            throw std::invalid_argument("ChannelConfig: multipath arrival angles must lie in [-90, 90]");
    }
}

StateMatrix state_matrix(const CodeSchedule &schedule, long frame, std::size_t num_rows)
{
    if (frame < 0)
        throw std::invalid_argument("state_matrix: frame must be >= 0");
    StateMatrix m;
    m.rows = num_rows;
    m.columns = schedule.num_columns();
    m.states.resize(m.rows * m.columns);
    for (std::size_t c = 0; c < m.columns; ++c)
    {
        const auto s = static_cast<std::uint8_t>(schedule.column_state(c, frame));
        for (std::size_t r = 0; r < m.rows; ++r)
            m.states[r * m.columns + c] = s;
    }
    return m;
}

std::vector<cplx> harmonic_lines(const RisConfig &ris, const CodeSchedule &schedule, double angle_deg,
                                 ElementTaper taper)
{
    const int n_max = max_harmonic_order(static_cast<int>(schedule.code_length()), ris.spacing_over_wavelength());
    std::vector<cplx> lines;
    lines.reserve(static_cast<std::size_t>(2 * n_max + 1));
    for (int n = -n_max; n <= n_max; ++n)
        lines.push_back(harmonic_response(ris, schedule, n, angle_deg, taper));
    return lines;
}

double total_harmonic_power(const RisConfig &ris, const CodeSchedule &schedule, double angle_deg,
                            ElementTaper taper)
{
    double p = 0.0;
    for (const auto &a : harmonic_lines(ris, schedule, angle_deg, taper))
        p += std::norm(a);
    return p;
}

Waveform synthesize_received(const RisConfig &ris, const CodeSchedule &schedule, double rx_angle_deg,
                             const ChannelConfig &channel, double duration, double sample_rate, SynthesisMode mode,
                             ElementTaper taper)
{
    ris.validate();
    channel.validate();
    if (schedule.num_columns() != ris.num_columns)
        throw std::invalid_argument("synthesize_received: schedule does not match the RIS column count");
    if (!(rx_angle_deg >= -90.0 && rx_angle_deg <= 90.0))
        throw std::invalid_argument("synthesize_received: receiver angle must lie in [-90, 90] degrees");

    const BinaryCode &code = schedule.base_code();
    const double T0 = code.period();
    const double f0 = code.modulation_frequency();
    const int L = static_cast<int>(code.length());
    const int n_max = max_harmonic_order(L, ris.spacing_over_wavelength());

    if (!(duration >= 2.0 * T0 * (1.0 - 1e-12)))
        throw std::invalid_argument("synthesize_received: duration " + std::to_string(duration) +
                                    " s is shorter than two code periods (" + std::to_string(2.0 * T0) + " s)");
    if (!(sample_rate > 4.0 * f0 * n_max) || !(sample_rate > 0.0))
        throw std::invalid_argument("synthesize_received: sample rate must exceed 4 f0 n_max = " +
                                    std::to_string(4.0 * f0 * n_max) + " Hz");

    Waveform w;
    w.sample_rate = sample_rate;
    w.modulation_frequency = f0;
    w.code_length = L;
    w.n_max = n_max;
    const auto count = static_cast<std::size_t>(std::llround(duration * sample_rate));
    w.samples.assign(count, cplx(channel.carrier_leak, 0.0));

    if (mode == SynthesisMode::harmonic_domain)
    {
        add_lines(w.samples, harmonic_lines(ris, schedule, rx_angle_deg, taper), n_max, f0, sample_rate, 1.0, 0.0);
        for (const auto &tap : channel.multipath_taps)
            add_lines(w.samples, harmonic_lines(ris, schedule, tap.arrival_angle, taper), n_max, f0, sample_rate,
                      tap.gain, tap.delay);
    }
    else
    {
        const double tau = code.bit_duration();
        add_frames(w.samples, frame_sums(ris, schedule, rx_angle_deg, taper), tau, sample_rate, 1.0, 0.0);
        for (const auto &tap : channel.multipath_taps)
            add_frames(w.samples, frame_sums(ris, schedule, tap.arrival_angle, taper), tau, sample_rate, tap.gain,
                       tap.delay);
    }

    if (channel.snr_db)
    {
        double ref = total_harmonic_power(ris, schedule, rx_angle_deg, taper);
        if (ref == 0.0)
            ref = 1.0; // nothing radiates toward the receiver; fall back to unit reference power
        add_noise(w, *channel.snr_db, ref, (2.0 * n_max + 1.0) * f0, channel.rng_seed);
    }
    return w;
}

void add_noise(Waveform &w, double snr_db, double reference_power, double bandwidth, std::uint64_t seed)
{
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("add_noise: bandwidth must be positive");
    const double in_band = reference_power / std::pow(10.0, snr_db / 10.0);
    const double variance = in_band * w.sample_rate / bandwidth;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    for (auto &s : w.samples)
    {
        const double re = normal(rng);
        const double im = normal(rng);
        s += cplx(re, im);
    }
}

void frequency_shift(Waveform &w, double offset_hz)
{
    for (std::size_t i = 0; i < w.samples.size(); ++i)
        w.samples[i] *= turn(offset_hz * w.time(i));
}

} // namespace stcloc
