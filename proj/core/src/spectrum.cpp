// SPDX-License-Identifier: Apache-2.0

#include "stcloc/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <string>

namespace stcloc {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex &planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwBuffer
{
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n))
    {
        if (!data)
            throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer &) = delete;
    FftwBuffer &operator=(const FftwBuffer &) = delete;

    fftw_complex *data;
};

class FftPlan
{
  public:
    FftPlan(std::size_t n, fftw_complex *in, fftw_complex *out)
    {
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        if (!plan_)
            throw std::runtime_error("FFTW failed to create a plan");
    }
    ~FftPlan()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    FftPlan(const FftPlan &) = delete;
    FftPlan &operator=(const FftPlan &) = delete;

    void execute(fftw_complex *in, fftw_complex *out) const { fftw_execute_dft(plan_, in, out); }

  private:
    fftw_plan plan_;
};

std::vector<double> window_taps(WindowKind kind, std::size_t n)
{
    std::vector<double> w(n, 1.0);
    if (kind == WindowKind::hann)
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n));
    return w;
}

std::size_t samples_per_period(const Waveform &w, double f0)
{
    if (!(f0 > 0.0))
        throw std::invalid_argument("modulation frequency must be positive");
    const double spp = w.sample_rate / f0;
    const double rounded = std::round(spp);
    if (std::abs(spp - rounded) > 1e-6 * std::max(1.0, spp) || rounded < 1.0)
        throw std::invalid_argument("sample rate " + std::to_string(w.sample_rate) +
                                    " Hz is not an integer multiple of f0 = " + std::to_string(f0) +
                                    " Hz; harmonics would not fall on bins");
    return static_cast<std::size_t>(rounded);
}

} // namespace

std::vector<cplx> fft(std::span<const cplx> x)
{
    std::vector<cplx> out(x.size());
    if (x.empty())
        return out;
    FftwBuffer in(x.size()), res(x.size());
    std::memcpy(in.data, x.data(), x.size() * sizeof(cplx));
    FftPlan plan(x.size(), in.data, res.data);
    plan.execute(in.data, res.data);
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = cplx(res.data[i][0], res.data[i][1]);
    return out;
}

long AveragedSpectrum::nearest_bin(double freq) const
{
    if (frequencies.empty())
        return -1;
    const double df = bin_spacing();
    const long k = std::lround((freq - frequencies.front()) / df);
    if (k < 0 || k >= static_cast<long>(frequencies.size()))
        return -1;
    return k;
}

double AveragedSpectrum::magnitude_at(double freq) const
{
    if (frequencies.empty())
        return 0.0;
    const double pos = (freq - frequencies.front()) / bin_spacing();
    if (pos < 0.0 || pos > static_cast<double>(frequencies.size() - 1))
        return 0.0;
    const auto k = static_cast<std::size_t>(std::floor(pos));
    if (k + 1 >= magnitudes.size())
        return magnitudes[k];
    const double frac = pos - static_cast<double>(k);
    return magnitudes[k] * (1.0 - frac) + magnitudes[k + 1] * frac;
}

std::size_t window_count(std::size_t num_samples, std::size_t window_length, std::size_t hop)
{
    if (num_samples < window_length || hop == 0)
        return 0;
    return (num_samples - window_length) / hop + 1;
}

AveragedSpectrum average_spectrum(const Waveform &w, std::size_t window_length, double overlap_fraction,
                                  WindowKind window)
{
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
        throw std::invalid_argument("average_spectrum: overlap must lie in [0, 1)");
    if (window_length < 2)
        throw std::invalid_argument("average_spectrum: window must span at least 2 samples");
    if (w.samples.size() < window_length)
        throw std::invalid_argument("average_spectrum: waveform (" + std::to_string(w.samples.size()) +
                                    " samples) is shorter than one window (" + std::to_string(window_length) +
                                    ")");

    const std::size_t W = window_length;
    const auto hop =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(W) * (1.0 - overlap_fraction))));
    const std::size_t count = window_count(w.samples.size(), W, hop);
    const auto taps = window_taps(window, W);
    double gain = 0.0;
    for (double t : taps)
        gain += t;

    FftwBuffer in(W), out(W);
    FftPlan plan(W, in.data, out.data);
    std::vector<double> acc(W, 0.0);
    for (std::size_t k = 0; k < count; ++k)
    {
        const cplx *src = w.samples.data() + k * hop;
        for (std::size_t i = 0; i < W; ++i)
        {
            const cplx v = src[i] * taps[i];
            in.data[i][0] = v.real();
            in.data[i][1] = v.imag();
        }
        plan.execute(in.data, out.data);
        for (std::size_t i = 0; i < W; ++i)
            acc[i] += std::hypot(out.data[i][0], out.data[i][1]);
    }

    AveragedSpectrum s;
    s.window_length = W;
    s.hop = hop;
    s.num_windows = count;
    s.window = window;
    s.sample_rate = w.sample_rate;
    s.frequencies.resize(W);
    s.magnitudes.resize(W);
    // fftshift: natural bin (i + W - W/2) % W lands at ascending position i.
    const std::size_t half = W / 2;
    const double df = w.sample_rate / static_cast<double>(W);
    for (std::size_t i = 0; i < W; ++i)
    {
        const std::size_t src = (i + W - half) % W;
        s.frequencies[i] = (static_cast<double>(i) - static_cast<double>(half)) * df;
        s.magnitudes[i] = acc[src] / (static_cast<double>(count) * gain);
    }
    return s;
}

AveragedSpectrum average_spectrum(const Waveform &w, int window_periods, double overlap_fraction, WindowKind window)
{
    if (window_periods < 1)
        throw std::invalid_argument("average_spectrum: window must cover at least one code period");
    const std::size_t spp = samples_per_period(w, w.modulation_frequency);
    auto s = average_spectrum(w, spp * static_cast<std::size_t>(window_periods), overlap_fraction, window);
    s.periods_per_window = window_periods;
    return s;
}

std::vector<cplx> extract_lines(const Waveform &w, double f0, int n_max)
{
    const std::size_t spp = samples_per_period(w, f0);
    const std::size_t periods = w.samples.size() / spp;
    if (periods == 0)
        throw std::invalid_argument("extract_lines: waveform shorter than one code period");
    const std::size_t M = periods * spp;
    std::vector<cplx> lines;
    lines.reserve(static_cast<std::size_t>(2 * n_max + 1));
    for (int n = -n_max; n <= n_max; ++n)
    {
        cplx acc{0.0, 0.0};
        for (std::size_t i = 0; i < M; ++i)
        {
            // Exact phase of the centre stamp: n (i + 1/2) / spp turns.
            const double turns = static_cast<double>(n) * (static_cast<double>(i) + 0.5) / static_cast<double>(spp);
            acc += w.samples[i] * std::polar(1.0, -2.0 * pi * (turns - std::floor(turns)));
        }
        lines.push_back(acc / static_cast<double>(M));
    }
    return lines;
}

} // namespace stcloc
