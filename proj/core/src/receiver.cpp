// SPDX-License-Identifier: Apache-2.0

#include "stcloc/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stcloc {

namespace {

double interpolated_peak(const AveragedSpectrum &spec, long k)
{
    const auto &m = spec.magnitudes;
    const double b = m[static_cast<std::size_t>(k)];
    if (k <= 0 || k + 1 >= static_cast<long>(m.size()))
        return b;
    const double a = m[static_cast<std::size_t>(k - 1)];
    const double c = m[static_cast<std::size_t>(k + 1)];
    if (b < a || b < c)
        return b;
    const double denom = a - 2.0 * b + c;
    if (denom == 0.0)
        return b;
    const double p = 0.5 * (a - c) / denom;
    return b - 0.25 * (a - c) * p;
}

double comb_score(const AveragedSpectrum &spec, double f0, int n_max, double center)
{
    // Adjacent teeth must both be lit; a sub-harmonic candidate always has one dark tooth.
    double score = 0.0;
    for (int n = -n_max; n < n_max; ++n)
    {
        if (n == 0 || n + 1 == 0)
            continue;
        const double a = spec.magnitude_at(center + n * f0);
        const double b = spec.magnitude_at(center + (n + 1) * f0);
        score += std::sqrt(a * b);
    }
    return score;
}

double quantile(std::vector<double> v, double q)
{
    if (v.empty())
        return 0.0;
    const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

} // namespace

CombSearch comb_search(const AveragedSpectrum &spec, double f0_prior, int n_max, double comb_center)
{
    if (!(f0_prior > 0.0))
        throw std::invalid_argument("comb_search: f0 prior must be positive");
    if (n_max < 1)
        throw std::invalid_argument("comb_search: need at least one harmonic order");

    // The outermost tooth moves by half a bin per step; the prior itself is on the grid.
    const double step = spec.bin_spacing() / (2.0 * n_max);
    const auto half = static_cast<long>(std::floor(0.5 * f0_prior / step));
    CombSearch cs;
    for (long k = -half; k <= half; ++k)
    {
        const double f = f0_prior + static_cast<double>(k) * step;
        if (f <= 0.0)
            continue;
        cs.candidates.push_back(f);
        cs.scores.push_back(comb_score(spec, f, n_max, comb_center));
    }
    const auto it = std::max_element(cs.scores.begin(), cs.scores.end());
    cs.best = static_cast<std::size_t>(it - cs.scores.begin());
    const double top = *it;
    cs.confidence = top > 0.0 ? std::clamp(1.0 - quantile(cs.scores, 0.75) / top, 0.0, 1.0) : 0.0;
    return cs;
}

HarmonicMeasurement detect_harmonics(const AveragedSpectrum &spec, std::optional<double> f0_hint, int n_max,
                                     const DetectionOptions &options)
{
    if (n_max < 0)
        throw std::invalid_argument("detect_harmonics: n_max must be >= 0");

    HarmonicMeasurement meas;
    meas.n_max = n_max;
    meas.comb_center = options.comb_center;
    if (!options.exclude_zero_order)
        meas.excluded_orders.clear();

    double f0 = 0.0;
    if (f0_hint)
    {
        f0 = *f0_hint;
        if (!(f0 > 0.0))
            throw std::invalid_argument("detect_harmonics: f0 hint must be positive");
    }
    else
    {
        double prior = 0.0;
        if (spec.periods_per_window > 0.0)
            prior = spec.periods_per_window * spec.bin_spacing();
        else if (options.f0_prior)
            prior = *options.f0_prior;
        else
            throw std::invalid_argument("detect_harmonics: blind search needs a prior (periods per window)");
        const auto cs = comb_search(spec, prior, std::max(n_max, 1), options.comb_center);
        if (cs.confidence < options.confidence_threshold)
            throw NoCombFound("no harmonic comb found (confidence " + std::to_string(cs.confidence) + " < " +
                              std::to_string(options.confidence_threshold) + ")");
        f0 = cs.candidates[cs.best];
        meas.confidence = cs.confidence;
        meas.blind = true;
    }

    if (spec.bin_spacing() > f0 / 4.0 * (1.0 + 1e-9))
        throw std::invalid_argument("detect_harmonics: bin spacing " + std::to_string(spec.bin_spacing()) +
                                    " Hz is coarser than f0/4; use longer windows");

    if (f0_hint && n_max >= 1)
    {
        // Prominence of the hinted comb relative to the same search grid.
        const double prior = *f0_hint;
        const auto cs = comb_search(spec, prior, n_max, options.comb_center);
        const double s = comb_score(spec, prior, n_max, options.comb_center);
        meas.confidence = s > 0.0 ? std::clamp(1.0 - quantile(cs.scores, 0.75) / s, 0.0, 1.0) : 0.0;
    }

    meas.f0 = f0;
    meas.magnitudes.resize(static_cast<std::size_t>(2 * n_max + 1));
    for (int n = -n_max; n <= n_max; ++n)
    {
        const long k = spec.nearest_bin(options.comb_center + n * f0);
        meas.magnitudes[static_cast<std::size_t>(n + n_max)] = k < 0 ? 0.0 : interpolated_peak(spec, k);
    }
    return meas;
}

AoaEstimate estimate_aoa(const HarmonicMeasurement &meas, const PatternLibrary &library,
                         const std::set<int> &exclude_orders, const CombineOptions &options)
{
    if (meas.n_max != library.n_max())
        throw std::invalid_argument("estimate_aoa: measurement n_max " + std::to_string(meas.n_max) +
                                    " differs from library n_max " + std::to_string(library.n_max()));

    std::vector<int> orders;
    double top = 0.0;
    for (int n = -meas.n_max; n <= meas.n_max; ++n)
    {
        if (exclude_orders.count(n))
            continue;
        orders.push_back(n);
        top = std::max(top, meas.magnitude(n));
    }
    if (orders.empty())
        throw EmptyAfterExclusion("estimate_aoa: every harmonic order is excluded");
    if (!(top > 0.0))
        throw EmptyAfterExclusion("estimate_aoa: the remaining harmonics carry no energy");

    const auto &grid = library.angles();
    AoaEstimate est;
    est.grid = grid;
    est.profile.assign(grid.size(), 0.0);
    est.excluded_orders = exclude_orders;
    est.f0_used = meas.f0;

    const bool power = options.mode == CombineMode::power;
    std::vector<double> norm2(grid.size(), 0.0);
    for (int n : orders)
    {
        const double peak = options.scaling == PatternScaling::per_harmonic ? library.peak(n) : 1.0;
        if (!(peak > 0.0))
            continue;
        double weight = meas.magnitude(n) / top;
        if (power)
            weight *= weight;
        if (weight == 0.0)
            continue;
        const auto &p = library.pattern(n);
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            const double v = p[i] / peak;
            est.profile[i] += weight * (power ? v * v : v);
        }
    }
    if (options.scaling == PatternScaling::per_angle)
    {
        for (int n : orders)
        {
            const auto &p = library.pattern(n);
            for (std::size_t i = 0; i < grid.size(); ++i)
                norm2[i] += power ? p[i] * p[i] * p[i] * p[i] : p[i] * p[i];
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            est.profile[i] = norm2[i] > 0.0 ? est.profile[i] / std::sqrt(norm2[i]) : 0.0;
    }

    const double best_value = *std::max_element(est.profile.begin(), est.profile.end());
    // A few ulps: mirrored angles reach the same peak through different rounding.
    const double tol = best_value * 1e-14;
    std::size_t best = 0;
    bool have = false;
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        if (est.profile[i] < best_value - tol)
            continue;
        if (!have || std::abs(grid[i]) < std::abs(grid[best]))
            best = i;
        have = true;
    }
    est.angle = grid[best];

    // Second-highest local maximum (grid ends count when they beat their neighbour).
    const auto &pr = est.profile;
    double second = -1.0;
    for (std::size_t i = 0; i < pr.size(); ++i)
    {
        if (i == best)
            continue;
        const bool left_ok = i == 0 || pr[i] >= pr[i - 1];
        const bool right_ok = i + 1 == pr.size() || pr[i] > pr[i + 1];
        if (left_ok && right_ok)
        {
            // Skip plateau neighbours of the main peak.
            if (std::abs(pr[i] - pr[best]) <= tol && (i + 1 == best || i == best + 1))
                continue;
            second = std::max(second, pr[i]);
        }
    }
    if (second < 0.0)
        second = *std::min_element(pr.begin(), pr.end());
    est.peak_to_second_peak = best_value / std::max(second, best_value * 1e-12);
    return est;
}

double angular_resolution(int code_length)
{
    if (code_length < 1)
        throw std::invalid_argument("angular_resolution: code length must be >= 1");
    return 180.0 / (3.0 * code_length);
}

ReceiverResult run_receiver(const Waveform &w, const PatternLibrary &library, const ReceiverSettings &settings,
                            double comb_center)
{
    ReceiverResult r;
    r.spectrum = average_spectrum(w, settings.window_periods, settings.overlap, settings.window);
    DetectionOptions opt;
    opt.confidence_threshold = settings.confidence_threshold;
    opt.comb_center = comb_center;
    opt.exclude_zero_order = settings.exclude_orders.count(0) > 0;
    std::optional<double> hint;
    if (settings.f0_known)
        hint = w.modulation_frequency;
    r.measurement = detect_harmonics(r.spectrum, hint, library.n_max(), opt);
    r.estimate = estimate_aoa(r.measurement, library, settings.exclude_orders, settings.combine);
    return r;
}

double capture_duration(const ReceiverSettings &settings, std::size_t num_windows, double f0, double sample_rate)
{
    if (num_windows < 1)
        throw std::invalid_argument("capture_duration: need at least one window");
    const auto spp = static_cast<std::size_t>(std::llround(sample_rate / f0));
    const std::size_t W = spp * static_cast<std::size_t>(settings.window_periods);
    const auto hop =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(W) * (1.0 - settings.overlap))));
    const std::size_t samples = W + (num_windows - 1) * hop;
    return static_cast<double>(samples) / sample_rate;
}

} // namespace stcloc
