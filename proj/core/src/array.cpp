// SPDX-License-Identifier: Apache-2.0

#include "stcloc/array.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stcloc {

namespace {

constexpr double deg2rad = pi / 180.0;

std::vector<cplx> column_coefficients(const RisConfig &ris, const CodeSchedule &schedule, int n)
{
    std::vector<cplx> coeff(schedule.num_columns());
    for (std::size_t q = 0; q < coeff.size(); ++q)
        coeff[q] = mapped_harmonic(schedule.column_code(q), n, ris.reflection_map);
    return coeff;
}

cplx array_sum(const std::vector<cplx> &coeff, double d_over_lambda, double angle_deg)
{
    const double psi = 2.0 * pi * d_over_lambda * std::sin(angle_deg * deg2rad);
    cplx sum{0.0, 0.0};
    for (std::size_t q = 0; q < coeff.size(); ++q)
        sum += coeff[q] * std::polar(1.0, psi * static_cast<double>(q));
    return sum;
}

double taper_gain(ElementTaper taper, double angle_deg)
{
    return taper == ElementTaper::cosine ? std::max(0.0, std::cos(angle_deg * deg2rad)) : 1.0;
}

void check_schedule(const RisConfig &ris, const CodeSchedule &schedule)
{
    if (schedule.num_columns() != ris.num_columns)
        throw std::invalid_argument("schedule has " + std::to_string(schedule.num_columns()) +
                                    " column shifts but the RIS has " + std::to_string(ris.num_columns) +
                                    " columns");
}

} // namespace

void RisConfig::validate() const
{
    if (num_columns == 0 || num_rows == 0)
        throw std::invalid_argument("RisConfig: rows and columns must be positive");
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw std::invalid_argument("RisConfig: element spacing must be positive");
    if (!(carrier_frequency > 0.0) || !std::isfinite(carrier_frequency))
        throw std::invalid_argument("RisConfig: carrier frequency must be positive");
    if (std::abs(reflection_map.on) > 1.0 + 1e-12 || std::abs(reflection_map.off) > 1.0 + 1e-12)
        throw std::invalid_argument("RisConfig: reflection coefficients must satisfy |r| <= 1");
}

RisConfig RisConfig::half_wavelength(std::size_t columns, std::size_t rows, double carrier)
{
    RisConfig r;
    r.num_columns = columns;
    r.num_rows = rows;
    r.carrier_frequency = carrier;
    r.spacing = 0.5 * speed_of_light / carrier;
    return r;
}

double steering_angle(int n, int code_length, double d_over_lambda)
{
    if (code_length < 1)
        throw std::invalid_argument("steering_angle: code length must be >= 1");
    if (!(d_over_lambda > 0.0))
        throw std::invalid_argument("steering_angle: d/lambda must be positive");
    double s = n / (code_length * d_over_lambda);
    if (std::abs(s) > 1.0 + 1e-12)
        throw NonRadiatingHarmonic("harmonic " + std::to_string(n) + " does not radiate (|n/(L d/lambda)| = " +
                                   std::to_string(std::abs(s)) + " > 1)");
    s = std::clamp(s, -1.0, 1.0);
    return std::asin(s) / deg2rad;
}

int max_harmonic_order(int code_length, double d_over_lambda)
{
    if (code_length < 1)
        throw std::invalid_argument("max_harmonic_order: code length must be >= 1");
    if (!(d_over_lambda > 0.0))
        throw std::invalid_argument("max_harmonic_order: d/lambda must be positive");
    // Pitches derived from metres rarely give L*d/lambda as an exact integer.
    return static_cast<int>(std::floor(code_length * d_over_lambda + 1e-9));
}

cplx harmonic_response(const RisConfig &ris, const CodeSchedule &schedule, int n, double angle_deg,
                       ElementTaper taper)
{
    check_schedule(ris, schedule);
    const auto coeff = column_coefficients(ris, schedule, n);
    return array_sum(coeff, ris.spacing_over_wavelength(), angle_deg) *
           (taper_gain(taper, angle_deg) * static_cast<double>(ris.num_rows));
}

std::vector<double> make_angle_grid(double step_deg, double lo_deg, double hi_deg)
{
    if (!(step_deg > 0.0))
        throw std::invalid_argument("angle grid step must be positive");
    if (!(hi_deg >= lo_deg))
        throw std::invalid_argument("angle grid bounds are reversed");
    const auto count = static_cast<std::size_t>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = lo_deg + step_deg * static_cast<double>(i);
    // Snap the last point onto hi when it is within rounding.
    if (std::abs(grid.back() - hi_deg) < 1e-9)
        grid.back() = hi_deg;
    return grid;
}

std::vector<double> harmonic_pattern(const RisConfig &ris, const CodeSchedule &schedule, int n,
                                     const std::vector<double> &angles_deg, ElementTaper taper)
{
    check_schedule(ris, schedule);
    const double dol = ris.spacing_over_wavelength();
    const int limit = max_harmonic_order(static_cast<int>(schedule.code_length()), dol) + 2;
    if (std::abs(n) > limit)
        throw std::invalid_argument("harmonic_pattern: |n| = " + std::to_string(std::abs(n)) +
                                    " exceeds the radiating limit + 2 (" + std::to_string(limit) + ")");
    const auto coeff = column_coefficients(ris, schedule, n);
    const double rows = static_cast<double>(ris.num_rows);
    std::vector<double> out(angles_deg.size());
    for (std::size_t i = 0; i < angles_deg.size(); ++i)
        out[i] = std::abs(array_sum(coeff, dol, angles_deg[i])) * taper_gain(taper, angles_deg[i]) * rows;
    return out;
}

PatternLibrary::PatternLibrary(std::vector<double> angle_grid, int n_max, std::vector<std::vector<double>> patterns)
    : grid_(std::move(angle_grid)), n_max_(n_max), patterns_(std::move(patterns))
{
    if (grid_.empty())
        throw std::invalid_argument("PatternLibrary: empty angle grid");
    if (n_max_ < 0 || patterns_.size() != static_cast<std::size_t>(2 * n_max_ + 1))
        throw std::invalid_argument("PatternLibrary: expected 2*n_max+1 patterns");
    for (std::size_t i = 1; i < grid_.size(); ++i)
        if (!(grid_[i] > grid_[i - 1]))
            throw std::invalid_argument("PatternLibrary: angle grid must be strictly ascending");
    if (grid_.front() < -90.0 - 1e-9 || grid_.back() > 90.0 + 1e-9)
        throw std::invalid_argument("PatternLibrary: angles must lie in [-90, 90]");

    argmax_.resize(patterns_.size());
    for (std::size_t h = 0; h < patterns_.size(); ++h)
    {
        const auto &p = patterns_[h];
        if (p.size() != grid_.size())
            throw std::invalid_argument("PatternLibrary: every harmonic needs the full grid");
        if (std::any_of(p.begin(), p.end(), [](double v) { return !(v >= 0.0); }))
            throw std::invalid_argument("PatternLibrary: magnitudes must be non-negative");

        const int n = static_cast<int>(h) - n_max_;
        const double top = *std::max_element(p.begin(), p.end());
        const double tol = top * 1e-12;
        std::size_t best = 0;
        bool have = false;
        for (std::size_t i = 0; i < p.size(); ++i)
        {
            if (p[i] < top - tol)
                continue;
            if (!have)
            {
                best = i;
                have = true;
                continue;
            }
            const double a = grid_[i], b = grid_[best];
            const bool a_side = n == 0 || (n > 0) == (a > 0.0);
            const bool b_side = n == 0 || (n > 0) == (b > 0.0);
            if ((a_side && !b_side) || (a_side == b_side && std::abs(a) < std::abs(b)))
                best = i;
        }
        argmax_[h] = best;
    }
}

const std::vector<double> &PatternLibrary::pattern(int n) const
{
    if (!has_order(n))
        throw std::out_of_range("PatternLibrary: harmonic " + std::to_string(n) + " not in library");
    return patterns_[static_cast<std::size_t>(n + n_max_)];
}

double PatternLibrary::argmax_deg(int n) const
{
    pattern(n);
    return grid_[argmax_[static_cast<std::size_t>(n + n_max_)]];
}

double PatternLibrary::peak(int n) const
{
    return pattern(n)[argmax_[static_cast<std::size_t>(n + n_max_)]];
}

PatternLibrary build_pattern_library(const RisConfig &ris, const CodeSchedule &schedule, double grid_step_deg,
                                     ElementTaper taper)
{
    if (!(grid_step_deg > 0.0 && grid_step_deg <= 5.0))
        throw std::invalid_argument("build_pattern_library: grid step must lie in (0, 5] degrees");
    ris.validate();
    const int L = static_cast<int>(schedule.code_length());
    const int n_max = max_harmonic_order(L, ris.spacing_over_wavelength());
    auto grid = make_angle_grid(grid_step_deg);

    std::vector<std::vector<double>> patterns;
    patterns.reserve(static_cast<std::size_t>(2 * n_max + 1));
    for (int n = -n_max; n <= n_max; ++n)
        patterns.push_back(harmonic_pattern(ris, schedule, n, grid, taper));

    PatternLibrary lib(std::move(grid), n_max, std::move(patterns));
    lib.grid_step = grid_step_deg;
    lib.taper = taper;
    lib.ris = ris;
    lib.modulation_frequency = schedule.base_code().modulation_frequency();
    lib.code_length = L;
    return lib;
}

double beamwidth_3db(const PatternLibrary &lib, int n)
{
    const auto &p = lib.pattern(n);
    const auto &g = lib.angles();
    std::size_t peak_idx = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i] == lib.argmax_deg(n))
            peak_idx = i;
    const double threshold = p[peak_idx] / std::sqrt(2.0);
    std::size_t lo = peak_idx, hi = peak_idx;
    while (lo > 0 && p[lo - 1] >= threshold)
        --lo;
    while (hi + 1 < p.size() && p[hi + 1] >= threshold)
        ++hi;
    return g[hi] - g[lo];
}

} // namespace stcloc
