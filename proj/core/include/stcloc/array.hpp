// SPDX-License-Identifier: Apache-2.0
//
// Far-field harmonic radiation patterns of a column-coded RIS (azimuth cut,
// normal incidence, plane wave).

#ifndef STCLOC_ARRAY_HPP
#define STCLOC_ARRAY_HPP

#include "stcloc/code.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stcloc {

inline constexpr double speed_of_light = 299792458.0;

// Harmonic whose steering angle has no real solution (|n / (L d/lambda)| > 1).
class NonRadiatingHarmonic : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

enum class ElementTaper
{
    none,
    cosine
};

struct RisConfig
{
    std::size_t num_columns = 16;
    std::size_t num_rows = 16;
    double spacing = 0.0;        // element pitch d [m]
    double carrier_frequency = 0.0; // f_c [Hz]
    ReflectionMap reflection_map = ReflectionMap::on_off();

    double wavelength() const { return speed_of_light / carrier_frequency; }
    double spacing_over_wavelength() const { return spacing / wavelength(); }
    // d/lambda above 0.5 admits grating lobes; allowed, but callers should warn.
    bool grating_lobe_risk() const { return spacing_over_wavelength() > 0.5 + 1e-12; }

    // Throws std::invalid_argument on non-positive sizes, pitch or carrier, or |map| > 1.
    void validate() const;

    // Square array with half-wavelength pitch at `carrier`.
    static RisConfig half_wavelength(std::size_t columns, std::size_t rows, double carrier);
};

// Main-lobe direction of harmonic n in degrees: asin(n / (L * d/lambda)).
double steering_angle(int n, int code_length, double d_over_lambda);

// floor(L * d/lambda): the largest order with a real steering angle.
int max_harmonic_order(int code_length, double d_over_lambda);

// Complex far-field response of harmonic n toward `angle_deg`, including row multiplicity.
cplx harmonic_response(const RisConfig &ris, const CodeSchedule &schedule, int n, double angle_deg,
                       ElementTaper taper = ElementTaper::none);

// Ascending grid lo, lo+step, ... up to hi (inclusive when it lands on the grid).
std::vector<double> make_angle_grid(double step_deg, double lo_deg = -90.0, double hi_deg = 90.0);

// Linear field magnitude of harmonic n over `angles_deg`.
std::vector<double> harmonic_pattern(const RisConfig &ris, const CodeSchedule &schedule, int n,
                                     const std::vector<double> &angles_deg,
                                     ElementTaper taper = ElementTaper::none);

/// Per-harmonic magnitude patterns on a shared azimuth grid, orders -n_max..n_max.
class PatternLibrary
{
  public:
    PatternLibrary(std::vector<double> angle_grid, int n_max, std::vector<std::vector<double>> patterns);

    const std::vector<double> &angles() const { return grid_; }
    int n_max() const { return n_max_; }
    std::size_t num_harmonics() const { return patterns_.size(); }
    bool has_order(int n) const { return n >= -n_max_ && n <= n_max_; }

    const std::vector<double> &pattern(int n) const;
    // Main-lobe direction of harmonic n on the grid. Equal maxima resolve toward the
    // side matching the sign of n, then toward smaller |angle|.
    double argmax_deg(int n) const;
    double peak(int n) const;

    // Grid spacing (uniform grids) and provenance recorded for the JSON sidecar.
    double grid_step = 0.0;
    ElementTaper taper = ElementTaper::none;
    RisConfig ris;
    double modulation_frequency = 0.0;
    int code_length = 0;

  private:
    std::vector<double> grid_;
    int n_max_;
    std::vector<std::vector<double>> patterns_;
    std::vector<std::size_t> argmax_;
};

// Patterns for every radiating order on [-90, 90] with the given step (0 < step <= 5).
PatternLibrary build_pattern_library(const RisConfig &ris, const CodeSchedule &schedule, double grid_step_deg,
                                     ElementTaper taper = ElementTaper::none);

// Width of the contiguous region around the main lobe of n that stays within 3 dB of its peak.
double beamwidth_3db(const PatternLibrary &lib, int n);

inline double field_db(double magnitude)
{
    return 20.0 * std::log10(magnitude);
}

} // namespace stcloc

#endif
