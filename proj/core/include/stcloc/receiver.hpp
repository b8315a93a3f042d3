// SPDX-License-Identifier: Apache-2.0
//
// Receive-side estimation chain: harmonic detection on an averaged spectrum and
// pattern-matched angle-of-arrival estimation.

#ifndef STCLOC_RECEIVER_HPP
#define STCLOC_RECEIVER_HPP

#include "stcloc/spectrum.hpp"

#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace stcloc {

class EstimationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Blind comb search found no periodic line structure.
class NoCombFound : public EstimationError
{
  public:
    using EstimationError::EstimationError;
};

// Every usable harmonic was excluded or carries no energy.
class EmptyAfterExclusion : public EstimationError
{
  public:
    using EstimationError::EstimationError;
};

struct HarmonicMeasurement
{
    int n_max = 0;
    std::vector<double> magnitudes; // M_n for n = -n_max..n_max
    double f0 = 0.0;                // hint or blind estimate [Hz]
    double comb_center = 0.0;       // offset of order 0 [Hz]
    double confidence = 0.0;        // comb prominence in [0, 1]
    bool blind = false;
    // Orders the estimator skips unless told otherwise (order 0 shares the carrier leak bin).
    std::set<int> excluded_orders{0};

    double magnitude(int n) const { return magnitudes.at(static_cast<std::size_t>(n + n_max)); }
};

struct DetectionOptions
{
    double confidence_threshold = 0.2;
    double comb_center = 0.0;
    bool exclude_zero_order = true;
    // Used when the spectrum does not know its periods per window.
    std::optional<double> f0_prior;
};

// Comb prominence of f0 candidates; exposed for diagnostics and tests.
struct CombSearch
{
    std::vector<double> candidates;
    std::vector<double> scores;
    std::size_t best = 0;
    double confidence = 0.0;
};

CombSearch comb_search(const AveragedSpectrum &spec, double f0_prior, int n_max, double comb_center = 0.0);

/// Reads the magnitude of every line n*f0 (+ comb_center) with three-bin quadratic
/// interpolation. Without a hint, f0 is first found by a comb search over
/// [0.5, 1.5] x prior and NoCombFound is thrown when its confidence falls below the
/// threshold. Throws std::invalid_argument when the bin spacing exceeds f0 / 4.
HarmonicMeasurement detect_harmonics(const AveragedSpectrum &spec, std::optional<double> f0_hint, int n_max,
                                     const DetectionOptions &options = {});

enum class CombineMode
{
    linear, // sum of M_n * P_n
    power   // sum of M_n^2 * P_n^2
};

enum class PatternScaling
{
    raw,          // library patterns as stored
    per_harmonic, // every pattern scaled to a unit peak
    per_angle     // profile divided by the library norm at each angle (normalized correlation)
};

// Per-angle scaling is the default: dividing by the library norm turns the weighted sum
// into a normalized correlation, whose noiseless argmax is the true angle whatever orders
// are excluded. The other two keep the plain weighted sum.
struct CombineOptions
{
    CombineMode mode = CombineMode::linear;
    PatternScaling scaling = PatternScaling::per_angle;
};

struct AoaEstimate
{
    double angle = 0.0; // degrees, argmax of the profile
    std::vector<double> grid;
    std::vector<double> profile;
    double peak_to_second_peak = 1.0;
    std::set<int> excluded_orders;
    double f0_used = 0.0;
};

// Library patterns weighted by the max-normalized measured magnitudes and summed, then
// scaled per CombineOptions; the estimate is the argmax, ties going to the smaller |angle|.
AoaEstimate estimate_aoa(const HarmonicMeasurement &meas, const PatternLibrary &library,
                         const std::set<int> &exclude_orders, const CombineOptions &options = {});

inline AoaEstimate estimate_aoa(const HarmonicMeasurement &meas, const PatternLibrary &library)
{
    return estimate_aoa(meas, library, meas.excluded_orders);
}

// Width of one of the ~3L distinguishable angular cells, 180 / (3L) degrees.
double angular_resolution(int code_length);

struct ReceiverSettings
{
    int window_periods = 4;
    double overlap = 0.5;
    WindowKind window = WindowKind::rectangular;
    bool f0_known = true;
    std::set<int> exclude_orders{0};
    CombineOptions combine;
    double confidence_threshold = 0.2;
};

struct ReceiverResult
{
    AveragedSpectrum spectrum;
    HarmonicMeasurement measurement;
    AoaEstimate estimate;
};

// average_spectrum -> detect_harmonics -> estimate_aoa on one waveform.
ReceiverResult run_receiver(const Waveform &w, const PatternLibrary &library, const ReceiverSettings &settings,
                            double comb_center = 0.0);

// Capture length (seconds) giving `num_windows` full windows at f0.
double capture_duration(const ReceiverSettings &settings, std::size_t num_windows, double f0, double sample_rate);

} // namespace stcloc

#endif
