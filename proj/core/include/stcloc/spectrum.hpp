// SPDX-License-Identifier: Apache-2.0
//
// Windowed spectrum averaging and harmonic line extraction.

#ifndef STCLOC_SPECTRUM_HPP
#define STCLOC_SPECTRUM_HPP

#include "stcloc/channel.hpp"

#include <span>
#include <vector>

namespace stcloc {

enum class WindowKind
{
    rectangular,
    hann
};

// Forward DFT, unnormalized, natural bin order. Thread-safe.
std::vector<cplx> fft(std::span<const cplx> x);

/// Magnitude spectrum averaged over overlapping windows.
///
/// Bins run in ascending frequency from -fs/2 up to just below +fs/2. Magnitudes are
/// scaled by the window's coherent gain, so a line of complex amplitude a that sits on a
/// bin reads |a|.
struct AveragedSpectrum
{
    std::vector<double> frequencies; // [Hz]
    std::vector<double> magnitudes;
    std::size_t window_length = 0; // samples
    std::size_t hop = 0;           // samples
    std::size_t num_windows = 0;
    WindowKind window = WindowKind::rectangular;
    double sample_rate = 0.0;
    // Code periods per window when known (0 otherwise); sets the blind-search prior.
    double periods_per_window = 0.0;

    double bin_spacing() const { return sample_rate / static_cast<double>(window_length); }
    // Index of the bin nearest to `freq`, or -1 when outside the analysed band.
    long nearest_bin(double freq) const;
    // Linear interpolation between neighbouring bins; 0 outside the band.
    double magnitude_at(double freq) const;
};

// Averages |FFT| over every full window of `window_length` samples advanced by
// round(window_length * (1 - overlap)). Throws std::invalid_argument when the waveform is
// shorter than one window or overlap is outside [0, 1).
AveragedSpectrum average_spectrum(const Waveform &w, std::size_t window_length, double overlap_fraction,
                                  WindowKind window = WindowKind::rectangular);

// Windows of `window_periods` code periods of w.modulation_frequency; requires
// fs / f0 to be an integer so every harmonic falls on a bin.
AveragedSpectrum average_spectrum(const Waveform &w, int window_periods, double overlap_fraction,
                                  WindowKind window = WindowKind::rectangular);

// Complex amplitude of lines n = -n_max..n_max at offsets n*f0, from a single DFT over
// the longest prefix holding whole periods. Phases are referenced to the start of the
// capture (t = 0). Requires fs / f0 to be an integer.
std::vector<cplx> extract_lines(const Waveform &w, double f0, int n_max);

// Number of full windows a waveform of `num_samples` yields.
std::size_t window_count(std::size_t num_samples, std::size_t window_length, std::size_t hop);

} // namespace stcloc

#endif
