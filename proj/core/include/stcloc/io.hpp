// SPDX-License-Identifier: Apache-2.0
//
// CSV and JSON exchange formats for patterns, waveforms, spectra, estimates and
// scenario reports. Numbers are written in shortest round-trip form so reruns with the
// same inputs produce byte-identical files.

#ifndef STCLOC_IO_HPP
#define STCLOC_IO_HPP

#include "stcloc/scenario.hpp"

#include <filesystem>
#include <string>

namespace stcloc::io {

std::string format_number(double v);

// angle_deg,h-N,...,hN in linear field units.
std::string pattern_csv(const PatternLibrary &lib);
// Geometry, f_c, f_0, grid step and taper of a pattern library.
std::string pattern_sidecar(const PatternLibrary &lib);

// Header t,re,im; t is the centre stamp of each sample.
std::string waveform_csv(const Waveform &w);

struct WaveformInfo
{
    ChannelConfig channel;
    SynthesisMode mode = SynthesisMode::harmonic_domain;
    std::optional<double> rx_angle; // ground truth when known
};

std::string waveform_sidecar(const Waveform &w, const WaveformInfo &info);

// Reads a waveform CSV plus its JSON sidecar. Throws std::runtime_error on malformed files.
Waveform read_waveform(const std::filesystem::path &csv, const std::filesystem::path &sidecar,
                       WaveformInfo *info = nullptr);

// freq_hz,magnitude
std::string spectrum_csv(const AveragedSpectrum &spec);
// n,freq_hz,magnitude,excluded
std::string harmonics_csv(const HarmonicMeasurement &meas);

// {angle_deg, profile: [[angle, value]...], psr, excluded_orders, f0_used}
std::string aoa_json(const AoaEstimate &est);

std::string scenario_json(const ScenarioReport &rep, const ChannelConfig &channel);
// One row per RIS: scenario,ris,true_deg,est_deg,err_deg,... plus fix columns when present.
std::string scenario_csv(const ScenarioReport &rep);

void write_text(const std::filesystem::path &path, const std::string &text);
std::string read_text(const std::filesystem::path &path);

std::string_view to_string(ElementTaper taper);
std::string_view to_string(SynthesisMode mode);

} // namespace stcloc::io

#endif
