// SPDX-License-Identifier: Apache-2.0
//
// The stcloc subcommands. Each writes its files under the experiment's output directory
// and a short human-readable summary to `out`.

#ifndef STCLOC_TOOLS_COMMANDS_HPP
#define STCLOC_TOOLS_COMMANDS_HPP

#include "config.hpp"

#include <filesystem>
#include <iosfwd>

namespace stcloc::cli {

// pattern.csv, pattern.json; prints the steering-angle table.
void cmd_pattern(const Experiment &e, std::ostream &out);

// waveform.csv, waveform.json, spectrum.csv, harmonics.csv.
void cmd_simulate(const Experiment &e, std::ostream &out);

// Runs the receiver on an existing waveform: spectrum.csv, harmonics.csv, aoa.json.
void cmd_estimate(const Experiment &e, const std::filesystem::path &waveform_csv,
                  const std::filesystem::path &sidecar, std::ostream &out);

// sweep.csv (one row per point, in sweep order) and sweep_summary.json.
void cmd_sweep(const Experiment &e, std::size_t workers, std::ostream &out);

// scenario.json, scenario.csv.
void cmd_scenario(const Experiment &e, std::ostream &out);

// Full command line: parses flags, runs one subcommand and maps failures onto exit codes
// (0 success, 2 configuration or usage error, 3 runtime or estimation error) with a JSON
// error object on `err`.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace stcloc::cli

#endif
