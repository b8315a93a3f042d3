// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: JSON text checked against the published schema, completed
// with the schema defaults and mapped onto the core library types.

#ifndef STCLOC_TOOLS_CONFIG_HPP
#define STCLOC_TOOLS_CONFIG_HPP

#include <stcloc/scenario.hpp>

#include "json.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stcloc::cli {

struct Diagnostic
{
    int line = 0;     // 1-based, 0 when unknown
    std::string path; // JSON pointer
    std::string message;
};

class ConfigError : public std::runtime_error
{
  public:
    explicit ConfigError(std::vector<Diagnostic> diags);
    ConfigError(std::string path, std::string message, int line = 0);

    const std::vector<Diagnostic> &diagnostics() const { return diags_; }

  private:
    std::vector<Diagnostic> diags_;
};

// Line of every value in `text` keyed by JSON pointer; object members map to the line of
// their key. `text` must already be valid JSON.
std::map<std::string, int> locate_lines(std::string_view text);

// Validates against the subset of JSON Schema used by experiment.schema.json: type, enum,
// bounds, lengths, pattern, items, properties, additionalProperties and required.
std::vector<Diagnostic> validate(const nlohmann::json &value, const nlohmann::json &schema);

// Inserts every missing property that has a schema default, recursively.
void apply_defaults(nlohmann::json &value, const nlohmann::json &schema);

const nlohmann::json &experiment_schema();
std::string_view experiment_schema_text();

struct SweepAxis
{
    std::vector<double> angles;
    std::vector<std::optional<double>> snr_db;
    std::size_t seeds = 1;
};

struct Experiment
{
    explicit Experiment(CodeSchedule s) : schedule(std::move(s)) {}

    CodeSchedule schedule;
    std::string output_dir;
    std::uint64_t seed = 0;
    RisConfig ris;
    ElementTaper taper = ElementTaper::none;
    double grid_step = 0.1;
    ChannelConfig channel; // rng_seed is the top-level seed

    double rx_angle = 0.0;
    std::size_t samples_per_period = 64;
    std::size_t num_windows = 8;
    std::optional<double> duration;
    SynthesisMode mode = SynthesisMode::harmonic_domain;

    ReceiverSettings receiver;
    SweepAxis sweep;

    ScenarioKind scenario = ScenarioKind::multi_ris_fix;
    World world;
    double min_conditioning = 0.05;

    nlohmann::json resolved; // the configuration after defaults

    double f0() const { return schedule.base_code().modulation_frequency(); }
    double sample_rate() const { return static_cast<double>(samples_per_period) * f0(); }
    // Configured duration, or the capture giving num_windows full windows.
    double capture() const;
    ScenarioSettings scenario_settings() const;
};

// Parses, validates and completes `text`. Throws ConfigError with line diagnostics.
Experiment load_experiment(std::string_view text);

} // namespace stcloc::cli

#endif
