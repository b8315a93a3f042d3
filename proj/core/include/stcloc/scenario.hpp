// SPDX-License-Identifier: Apache-2.0
//
// Localization scenarios built from per-RIS angle-of-arrival estimates: single-RIS
// direction finding and multi-RIS bearing intersection in a 2D world frame.
//
// World bearings are measured counter-clockwise from the +x axis in degrees and wrapped
// to [0, 360). A positive local AoA is counter-clockwise from the RIS boresight.

#ifndef STCLOC_SCENARIO_HPP
#define STCLOC_SCENARIO_HPP

#include "stcloc/receiver.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stcloc {

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2 &) const = default;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 v);

class IllConditioned : public EstimationError
{
  public:
    using EstimationError::EstimationError;
};

// The least-squares point lies behind one of the bearing rays.
class BehindRay : public EstimationError
{
  public:
    using EstimationError::EstimationError;
};

class ScenarioError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

struct RisPose
{
    Vec2 position;
    double boresight_bearing = 90.0; // world direction of the surface normal [deg]
    double comb_offset = 0.0;        // centre of this RIS's harmonic comb relative to the pilot [Hz]
};

struct PositionFix
{
    Vec2 position;
    double residual = 0.0;     // RMS perpendicular distance to the rays [m]
    double conditioning = 0.0; // smallest pairwise |sin(bearing difference)|
};

double wrap_bearing(double deg);   // to [0, 360)
double wrap_signed(double deg);    // to (-180, 180]
double bearing_to(Vec2 from, Vec2 to);

// boresight + local AoA, wrapped to [0, 360).
double world_bearing(const RisPose &pose, double local_aoa_deg);
// Angle of `target` relative to the boresight of `pose`, in (-180, 180].
double local_angle(const RisPose &pose, Vec2 target);

struct BearingRay
{
    Vec2 origin;
    double bearing = 0.0; // world [deg]
};

// Least-squares intersection of >= 2 rays. Throws IllConditioned when the conditioning is
// below `min_conditioning` and BehindRay when the solution sits behind any ray origin.
PositionFix intersect_bearings(std::span<const BearingRay> rays, double min_conditioning);

struct PoseObservation
{
    RisPose pose;
    double local_aoa = 0.0;
};

PositionFix intersect_bearings(std::span<const PoseObservation> observations, double min_conditioning);

enum class ScenarioKind
{
    network_side,
    user_side,
    ris_discovery,
    multi_ris_fix
};

std::string_view to_string(ScenarioKind kind);
// Throws ScenarioError on unknown names.
ScenarioKind scenario_from_string(std::string_view name);

struct RisNode
{
    std::string name;
    RisPose pose;
    RisConfig ris;
    CodeSchedule schedule;
};

struct World
{
    std::vector<RisNode> nodes;
    std::optional<Vec2> user;
    std::optional<Vec2> base_station;
};

struct ScenarioSettings
{
    ReceiverSettings receiver;
    std::size_t samples_per_period = 128; // relative to the first RIS's f0
    std::size_t num_windows = 8;
    double grid_step = 0.1;
    ElementTaper taper = ElementTaper::none;
    SynthesisMode mode = SynthesisMode::harmonic_domain;
    double min_conditioning = 0.05;
};

struct RisReport
{
    std::string name;
    double true_local = 0.0;
    double estimated_local = 0.0;
    double error = 0.0; // estimated - true [deg]
    double true_bearing = 0.0;
    double estimated_bearing = 0.0;
    double peak_to_second_peak = 1.0;
    double f0 = 0.0;
    double comb_offset = 0.0;
    std::vector<double> magnitudes;
};

struct ScenarioReport
{
    ScenarioKind kind = ScenarioKind::user_side;
    std::string estimator_node; // which entity runs the estimator
    std::string target;         // what is being located
    std::vector<RisReport> ris;
    // ris_discovery: direction of the RIS as seen from the base station.
    std::optional<double> true_ris_bearing_from_bs;
    std::optional<double> estimated_ris_bearing_from_bs;
    // multi_ris_fix
    std::optional<PositionFix> fix;
    std::optional<Vec2> true_position;
    std::optional<double> position_error;
};

// Forward simulation + estimation for one scenario. Throws ScenarioError when the
// world lacks an entity the scenario needs; estimation errors propagate.
ScenarioReport run_scenario(ScenarioKind kind, const World &world, const ChannelConfig &channel,
                            const ScenarioSettings &settings = {});

} // namespace stcloc

#endif
