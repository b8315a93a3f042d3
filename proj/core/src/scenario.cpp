// SPDX-License-Identifier: Apache-2.0

#include "stcloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stcloc {

namespace {

constexpr double deg2rad = pi / 180.0;

Vec2 unit(double bearing_deg)
{
    return {std::cos(bearing_deg * deg2rad), std::sin(bearing_deg * deg2rad)};
}

double dot(Vec2 a, Vec2 b)
{
    return a.x * b.x + a.y * b.y;
}

double perpendicular_distance(const BearingRay &ray, Vec2 p)
{
    const Vec2 u = unit(ray.bearing);
    const Vec2 d = p - ray.origin;
    return std::abs(u.x * d.y - u.y * d.x);
}

struct Estimated
{
    double local = 0.0;
    double psr = 1.0;
    double f0 = 0.0;
    std::vector<double> magnitudes;
};

Waveform noiseless_at(const RisNode &node, double angle, const ChannelConfig &channel, double duration, double fs,
                      const ScenarioSettings &s)
{
    ChannelConfig quiet = channel;
    quiet.snr_db.reset();
    return synthesize_received(node.ris, node.schedule, angle, quiet, duration, fs, s.mode, s.taper);
}

double check_in_front(const RisNode &node, Vec2 target, const char *what)
{
    const double a = local_angle(node.pose, target);
    if (a < -90.0 || a > 90.0)
        throw ScenarioError(std::string(what) + " is behind RIS '" + node.name + "'");
    return a;
}

RisReport make_report(const RisNode &node, double true_local, const Estimated &e)
{
    RisReport r;
    r.name = node.name;
    r.true_local = true_local;
    r.estimated_local = e.local;
    r.error = e.local - true_local;
    r.true_bearing = world_bearing(node.pose, true_local);
    r.estimated_bearing = world_bearing(node.pose, e.local);
    r.peak_to_second_peak = e.psr;
    r.f0 = e.f0;
    r.comb_offset = node.pose.comb_offset;
    r.magnitudes = e.magnitudes;
    return r;
}

ScenarioReport single_ris(ScenarioKind kind, const World &world, const ChannelConfig &channel,
                          const ScenarioSettings &s)
{
    if (world.nodes.empty())
        throw ScenarioError("scenario needs at least one RIS");
    const RisNode &node = world.nodes.front();

    ScenarioReport rep;
    rep.kind = kind;
    Vec2 target;
    if (kind == ScenarioKind::ris_discovery)
    {
        if (!world.base_station)
            throw ScenarioError("ris_discovery needs a base station position");
        target = *world.base_station;
        rep.estimator_node = "base_station";
        rep.target = "ris_direction";
    }
    else
    {
        if (!world.user)
            throw ScenarioError(std::string(to_string(kind)) + " needs a user position");
        if (kind == ScenarioKind::network_side && !world.base_station)
            throw ScenarioError("network_side needs a base station position");
        target = *world.user;
        rep.estimator_node = kind == ScenarioKind::network_side ? "network" : "user";
        rep.target = "user_direction";
    }

    const double truth = check_in_front(node, target, kind == ScenarioKind::ris_discovery ? "base station" : "user");
    const double f0 = node.schedule.base_code().modulation_frequency();
    const double fs = static_cast<double>(s.samples_per_period) * f0;
    const double duration = capture_duration(s.receiver, s.num_windows, f0, fs);
    const auto lib = build_pattern_library(node.ris, node.schedule, s.grid_step, s.taper);
    const Waveform w =
        synthesize_received(node.ris, node.schedule, truth, channel, duration, fs, s.mode, s.taper);
    const auto res = run_receiver(w, lib, s.receiver);

    Estimated e{res.estimate.angle, res.estimate.peak_to_second_peak, res.measurement.f0,
                res.measurement.magnitudes};
    rep.ris.push_back(make_report(node, truth, e));
    if (kind == ScenarioKind::ris_discovery)
    {
        rep.true_ris_bearing_from_bs = bearing_to(target, node.pose.position);
        rep.estimated_ris_bearing_from_bs = wrap_bearing(world_bearing(node.pose, e.local) + 180.0);
    }
    return rep;
}

ScenarioReport multi_ris(const World &world, const ChannelConfig &channel, const ScenarioSettings &s)
{
    if (world.nodes.size() < 2)
        throw ScenarioError("multi_ris_fix needs at least two RISs");
    if (!world.user)
        throw ScenarioError("multi_ris_fix needs a user position");
    for (std::size_t i = 0; i < world.nodes.size(); ++i)
        for (std::size_t j = i + 1; j < world.nodes.size(); ++j)
            if (world.nodes[i].pose.comb_offset == world.nodes[j].pose.comb_offset)
                throw ScenarioError("RISs '" + world.nodes[i].name + "' and '" + world.nodes[j].name +
                                    "' share a comb offset; each RIS needs its own frequency slot");

    const Vec2 user = *world.user;
    const double f0_ref = world.nodes.front().schedule.base_code().modulation_frequency();
    const double fs = static_cast<double>(s.samples_per_period) * f0_ref;

    double duration = 0.0;
    double reference = 0.0, bandwidth = 0.0;
    for (const auto &node : world.nodes)
    {
        const double f0 = node.schedule.base_code().modulation_frequency();
        const int n_max = max_harmonic_order(static_cast<int>(node.schedule.code_length()),
                                             node.ris.spacing_over_wavelength());
        const double edge = std::abs(node.pose.comb_offset) + n_max * f0;
        if (!(2.0 * edge < fs))
            throw ScenarioError("sample rate " + std::to_string(fs) + " Hz cannot hold the comb of RIS '" +
                                node.name + "'; raise samples_per_period");
        duration = std::max(duration, capture_duration(s.receiver, s.num_windows, f0, fs));
        bandwidth += (2.0 * n_max + 1.0) * f0;
    }

    Waveform total;
    std::vector<double> truths;
    for (const auto &node : world.nodes)
    {
        const double truth = check_in_front(node, user, "user");
        truths.push_back(truth);
        Waveform w = noiseless_at(node, truth, channel, duration, fs, s);
        frequency_shift(w, node.pose.comb_offset);
        reference += total_harmonic_power(node.ris, node.schedule, truth, s.taper);
        if (total.samples.empty())
            total = std::move(w);
        else
            for (std::size_t i = 0; i < total.samples.size(); ++i)
                total.samples[i] += w.samples[i];
    }
    if (channel.snr_db)
        add_noise(total, *channel.snr_db, reference > 0.0 ? reference : 1.0, bandwidth, channel.rng_seed);

    ScenarioReport rep;
    rep.kind = ScenarioKind::multi_ris_fix;
    rep.estimator_node = "user";
    rep.target = "user_position";
    std::vector<PoseObservation> obs;
    for (std::size_t i = 0; i < world.nodes.size(); ++i)
    {
        const auto &node = world.nodes[i];
        Waveform w = total;
        w.modulation_frequency = node.schedule.base_code().modulation_frequency();
        w.code_length = static_cast<int>(node.schedule.code_length());
        const auto lib = build_pattern_library(node.ris, node.schedule, s.grid_step, s.taper);
        w.n_max = lib.n_max();
        const auto res = run_receiver(w, lib, s.receiver, node.pose.comb_offset);
        Estimated e{res.estimate.angle, res.estimate.peak_to_second_peak, res.measurement.f0,
                    res.measurement.magnitudes};
        rep.ris.push_back(make_report(node, truths[i], e));
        obs.push_back({node.pose, e.local});
    }
    rep.fix = intersect_bearings(std::span<const PoseObservation>(obs), s.min_conditioning);
    rep.true_position = user;
    rep.position_error = norm(rep.fix->position - user);
    return rep;
}

} // namespace

double norm(Vec2 v)
{
    return std::hypot(v.x, v.y);
}

double wrap_bearing(double deg)
{
    double r = std::fmod(deg, 360.0);
    if (r < 0.0)
        r += 360.0;
    if (r >= 360.0)
        r -= 360.0;
    return r;
}

double wrap_signed(double deg)
{
    double r = wrap_bearing(deg);
    if (r > 180.0)
        r -= 360.0;
    return r;
}

double bearing_to(Vec2 from, Vec2 to)
{
    const Vec2 d = to - from;
    return wrap_bearing(std::atan2(d.y, d.x) / deg2rad);
}

double world_bearing(const RisPose &pose, double local_aoa_deg)
{
    return wrap_bearing(pose.boresight_bearing + local_aoa_deg);
}

double local_angle(const RisPose &pose, Vec2 target)
{
    return wrap_signed(bearing_to(pose.position, target) - pose.boresight_bearing);
}

PositionFix intersect_bearings(std::span<const BearingRay> rays, double min_conditioning)
{
    if (rays.size() < 2)
        throw std::invalid_argument("intersect_bearings: need at least two bearings");

    double conditioning = 1.0;
    for (std::size_t i = 0; i < rays.size(); ++i)
        for (std::size_t j = i + 1; j < rays.size(); ++j)
            conditioning =
                std::min(conditioning, std::abs(std::sin((rays[i].bearing - rays[j].bearing) * deg2rad)));
    if (conditioning < min_conditioning || conditioning == 0.0)
        throw IllConditioned("bearings are nearly parallel (conditioning " + std::to_string(conditioning) +
                             " < " + std::to_string(min_conditioning) + ")");

    // Normal equations of sum_i |(I - u_i u_i^T)(x - p_i)|^2.
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (const auto &r : rays)
    {
        const Vec2 u = unit(r.bearing);
        const double p11 = 1.0 - u.x * u.x, p12 = -u.x * u.y, p22 = 1.0 - u.y * u.y;
        a11 += p11;
        a12 += p12;
        a22 += p22;
        b1 += p11 * r.origin.x + p12 * r.origin.y;
        b2 += p12 * r.origin.x + p22 * r.origin.y;
    }
    const double det = a11 * a22 - a12 * a12;
    if (std::abs(det) < std::numeric_limits<double>::epsilon())
        throw IllConditioned("intersect_bearings: singular normal equations");

    PositionFix fix;
    fix.position = {(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
    fix.conditioning = conditioning;

    double sq = 0.0;
    for (const auto &r : rays)
    {
        const Vec2 d = fix.position - r.origin;
        const double along = dot(d, unit(r.bearing));
        if (along < -1e-9 * std::max(1.0, norm(d)))
            throw BehindRay("intersection lies behind the bearing ray from (" + std::to_string(r.origin.x) + ", " +
                            std::to_string(r.origin.y) + ")");
        const double e = perpendicular_distance(r, fix.position);
        sq += e * e;
    }
    fix.residual = std::sqrt(sq / static_cast<double>(rays.size()));
    return fix;
}

PositionFix intersect_bearings(std::span<const PoseObservation> observations, double min_conditioning)
{
    std::vector<BearingRay> rays;
    rays.reserve(observations.size());
    for (const auto &o : observations)
    {
        if (o.local_aoa < -90.0 || o.local_aoa > 90.0)
            throw std::invalid_argument("intersect_bearings: local AoA must lie in [-90, 90]");
        rays.push_back({o.pose.position, world_bearing(o.pose, o.local_aoa)});
    }
    return intersect_bearings(std::span<const BearingRay>(rays), min_conditioning);
}

std::string_view to_string(ScenarioKind kind)
{
    switch (kind)
    {
    case ScenarioKind::network_side:
        return "network_side";
    case ScenarioKind::user_side:
        return "user_side";
    case ScenarioKind::ris_discovery:
        return "ris_discovery";
    case ScenarioKind::multi_ris_fix:
        return "multi_ris_fix";
    }
    return "unknown";
}

ScenarioKind scenario_from_string(std::string_view name)
{
    for (auto k : {ScenarioKind::network_side, ScenarioKind::user_side, ScenarioKind::ris_discovery,
                   ScenarioKind::multi_ris_fix})
        if (to_string(k) == name)
            return k;
    throw ScenarioError("unknown scenario '" + std::string(name) +
                        "' (expected network_side, user_side, ris_discovery or multi_ris_fix)");
}

ScenarioReport run_scenario(ScenarioKind kind, const World &world, const ChannelConfig &channel,
                            const ScenarioSettings &settings)
{
    if (kind == ScenarioKind::multi_ris_fix)
        return multi_ris(world, channel, settings);
    return single_ris(kind, world, channel, settings);
}

} // namespace stcloc
