// SPDX-License-Identifier: Apache-2.0

#include "stcloc/io.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stcloc::io {

using nlohmann::ordered_json;

namespace {

ordered_json complex_json(cplx c)
{
    return ordered_json::array({c.real(), c.imag()});
}

ordered_json channel_json(const ChannelConfig &ch)
{
    ordered_json j;
    j["snr_db"] = ch.snr_db ? ordered_json(*ch.snr_db) : ordered_json(nullptr);
    j["carrier_leak"] = ch.carrier_leak;
    auto taps = ordered_json::array();
    for (const auto &t : ch.multipath_taps)
        taps.push_back({{"delay_s", t.delay}, {"gain", complex_json(t.gain)}, {"arrival_angle_deg", t.arrival_angle}});
    j["multipath_taps"] = taps;
    j["rng_seed"] = ch.rng_seed;
    return j;
}

ChannelConfig channel_from_json(const ordered_json &j)
{
    ChannelConfig ch;
    if (j.contains("snr_db") && !j["snr_db"].is_null())
        ch.snr_db = j["snr_db"].get<double>();
    ch.carrier_leak = j.value("carrier_leak", 0.0);
    if (j.contains("multipath_taps"))
        for (const auto &t : j["multipath_taps"])
            ch.multipath_taps.push_back({t.at("delay_s").get<double>(),
                                         cplx(t.at("gain").at(0).get<double>(), t.at("gain").at(1).get<double>()),
                                         t.at("arrival_angle_deg").get<double>()});
    ch.rng_seed = j.value("rng_seed", std::uint64_t{0});
    return ch;
}

std::string dump(const ordered_json &j)
{
    return j.dump(2) + "\n";
}

} // namespace

std::string format_number(double v)
{
    if (!std::isfinite(v))
        return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string_view to_string(ElementTaper taper)
{
    return taper == ElementTaper::cosine ? "cosine" : "none";
}

std::string_view to_string(SynthesisMode mode)
{
    return mode == SynthesisMode::time_domain ? "time_domain" : "harmonic_domain";
}

std::string pattern_csv(const PatternLibrary &lib)
{
    std::string out = "angle_deg";
    for (int n = -lib.n_max(); n <= lib.n_max(); ++n)
        out += ",h" + std::to_string(n);
    out += '\n';
    const auto &g = lib.angles();
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        out += format_number(g[i]);
        for (int n = -lib.n_max(); n <= lib.n_max(); ++n)
        {
            out += ',';
            out += format_number(lib.pattern(n)[i]);
        }
        out += '\n';
    }
    return out;
}

std::string pattern_sidecar(const PatternLibrary &lib)
{
    ordered_json j;
    j["num_columns"] = lib.ris.num_columns;
    j["num_rows"] = lib.ris.num_rows;
    j["spacing_m"] = lib.ris.spacing;
    j["d_over_lambda"] = lib.ris.spacing_over_wavelength();
    j["carrier_frequency_hz"] = lib.ris.carrier_frequency;
    j["reflection_map"] = {{"0", complex_json(lib.ris.reflection_map.off)},
                           {"1", complex_json(lib.ris.reflection_map.on)}};
    j["code_length"] = lib.code_length;
    j["f_0_hz"] = lib.modulation_frequency;
    j["n_max"] = lib.n_max();
    j["grid_step_deg"] = lib.grid_step;
    j["taper"] = std::string(to_string(lib.taper));
    j["units"] = "linear field magnitude";
    auto peaks = ordered_json::object();
    for (int n = -lib.n_max(); n <= lib.n_max(); ++n)
        peaks["h" + std::to_string(n)] = lib.argmax_deg(n);
    j["argmax_deg"] = peaks;
    return dump(j);
}

std::string waveform_csv(const Waveform &w)
{
    std::string out = "t,re,im\n";
    out.reserve(out.size() + w.samples.size() * 48);
    for (std::size_t i = 0; i < w.samples.size(); ++i)
    {
        out += format_number(w.time(i));
        out += ',';
        out += format_number(w.samples[i].real());
        out += ',';
        out += format_number(w.samples[i].imag());
        out += '\n';
    }
    return out;
}

std::string waveform_sidecar(const Waveform &w, const WaveformInfo &info)
{
    ordered_json j;
    j["sample_rate"] = w.sample_rate;
    j["f_0"] = w.modulation_frequency;
    j["L"] = w.code_length;
    j["n_max"] = w.n_max;
    j["duration"] = w.duration();
    j["num_samples"] = w.samples.size();
    j["time_stamp"] = "sample centre, t_i = (i + 1/2) / sample_rate";
    j["mode"] = std::string(to_string(info.mode));
    j["rx_angle_deg"] = info.rx_angle ? ordered_json(*info.rx_angle) : ordered_json(nullptr);
    j["channel"] = channel_json(info.channel);
    j["seed"] = info.channel.rng_seed;
    j["snr_reference"] = "total direct-path harmonic power over noise power in (2 n_max + 1) f_0";
    return dump(j);
}

Waveform read_waveform(const std::filesystem::path &csv, const std::filesystem::path &sidecar, WaveformInfo *info)
{
    ordered_json meta;
    try
    {
        meta = ordered_json::parse(read_text(sidecar));
    }
    catch (const ordered_json::exception &e)
    {
        throw std::runtime_error("waveform sidecar " + sidecar.string() + ": " + e.what());
    }

    Waveform w;
    try
    {
        w.sample_rate = meta.at("sample_rate").get<double>();
        w.modulation_frequency = meta.at("f_0").get<double>();
        w.code_length = meta.at("L").get<int>();
        w.n_max = meta.at("n_max").get<int>();
        if (info)
        {
            info->channel = channel_from_json(meta.value("channel", ordered_json::object()));
            info->mode = meta.value("mode", std::string("harmonic_domain")) == "time_domain"
                             ? SynthesisMode::time_domain
                             : SynthesisMode::harmonic_domain;
            if (meta.contains("rx_angle_deg") && !meta["rx_angle_deg"].is_null())
                info->rx_angle = meta["rx_angle_deg"].get<double>();
        }
    }
    catch (const ordered_json::exception &e)
    {
        throw std::runtime_error("waveform sidecar " + sidecar.string() + ": " + e.what());
    }
    if (!(w.sample_rate > 0.0))
        throw std::runtime_error("waveform sidecar: sample_rate must be positive");

    std::istringstream in(read_text(csv));
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,re,im", 0) != 0)
        throw std::runtime_error("waveform csv " + csv.string() + ": expected header 't,re,im'");
    std::size_t lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        double v[3];
        const char *p = line.data();
        const char *end = line.data() + line.size();
        for (int k = 0; k < 3; ++k)
        {
            auto r = std::from_chars(p, end, v[k]);
            if (r.ec != std::errc() || (k < 2 && (r.ptr == end || *r.ptr != ',')))
                throw std::runtime_error("waveform csv " + csv.string() + ": malformed line " +
                                         std::to_string(lineno));
            p = r.ptr + 1;
        }
        w.samples.emplace_back(v[1], v[2]);
    }
    return w;
}

std::string spectrum_csv(const AveragedSpectrum &spec)
{
    std::string out = "freq_hz,magnitude\n";
    for (std::size_t i = 0; i < spec.frequencies.size(); ++i)
        out += format_number(spec.frequencies[i]) + ',' + format_number(spec.magnitudes[i]) + '\n';
    return out;
}

std::string harmonics_csv(const HarmonicMeasurement &meas)
{
    std::string out = "n,freq_hz,magnitude,excluded\n";
    for (int n = -meas.n_max; n <= meas.n_max; ++n)
        out += std::to_string(n) + ',' + format_number(meas.comb_center + n * meas.f0) + ',' +
               format_number(meas.magnitude(n)) + ',' + (meas.excluded_orders.count(n) ? "1" : "0") + '\n';
    return out;
}

std::string aoa_json(const AoaEstimate &est)
{
    ordered_json j;
    j["angle_deg"] = est.angle;
    auto profile = ordered_json::array();
    for (std::size_t i = 0; i < est.grid.size(); ++i)
        profile.push_back(ordered_json::array({est.grid[i], est.profile[i]}));
    j["profile"] = profile;
    j["psr"] = est.peak_to_second_peak;
    j["excluded_orders"] = est.excluded_orders;
    j["f0_used"] = est.f0_used;
    return dump(j);
}

std::string scenario_json(const ScenarioReport &rep, const ChannelConfig &channel)
{
    ordered_json j;
    j["scenario"] = std::string(to_string(rep.kind));
    j["estimator"] = rep.estimator_node;
    j["target"] = rep.target;
    auto ris = ordered_json::array();
    for (const auto &r : rep.ris)
    {
        ordered_json e;
        e["name"] = r.name;
        e["f_0_hz"] = r.f0;
        e["comb_offset_hz"] = r.comb_offset;
        e["ground_truth"] = {{"local_aoa_deg", r.true_local}, {"world_bearing_deg", r.true_bearing}};
        e["estimate"] = {{"local_aoa_deg", r.estimated_local},
                         {"world_bearing_deg", r.estimated_bearing},
                         {"psr", r.peak_to_second_peak}};
        e["error_deg"] = r.error;
        e["harmonic_magnitudes"] = r.magnitudes;
        ris.push_back(e);
    }
    j["ris"] = ris;
    if (rep.true_ris_bearing_from_bs)
        j["ris_bearing_from_base_station"] = {
            {"ground_truth_deg", *rep.true_ris_bearing_from_bs},
            {"estimate_deg", *rep.estimated_ris_bearing_from_bs},
            {"error_deg", wrap_signed(*rep.estimated_ris_bearing_from_bs - *rep.true_ris_bearing_from_bs)}};
    if (rep.fix)
    {
        j["position"] = {{"estimate", {rep.fix->position.x, rep.fix->position.y}},
                         {"ground_truth", {rep.true_position->x, rep.true_position->y}},
                         {"error_m", *rep.position_error},
                         {"residual_m", rep.fix->residual},
                         {"conditioning", rep.fix->conditioning}};
    }
    j["channel"] = channel_json(channel);
    return dump(j);
}

std::string scenario_csv(const ScenarioReport &rep)
{
    std::string out = "scenario,ris,true_deg,est_deg,err_deg,true_bearing_deg,est_bearing_deg,psr";
    if (rep.fix)
        out += ",fix_x,fix_y,true_x,true_y,position_error_m,residual_m,conditioning";
    out += '\n';
    for (const auto &r : rep.ris)
    {
        out += std::string(to_string(rep.kind)) + ',' + r.name + ',' + format_number(r.true_local) + ',' +
               format_number(r.estimated_local) + ',' + format_number(r.error) + ',' + format_number(r.true_bearing) +
               ',' + format_number(r.estimated_bearing) + ',' + format_number(r.peak_to_second_peak);
        if (rep.fix)
            out += ',' + format_number(rep.fix->position.x) + ',' + format_number(rep.fix->position.y) + ',' +
                   format_number(rep.true_position->x) + ',' + format_number(rep.true_position->y) + ',' +
                   format_number(*rep.position_error) + ',' + format_number(rep.fix->residual) + ',' +
                   format_number(rep.fix->conditioning);
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f)
        throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace stcloc::io
