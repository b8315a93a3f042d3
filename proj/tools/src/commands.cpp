// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include "pool.hpp"

#include <stcloc/io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace stcloc::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string fixed(double v, int decimals = 2)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

void emit(const fs::path &path, const std::string &text, std::ostream &out)
{
    io::write_text(path, text);
    out << "wrote " << path.string() << '\n';
}

void write_resolved(const Experiment &e, std::ostream &out)
{
    emit(fs::path(e.output_dir) / "config.json", e.resolved.dump(2) + "\n", out);
}

PatternLibrary library(const Experiment &e) { return build_pattern_library(e.ris, e.schedule, e.grid_step, e.taper); }

int code_length(const Experiment &e) { return static_cast<int>(e.schedule.code_length()); }

std::string snr_text(const std::optional<double> &snr) { return snr ? io::format_number(*snr) : ""; }

// Nearest-rank percentile of already sorted values.
double percentile(const std::vector<double> &sorted, double p)
{
    if (sorted.empty())
        return std::nan("");
    const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
    return sorted[std::max<std::size_t>(rank, 1) - 1];
}

ojson number_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::string_view estimation_type(const EstimationError &e)
{
    if (dynamic_cast<const NoCombFound *>(&e))
        return "NoCombFound";
    if (dynamic_cast<const EmptyAfterExclusion *>(&e))
        return "EmptyAfterExclusion";
    if (dynamic_cast<const IllConditioned *>(&e))
        return "IllConditioned";
    if (dynamic_cast<const BehindRay *>(&e))
        return "BehindRay";
    return "EstimationError";
}

} // namespace

std::size_t worker_count()
{
    if (const char *env = std::getenv("STCLOC_WORKERS"))
    {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw std::invalid_argument("STCLOC_WORKERS must be a positive integer, got '" + std::string(env) + "'");
        return static_cast<std::size_t>(v);
    }
    return std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
}

void cmd_pattern(const Experiment &e, std::ostream &out)
{
    const auto lib = library(e);
    const fs::path dir = e.output_dir;
    const int L = code_length(e);
    const double dl = e.ris.spacing_over_wavelength();

    out << "L = " << L << ", d/lambda = " << fixed(dl, 4) << ", f0 = " << fixed(e.f0(), 4)
        << " Hz, radiating orders |n| <= " << lib.n_max() << '\n';
    if (e.ris.grating_lobe_risk())
        out << "warning: d/lambda above 0.5 admits grating lobes\n";
    out << "   n  steering_deg  argmax_deg\n";
    for (int n = 0; n <= lib.n_max(); ++n)
    {
        char row[96];
        std::snprintf(row, sizeof row, "%4d  %12.2f  %10.2f\n", n, steering_angle(n, L, dl), lib.argmax_deg(n));
        out << row;
    }
    emit(dir / "pattern.csv", io::pattern_csv(lib), out);
    emit(dir / "pattern.json", io::pattern_sidecar(lib), out);
    write_resolved(e, out);
}

void cmd_simulate(const Experiment &e, std::ostream &out)
{
    const fs::path dir = e.output_dir;
    const auto w = synthesize_received(e.ris, e.schedule, e.rx_angle, e.channel, e.capture(), e.sample_rate(), e.mode,
                                       e.taper);
    const auto spec = average_spectrum(w, e.receiver.window_periods, e.receiver.overlap, e.receiver.window);
    DetectionOptions opt;
    opt.confidence_threshold = e.receiver.confidence_threshold;
    opt.exclude_zero_order = e.receiver.exclude_orders.contains(0);
    // The generating f0 is known here, so the markers never depend on a blind search.
    const auto meas = detect_harmonics(spec, e.f0(), w.n_max, opt);

    int strongest = -meas.n_max;
    for (int n = -meas.n_max; n <= meas.n_max; ++n)
        if (meas.magnitude(n) > meas.magnitude(strongest))
            strongest = n;
    out << w.samples.size() << " samples at " << fixed(w.sample_rate, 3) << " Hz (" << fixed(w.duration(), 4)
        << " s, " << spec.num_windows << " windows)\n"
        << "strongest line: n = " << strongest << " at " << fixed(strongest * e.f0(), 3) << " Hz\n";

    emit(dir / "waveform.csv", io::waveform_csv(w), out);
    emit(dir / "waveform.json", io::waveform_sidecar(w, {e.channel, e.mode, e.rx_angle}), out);
    emit(dir / "spectrum.csv", io::spectrum_csv(spec), out);
    emit(dir / "harmonics.csv", io::harmonics_csv(meas), out);
    write_resolved(e, out);
}

void cmd_estimate(const Experiment &e, const fs::path &waveform_csv, const fs::path &sidecar, std::ostream &out)
{
    io::WaveformInfo info;
    const auto w = io::read_waveform(waveform_csv, sidecar, &info);
    if (w.code_length != code_length(e))
        throw ConfigError("/code", "waveform was generated with L = " + std::to_string(w.code_length) +
                                       " but the configuration has L = " + std::to_string(code_length(e)));
    const auto lib = library(e);
    const auto res = run_receiver(w, lib, e.receiver);

    out << "AoA estimate: " << fixed(res.estimate.angle) << " deg (peak-to-second-peak "
        << fixed(res.estimate.peak_to_second_peak, 3) << ")\n";
    if (info.rx_angle)
        out << "true angle:   " << fixed(*info.rx_angle) << " deg\n";

    const fs::path dir = e.output_dir;
    emit(dir / "spectrum.csv", io::spectrum_csv(res.spectrum), out);
    emit(dir / "harmonics.csv", io::harmonics_csv(res.measurement), out);
    emit(dir / "aoa.json", io::aoa_json(res.estimate), out);
    write_resolved(e, out);
}

void cmd_sweep(const Experiment &e, std::size_t workers, std::ostream &out)
{
    const auto lib = library(e);
    const double duration = e.capture(), fs = e.sample_rate();
    const std::size_t per_snr = e.sweep.angles.size() * e.sweep.seeds;
    const std::size_t count = per_snr * e.sweep.snr_db.size();
    if (count == 0)
        throw ConfigError("/sweep", "empty sweep axis");

    struct Point
    {
        std::optional<double> snr;
        double truth = 0.0;
        std::uint64_t seed = 0;
        double estimate = std::nan("");
        std::string status = "ok";
    };
    std::vector<Point> points(count);

    // Index order: SNR, then angle, then seed.
    parallel_for(count, workers, [&](std::size_t i) {
        auto &p = points[i];
        p.snr = e.sweep.snr_db[i / per_snr];
        p.truth = e.sweep.angles[(i % per_snr) / e.sweep.seeds];
        p.seed = e.seed + i;
        ChannelConfig ch = e.channel;
        ch.snr_db = p.snr;
        ch.rng_seed = p.seed;
        const auto w = synthesize_received(e.ris, e.schedule, p.truth, ch, duration, fs, e.mode, e.taper);
        try
        {
            p.estimate = run_receiver(w, lib, e.receiver).estimate.angle;
        }
        catch (const EstimationError &err)
        {
            p.status = estimation_type(err);
        }
    });

    std::string csv = "index,snr_db,true_deg,est_deg,err_deg,seed,status\n";
    for (std::size_t i = 0; i < count; ++i)
    {
        const auto &p = points[i];
        const bool ok = p.status == "ok";
        csv += std::to_string(i) + ',' + snr_text(p.snr) + ',' + io::format_number(p.truth) + ',' +
               (ok ? io::format_number(p.estimate) : "") + ',' + (ok ? io::format_number(p.estimate - p.truth) : "") +
               ',' + std::to_string(p.seed) + ',' + p.status + '\n';
    }

    ojson summary;
    summary["points"] = count;
    summary["code_length"] = code_length(e);
    summary["num_windows"] = e.num_windows;
    summary["seed"] = e.seed;
    summary["within_deg"] = 5.0;
    summary["by_snr"] = ojson::array();
    out << "  snr_db  points  failed  rms_deg  p90_deg  within_5deg\n";
    for (std::size_t s = 0; s < e.sweep.snr_db.size(); ++s)
    {
        std::vector<double> abs_err;
        std::size_t within = 0;
        double sq = 0.0;
        for (std::size_t i = s * per_snr; i < (s + 1) * per_snr; ++i)
        {
            if (points[i].status != "ok")
                continue;
            const double a = std::abs(points[i].estimate - points[i].truth);
            abs_err.push_back(a);
            sq += a * a;
            within += a <= 5.0;
        }
        std::sort(abs_err.begin(), abs_err.end());
        const double rms = abs_err.empty() ? std::nan("") : std::sqrt(sq / static_cast<double>(abs_err.size()));
        const double p90 = percentile(abs_err, 0.9);
        // Failed points count as outside the band.
        const double frac = static_cast<double>(within) / static_cast<double>(per_snr);
        ojson row;
        row["snr_db"] = e.sweep.snr_db[s] ? ojson(*e.sweep.snr_db[s]) : ojson(nullptr);
        row["points"] = per_snr;
        row["failures"] = per_snr - abs_err.size();
        row["rms_deg"] = number_or_null(rms);
        row["p90_deg"] = number_or_null(p90);
        row["max_abs_deg"] = number_or_null(abs_err.empty() ? std::nan("") : abs_err.back());
        row["fraction_within"] = frac;
        summary["by_snr"].push_back(row);

        char line[128];
        std::snprintf(line, sizeof line, "  %6s  %6zu  %6zu  %7.3f  %7.3f  %10.3f\n",
                      e.sweep.snr_db[s] ? fixed(*e.sweep.snr_db[s], 1).c_str() : "inf", per_snr,
                      per_snr - abs_err.size(), rms, p90, frac);
        out << line;
    }
    summary["channel"] = nlohmann::ordered_json::parse(e.resolved["channel"].dump());
    summary["receiver"] = nlohmann::ordered_json::parse(e.resolved["receiver"].dump());

    const fs::path dir = e.output_dir;
    emit(dir / "sweep.csv", csv, out);
    emit(dir / "sweep_summary.json", summary.dump(2) + "\n", out);
    write_resolved(e, out);
}

void cmd_scenario(const Experiment &e, std::ostream &out)
{
    const auto rep = run_scenario(e.scenario, e.world, e.channel, e.scenario_settings());
    out << to_string(rep.kind) << ": " << rep.estimator_node << " locates " << rep.target << '\n';
    for (const auto &r : rep.ris)
        out << "  " << r.name << ": true " << fixed(r.true_local) << " deg, estimated " << fixed(r.estimated_local)
            << " deg\n";
    if (rep.estimated_ris_bearing_from_bs)
        out << "  RIS bearing from base station: " << fixed(*rep.estimated_ris_bearing_from_bs) << " deg (true "
            << fixed(*rep.true_ris_bearing_from_bs) << ")\n";
    if (rep.fix)
    {
        out << "  position fix: (" << fixed(rep.fix->position.x, 3) << ", " << fixed(rep.fix->position.y, 3) << ")";
        if (rep.position_error)
            out << ", error " << fixed(*rep.position_error, 3) << " m";
        out << '\n';
    }
    const fs::path dir = e.output_dir;
    emit(dir / "scenario.json", io::scenario_json(rep, e.channel), out);
    emit(dir / "scenario.csv", io::scenario_csv(rep), out);
    write_resolved(e, out);
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Space-time coded RIS localization: patterns, synthesis, estimation, sweeps and scenarios", "stcloc"};
    app.require_subcommand(1);

    std::string config_path, out_dir, waveform, sidecar;
    std::optional<std::uint64_t> seed;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "Experiment JSON (schema defaults when omitted)");
        sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "Master seed (overrides seed)");
    };
    auto *pattern = app.add_subcommand("pattern", "Harmonic radiation patterns and steering table");
    auto *simulate = app.add_subcommand("simulate", "Synthesize a received waveform and its averaged spectrum");
    auto *estimate = app.add_subcommand("estimate", "Estimate the AoA from an existing waveform file");
    auto *sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over angle x SNR x seeds");
    auto *scenario = app.add_subcommand("scenario", "Run a localization scenario");
    for (auto *sub : {pattern, simulate, estimate, sweep, scenario})
        add_common(sub);
    estimate->add_option("--waveform", waveform, "Waveform CSV written by simulate")->required();
    estimate->add_option("--sidecar", sidecar, "JSON sidecar (default: the CSV path with .json)");

    auto fail = [&](int code, ojson body) {
        err << body.dump() << '\n';
        return code;
    };

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        if (e.get_exit_code() == 0)
        {
            out << app.help();
            return 0;
        }
        return fail(2, {{"error", "usage"}, {"message", e.what()}});
    }

    try
    {
        std::string text = "{}";
        if (!config_path.empty())
        {
            try
            {
                text = io::read_text(config_path);
            }
            catch (const std::exception &e)
            {
                throw ConfigError("", e.what());
            }
        }
        auto e = load_experiment(text);
        if (!out_dir.empty())
            e.resolved["output_dir"] = e.output_dir = out_dir;
        if (seed)
            e.resolved["seed"] = e.seed = e.channel.rng_seed = *seed;

        if (pattern->parsed())
            cmd_pattern(e, out);
        else if (simulate->parsed())
            cmd_simulate(e, out);
        else if (estimate->parsed())
        {
            const fs::path side = sidecar.empty() ? fs::path(waveform).replace_extension(".json") : fs::path(sidecar);
            cmd_estimate(e, waveform, side, out);
        }
        else if (sweep->parsed())
            cmd_sweep(e, worker_count(), out);
        else
            cmd_scenario(e, out);
        return 0;
    }
    catch (const ConfigError &e)
    {
        ojson diags = ojson::array();
        for (const auto &d : e.diagnostics())
            diags.push_back({{"line", d.line}, {"path", d.path}, {"message", d.message}});
        return fail(2, {{"error", "config"}, {"message", e.what()}, {"diagnostics", diags}});
    }
    catch (const EstimationError &e)
    {
        return fail(3, {{"error", "estimation"}, {"type", estimation_type(e)}, {"message", e.what()}});
    }
    catch (const std::invalid_argument &e)
    {
        // Core preconditions: the configuration asked for something the model rejects.
        return fail(2, {{"error", "precondition"}, {"message", e.what()}});
    }
    catch (const std::domain_error &e)
    {
        return fail(2, {{"error", "precondition"}, {"message", e.what()}});
    }
    catch (const std::exception &e)
    {
        return fail(3, {{"error", "runtime"}, {"message", e.what()}});
    }
}

} // namespace stcloc::cli
