// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"
#include "pool.hpp"

#include <stcloc/io.hpp>

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace stcloc;
using namespace stcloc::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result
{
    int code = -1;
    std::string out, err;
    json error() const { return json::parse(err); }
};

Result run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "stcloc");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string &name)
{
    const auto dir = fs::temp_directory_path() / "stcloc_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path &dir, const std::string &text)
{
    const auto p = dir / "config.in.json";
    io::write_text(p, text);
    return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path &p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(io::read_text(p));
    for (std::string line; std::getline(in, line);)
    {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');)
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

int first_line(const std::string &text)
{
    try
    {
        load_experiment(text);
    }
    catch (const ConfigError &e)
    {
        return e.diagnostics().front().line;
    }
    return -1;
}

std::string first_path(const std::string &text)
{
    try
    {
        load_experiment(text);
    }
    catch (const ConfigError &e)
    {
        return e.diagnostics().front().path;
    }
    return "<accepted>";
}

void set_workers(const char *v)
{
    if (v)
        setenv("STCLOC_WORKERS", v, 1);
    else
        unsetenv("STCLOC_WORKERS");
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("line locator maps pointers to lines")
    {
        const std::string text = "{\n  \"a\": 1,\n  \"b\": {\n    \"c/d\": [\n      7,\n      {\"e\": \"x\\\"y\"}\n    ]\n  }\n}\n";
        const auto lines = locate_lines(text);
        CHECK(lines.at("") == 1);
        CHECK(lines.at("/a") == 2);
        CHECK(lines.at("/b") == 3);
        CHECK(lines.at("/b/c~1d") == 4);
        CHECK(lines.at("/b/c~1d/0") == 5);
        CHECK(lines.at("/b/c~1d/1") == 6);
        CHECK(lines.at("/b/c~1d/1/e") == 6);
        CHECK(lines.size() == 7);
    }

    TEST_CASE("embedded schema matches the published file")
    {
        CHECK(experiment_schema_text() == io::read_text(STCLOC_SCHEMA_PATH));
    }

    TEST_CASE("every optional property carries an explicit default")
    {
        std::vector<std::string> missing;
        std::function<void(const json &, const std::string &)> walk = [&](const json &schema, const std::string &path) {
            if (auto props = schema.find("properties"); props != schema.end())
            {
                const auto required = schema.value("required", json::array());
                for (const auto &[key, sub] : props->items())
                {
                    const bool is_required = std::find(required.begin(), required.end(), key) != required.end();
                    if (!is_required && !sub.contains("default"))
                        missing.push_back(path + "/" + key);
                    walk(sub, path + "/" + key);
                }
            }
            if (auto items = schema.find("items"); items != schema.end())
                walk(*items, path + "/items");
        };
        walk(experiment_schema(), "");
        CHECK(missing.empty());
    }

    TEST_CASE("schema defaults satisfy the schema")
    {
        json j = json::object();
        apply_defaults(j, experiment_schema());
        CHECK(validate(j, experiment_schema()).empty());
        CHECK(j["receiver"]["pattern_scaling"] == "per_angle");
        CHECK(j["scenario"]["nodes"][0]["comb_offset_hz"] == -400);
    }

    TEST_CASE("defaults map onto the core types")
    {
        const auto e = load_experiment("{}");
        CHECK(e.ris.num_columns == 16);
        CHECK(e.ris.spacing_over_wavelength() == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(e.schedule.base_code().is_single_bit());
        CHECK(e.schedule.shift(3) == 3);
        CHECK(e.receiver.combine.scaling == PatternScaling::per_angle);
        CHECK(e.receiver.exclude_orders == std::set<int>{0});
        CHECK_FALSE(e.channel.snr_db.has_value());
        CHECK(e.sweep.angles.size() == 25);
        CHECK(e.sweep.angles.back() == 60.0);
        CHECK(e.world.nodes.size() == 2);
        CHECK(e.world.user == Vec2{4, 7});
        CHECK(e.capture() * e.sample_rate() == doctest::Approx(1152));
    }

    TEST_CASE("overrides and explicit values")
    {
        const auto e = load_experiment(R"({"ris": {"columns": 8, "rows": 4, "spacing_m": 0.02,
            "reflection_map": {"off": [-1, 0]}}, "code": {"bits": "0110", "shifts": [0, 1, 1, 0, 2, 3, 0, 0]},
            "channel": {"snr_db": 3, "multipath_taps": [{"delay_s": 0.001, "gain": [0.1, 0.2]}]},
            "receiver": {"exclude_orders": [], "combine": "power", "window": "hann"},
            "sweep": {"angle_start_deg": -10, "angle_stop_deg": 10, "angle_step_deg": 0.1, "snr_db": [null, 0]},
            "seed": 9})");
        CHECK(e.ris.spacing == 0.02);
        CHECK(e.ris.reflection_map == ReflectionMap::antipodal());
        CHECK(e.schedule.base_code().to_string() == "0110");
        CHECK(e.schedule.shift(4) == 2);
        CHECK(*e.channel.snr_db == 3.0);
        CHECK(e.channel.rng_seed == 9);
        CHECK(e.channel.multipath_taps[0].arrival_angle == 0.0);
        CHECK(e.receiver.exclude_orders.empty());
        CHECK(e.receiver.combine.mode == CombineMode::power);
        CHECK(e.sweep.angles.size() == 201);
        CHECK(e.sweep.angles.back() == doctest::Approx(10.0));
        CHECK_FALSE(e.sweep.snr_db[0].has_value());
    }

    TEST_CASE("diagnostics point at the offending line")
    {
        CHECK(first_line("{\n  \"ris\": {\n    \"spacing_m\": 0\n  }\n}") == 3);
        CHECK(first_path("{\"ris\": {\"spacing_m\": -0.01}}") == "/ris/spacing_m");
        CHECK(first_line("{\n\"seed\": 1,\n\"extra\": true}") == 3);
        CHECK(first_path("{\"ris\": {\"columns\": 2.5}}") == "/ris/columns");
        CHECK(first_path("{\"receiver\": {\"window\": \"kaiser\"}}") == "/receiver/window");
        CHECK(first_path("{\"code\": {\"bits\": \"01a\"}}") == "/code/bits");
        CHECK(first_path("{\"channel\": {\"multipath_taps\": [{\"delay_s\": 0}]}}") == "/channel/multipath_taps/0");
        CHECK(first_line("{\n \"ris\": {\"columns\": 16,\n\n\n}") == 5); // syntax error
        CHECK(first_path("{\"scenario\": {\"kind\": \"teleport\"}}") == "/scenario/kind");
    }

    TEST_CASE("cross-field rules")
    {
        CHECK(first_path(R"({"sweep": {"angle_start_deg": 10, "angle_stop_deg": -10}})") == "/sweep/angle_stop_deg");
        CHECK(first_path(R"({"sweep": {"snr_db": []}})") == "/sweep/snr_db");
        CHECK(first_path(R"({"code": {"shifts": [0, 1]}})") == "/code/shifts");
        CHECK(first_path(R"({"ris": {"reflection_map": {"on": [1, 1]}}})") == "/ris/reflection_map/on");
        CHECK(first_path(R"({"scenario": {"nodes": [{"name": "a", "position": [0, 0]},
                                                   {"name": "a", "position": [1, 0]}]}})") == "/scenario/nodes/1/name");
        // Line of a defaulted value falls back to its nearest written parent.
        CHECK(first_line("{\n\"code\":\n {\"shifts\": [0]}}") == 3);
    }

    TEST_CASE("pattern command")
    {
        const auto dir = scratch("pattern");
        const auto r = run_cli({"pattern", "--out", (dir / "16").string()});
        REQUIRE(r.code == 0);
        const auto rows = read_csv(dir / "16" / "pattern.csv");
        REQUIRE(rows.front().size() == 18);
        CHECK(rows.front()[1] == "h-8");
        CHECK(rows.front()[17] == "h8");
        CHECK(r.out.find("   3         22.02       22.00") != std::string::npos);

        // Argmax of every column against the L = 16 steering angles.
        const double table[] = {0.0, 7.18, 14.48, 22.02, 30.00, 38.68, 48.59, 61.04, 90.00};
        for (int n = 0; n <= 8; ++n)
        {
            double best = -1, at = 0;
            for (std::size_t i = 1; i < rows.size(); ++i)
                if (const double v = std::stod(rows[i][static_cast<std::size_t>(n + 9)]); v > best + 1e-12)
                    best = v, at = std::stod(rows[i][0]);
            CHECK(std::abs(std::abs(at) - table[n]) <= 0.05 + 1e-9);
        }
        const auto side = json::parse(io::read_text(dir / "16" / "pattern.json"));
        CHECK(side["num_columns"] == 16);

        const auto cfg = write_config(dir, R"({"ris": {"columns": 8, "rows": 8}})");
        REQUIRE(run_cli({"pattern", "--config", cfg.string(), "--out", (dir / "8").string()}).code == 0);
        CHECK(read_csv(dir / "8" / "pattern.csv").front().size() == 10);
    }

    TEST_CASE("invalid configuration exits 2 with a JSON error")
    {
        const auto dir = scratch("invalid");
        const auto cfg = write_config(dir, "{\n  \"ris\": {\n    \"spacing_m\": 0\n  }\n}\n");
        const auto r = run_cli({"pattern", "--config", cfg.string(), "--out", dir.string()});
        CHECK(r.code == 2);
        const auto e = r.error();
        CHECK(e["error"] == "config");
        CHECK(e["diagnostics"][0]["line"] == 3);
        CHECK(e["diagnostics"][0]["path"] == "/ris/spacing_m");
        CHECK_FALSE(fs::exists(dir / "pattern.csv"));

        CHECK(run_cli({"pattern", "--config", (dir / "absent.json").string()}).error()["error"] == "config");
        CHECK(run_cli({"teleport"}).code == 2);
        CHECK(run_cli({"pattern", "--seed", "abc"}).error()["error"] == "usage");
        CHECK(run_cli({"estimate"}).code == 2); // --waveform is required
        CHECK(run_cli({"--help"}).code == 0);
    }

    TEST_CASE("simulate puts the strongest line at the steered harmonic")
    {
        const auto dir = scratch("simulate");
        const auto cfg = write_config(dir, R"({"waveform": {"rx_angle_deg": 22}})");
        REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out", dir.string()}).code == 0);
        const auto rows = read_csv(dir / "harmonics.csv");
        REQUIRE(rows.size() == 18);
        int best = 0;
        double mag = -1;
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (const double m = std::stod(rows[i][2]); m > mag)
                mag = m, best = std::stoi(rows[i][0]);
        CHECK(best == 3);
        CHECK(read_csv(dir / "waveform.csv").front() == std::vector<std::string>{"t", "re", "im"});
        const auto side = json::parse(io::read_text(dir / "waveform.json"));
        CHECK(side["L"] == 16);
    }

    TEST_CASE("simulate at -5 dB shows the comb after 16 windows")
    {
        const auto dir = scratch("lowsnr");
        const auto cfg = write_config(
            dir, R"({"channel": {"snr_db": -5}, "waveform": {"rx_angle_deg": 10, "num_windows": 16}, "seed": 3})");
        REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out", dir.string()}).code == 0);
        const auto e = load_experiment(io::read_text(cfg));
        const auto spec = read_csv(dir / "spectrum.csv");
        // Off-comb bins against the radiating lines.
        std::vector<double> noise;
        double weakest_strong_line = 1e300;
        const double f0 = e.f0();
        const double strongest_lines[] = {1.0, 2.0}; // lines steered nearest to 10 deg
        for (std::size_t i = 1; i < spec.size(); ++i)
        {
            const double f = std::stod(spec[i][0]), m = std::stod(spec[i][1]);
            const double k = f / f0;
            if (std::abs(k - std::round(k)) > 0.3)
                noise.push_back(m);
            for (double n : strongest_lines)
                if (std::abs(k - n) < 1e-6)
                    weakest_strong_line = std::min(weakest_strong_line, m);
        }
        // Visible: both steered lines stand above every off-comb bin.
        CHECK(weakest_strong_line > *std::max_element(noise.begin(), noise.end()));
    }

    TEST_CASE("simulate rejects a capture shorter than two periods")
    {
        const auto dir = scratch("short");
        const auto cfg = write_config(dir, R"({"waveform": {"duration_s": 0.01}})");
        const auto r = run_cli({"simulate", "--config", cfg.string(), "--out", dir.string()});
        CHECK(r.code == 2);
        CHECK(r.error()["error"] == "precondition");
    }

    TEST_CASE("estimate reads back a simulated waveform")
    {
        const auto dir = scratch("estimate");
        const auto cfg = write_config(dir, R"({"waveform": {"rx_angle_deg": -37.5}, "channel": {"snr_db": 20}})");
        REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out", (dir / "sim").string()}).code == 0);
        const auto r = run_cli({"estimate", "--config", cfg.string(), "--waveform", (dir / "sim" / "waveform.csv").string(),
                                "--out", (dir / "est").string()});
        REQUIRE(r.code == 0);
        const auto aoa = json::parse(io::read_text(dir / "est" / "aoa.json"));
        CHECK(std::abs(aoa["angle_deg"].get<double>() + 37.5) <= 3.75);
        CHECK(r.out.find("true angle:") != std::string::npos);

        const auto cfg8 = write_config(dir, R"({"ris": {"columns": 8, "rows": 8}})");
        const auto bad = run_cli({"estimate", "--config", cfg8.string(), "--waveform",
                                  (dir / "sim" / "waveform.csv").string(), "--out", (dir / "est8").string()});
        CHECK(bad.code == 2);
        CHECK(run_cli({"estimate", "--waveform", (dir / "nothing.csv").string(), "--out", dir.string()}).code == 3);
    }

    TEST_CASE("noiseless L = 16 sweep stays within one angular cell")
    {
        const auto dir = scratch("sweep16");
        const auto cfg = write_config(dir, R"({"sweep": {"angle_start_deg": -75, "angle_stop_deg": 75,
            "angle_step_deg": 1, "snr_db": [null], "seeds": 1}, "receiver": {"exclude_orders": []}})");
        REQUIRE(run_cli({"sweep", "--config", cfg.string(), "--out", dir.string()}).code == 0);
        const auto rows = read_csv(dir / "sweep.csv");
        REQUIRE(rows.size() == 152);
        CHECK(rows.front() == std::vector<std::string>{"index", "snr_db", "true_deg", "est_deg", "err_deg", "seed", "status"});
        double worst = 0.0;
        for (std::size_t i = 1; i < rows.size(); ++i)
        {
            CHECK(rows[i][0] == std::to_string(i - 1));
            CHECK(rows[i][6] == "ok");
            worst = std::max(worst, std::abs(std::stod(rows[i][4])));
        }
        CHECK(worst <= 3.75);
        const auto summary = json::parse(io::read_text(dir / "sweep_summary.json"));
        CHECK(summary["by_snr"][0]["snr_db"].is_null());
        CHECK(summary["by_snr"][0]["fraction_within"] == 1.0);
    }

    TEST_CASE("L = 8 moderate-noise sweep reports the fraction within 5 degrees")
    {
        const auto dir = scratch("sweep8");
        const auto cfg = write_config(dir, R"({"ris": {"columns": 8, "rows": 8}, "sweep": {"seeds": 10, "snr_db": [10, 0]}})");
        REQUIRE(run_cli({"sweep", "--config", cfg.string(), "--out", dir.string()}).code == 0);
        const auto summary = json::parse(io::read_text(dir / "sweep_summary.json"));
        REQUIRE(summary["by_snr"].size() == 2);
        CHECK(summary["points"] == 500);
        CHECK(summary["by_snr"][0]["fraction_within"].get<double>() >= 0.8);
        CHECK(summary["by_snr"][1]["rms_deg"].get<double>() >= summary["by_snr"][0]["rms_deg"].get<double>());
        CHECK(summary["channel"]["carrier_leak"] == 0);
    }

    TEST_CASE("sweep output does not depend on the worker count")
    {
        const auto dir = scratch("workers");
        const auto cfg = write_config(dir, R"({"ris": {"columns": 8, "rows": 8}, "sweep": {"seeds": 4, "snr_db": [0]}})");
        set_workers("1");
        REQUIRE(run_cli({"sweep", "--config", cfg.string(), "--out", (dir / "one").string()}).code == 0);
        set_workers("7");
        REQUIRE(run_cli({"sweep", "--config", cfg.string(), "--out", (dir / "seven").string()}).code == 0);
        for (const char *f : {"sweep.csv", "sweep_summary.json"})
            CHECK(io::read_text(dir / "one" / f) == io::read_text(dir / "seven" / f));

        // A different master seed changes the noise.
        REQUIRE(run_cli({"sweep", "--config", cfg.string(), "--seed", "11", "--out", (dir / "other").string()}).code == 0);
        CHECK(io::read_text(dir / "one" / "sweep.csv") != io::read_text(dir / "other" / "sweep.csv"));

        set_workers("zero");
        CHECK(run_cli({"sweep", "--config", cfg.string(), "--out", dir.string()}).code == 2);
        set_workers(nullptr);
    }

    TEST_CASE("parallel_for covers every index once and rethrows the first failure")
    {
        std::vector<int> hits(1000, 0);
        parallel_for(hits.size(), 6, [&](std::size_t i) { hits[i] += 1; });
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
        CHECK_THROWS_WITH(parallel_for(50, 4,
                                       [](std::size_t i) {
                                           if (i == 17 || i == 40)
                                               throw std::runtime_error(std::to_string(i));
                                       }),
                          "17");
        parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
    }

    TEST_CASE("scenario command")
    {
        const auto dir = scratch("scenario");
        const auto r = run_cli({"scenario", "--out", (dir / "fix").string()});
        REQUIRE(r.code == 0);
        const auto fix = json::parse(io::read_text(dir / "fix" / "scenario.json"));
        CHECK(fix["scenario"] == "multi_ris_fix");
        CHECK(fix["position"]["error_m"].get<double>() < 0.5);

        const auto cfg = write_config(dir, R"({"scenario": {"kind": "user_side",
            "nodes": [{"name": "wall", "position": [0, 0]}], "user": [3, 5]}})");
        REQUIRE(run_cli({"scenario", "--config", cfg.string(), "--out", (dir / "user").string()}).code == 0);
        const auto user = json::parse(io::read_text(dir / "user" / "scenario.json"));
        REQUIRE(user["ris"].size() == 1);
        const double truth = local_angle({{0, 0}, 90.0}, {3, 5});
        CHECK(std::abs(user["ris"][0]["estimate"]["local_aoa_deg"].get<double>() - truth) <= 3.75);

        const auto bs = write_config(dir, R"({"scenario": {"kind": "ris_discovery"}})");
        const auto missing = run_cli({"scenario", "--config", bs.string(), "--out", (dir / "bs").string()});
        CHECK(missing.code == 2);
    }

    TEST_CASE("reruns overwrite byte-identical files")
    {
        const auto dir = scratch("rerun");
        const auto cfg = write_config(dir, R"({"channel": {"snr_db": 5}, "waveform": {"rx_angle_deg": 30}, "seed": 42})");
        REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out", dir.string()}).code == 0);
        std::map<std::string, std::string> before;
        for (const auto &f : fs::directory_iterator(dir))
            before[f.path().filename().string()] = io::read_text(f.path());
        REQUIRE(run_cli({"simulate", "--config", cfg.string(), "--out", dir.string()}).code == 0);
        for (const auto &[name, text] : before)
            CHECK(io::read_text(dir / name) == text);
    }
}
