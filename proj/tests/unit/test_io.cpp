// SPDX-License-Identifier: Apache-2.0

#include <stcloc/io.hpp>

#include "json.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace stcloc;
namespace fs = std::filesystem;

namespace {

constexpr double fc = 5.385e9;

fs::path scratch_dir(const std::string &name)
{
    const auto dir = fs::temp_directory_path() / ("stcloc_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> lines_of(const std::string &text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        out.push_back(line);
    return out;
}

} // namespace

TEST_SUITE("io")
{
    TEST_CASE("numbers round-trip in shortest form")
    {
        CHECK(io::format_number(0.5) == "0.5");
        CHECK(io::format_number(-3.0) == "-3");
        CHECK(io::format_number(1e-300) == "1e-300");
        for (double v : {0.1, 1.0 / 3.0, 33.42245989304813, -7.18e-9})
            CHECK(std::stod(io::format_number(v)) == v);
    }

    TEST_CASE("pattern CSV and sidecar")
    {
        const auto ris = RisConfig::half_wavelength(8, 8, fc);
        const auto sched = CodeSchedule::column_shifted(BinaryCode::single_bit(8, 0, 1.87e-3), 8);
        const auto lib = build_pattern_library(ris, sched, 1.0);
        const auto rows = lines_of(io::pattern_csv(lib));
        CHECK(rows.front() == "angle_deg,h-4,h-3,h-2,h-1,h0,h1,h2,h3,h4");
        CHECK(rows.size() == lib.angles().size() + 1);
        CHECK(rows[1].rfind("-90,", 0) == 0);

        const auto side = nlohmann::json::parse(io::pattern_sidecar(lib));
        CHECK(side["num_columns"] == 8);
        CHECK(side["grid_step_deg"] == 1.0);
        CHECK(side["taper"] == "none");
        CHECK(side["n_max"] == 4);
        CHECK(side["f_0_hz"].get<double>() == doctest::Approx(1.0 / (8 * 1.87e-3)));
        CHECK(side["argmax_deg"]["h2"].get<double>() == doctest::Approx(30.0));
        CHECK(side["carrier_frequency_hz"].get<double>() == fc);
    }

    TEST_CASE("waveform files round-trip exactly")
    {
        const auto ris = RisConfig::half_wavelength(8, 8, fc);
        const auto sched = CodeSchedule::column_shifted(BinaryCode::single_bit(8, 0, 1.87e-3), 8);
        const double f0 = sched.base_code().modulation_frequency();
        ChannelConfig ch;
        ch.snr_db = 3.0;
        ch.rng_seed = 77;
        ch.carrier_leak = 0.25;
        ch.multipath_taps.push_back({1e-3, cplx(0.1, -0.2), 33.0});
        const auto w = synthesize_received(ris, sched, 12.5, ch, 4.0 / f0, 64 * f0);

        const auto dir = scratch_dir("waveform");
        io::WaveformInfo info{ch, SynthesisMode::harmonic_domain, 12.5};
        io::write_text(dir / "w.csv", io::waveform_csv(w));
        io::write_text(dir / "w.json", io::waveform_sidecar(w, info));

        io::WaveformInfo back;
        const auto r = io::read_waveform(dir / "w.csv", dir / "w.json", &back);
        CHECK(r.samples == w.samples);
        CHECK(r.sample_rate == w.sample_rate);
        CHECK(r.modulation_frequency == w.modulation_frequency);
        CHECK(r.code_length == 8);
        CHECK(r.n_max == 4);
        CHECK(back.channel.snr_db == ch.snr_db);
        CHECK(back.channel.rng_seed == 77);
        CHECK(back.channel.multipath_taps.size() == 1);
        CHECK(back.channel.multipath_taps[0].gain == cplx(0.1, -0.2));
        CHECK(back.rx_angle == 12.5);

        const auto side = nlohmann::json::parse(io::read_text(dir / "w.json"));
        for (const char *key : {"sample_rate", "f_0", "L", "duration", "channel", "seed"})
            CHECK(side.contains(key));
        CHECK(lines_of(io::read_text(dir / "w.csv")).front() == "t,re,im");
        fs::remove_all(dir);
    }

    TEST_CASE("malformed waveform files are rejected")
    {
        const auto dir = scratch_dir("bad");
        io::write_text(dir / "ok.json", R"({"sample_rate": 100.0, "f_0": 10.0, "L": 2, "n_max": 1})");
        io::write_text(dir / "noheader.csv", "0.1,1,2\n");
        io::write_text(dir / "garbage.csv", "t,re,im\n0.005,1,x\n");
        io::write_text(dir / "bad.json", "{not json");
        io::write_text(dir / "missing.json", R"({"sample_rate": 100.0})");
        CHECK_THROWS_AS(io::read_waveform(dir / "noheader.csv", dir / "ok.json"), std::runtime_error);
        CHECK_THROWS_AS(io::read_waveform(dir / "garbage.csv", dir / "ok.json"), std::runtime_error);
        CHECK_THROWS_AS(io::read_waveform(dir / "garbage.csv", dir / "bad.json"), std::runtime_error);
        CHECK_THROWS_AS(io::read_waveform(dir / "garbage.csv", dir / "missing.json"), std::runtime_error);
        CHECK_THROWS_AS(io::read_waveform(dir / "absent.csv", dir / "ok.json"), std::runtime_error);
        fs::remove_all(dir);
    }

    TEST_CASE("spectrum, harmonics and AoA exports")
    {
        const auto ris = RisConfig::half_wavelength(8, 8, fc);
        const auto sched = CodeSchedule::column_shifted(BinaryCode::single_bit(8, 0, 1.87e-3), 8);
        const auto lib = build_pattern_library(ris, sched, 0.5);
        const double f0 = sched.base_code().modulation_frequency();
        const auto w = synthesize_received(ris, sched, 20.0, {}, 8.0 / f0, 64 * f0);
        const auto res = run_receiver(w, lib, {});

        const auto spec_rows = lines_of(io::spectrum_csv(res.spectrum));
        CHECK(spec_rows.front() == "freq_hz,magnitude");
        CHECK(spec_rows.size() == res.spectrum.frequencies.size() + 1);

        const auto h_rows = lines_of(io::harmonics_csv(res.measurement));
        CHECK(h_rows.front() == "n,freq_hz,magnitude,excluded");
        CHECK(h_rows.size() == 10);
        CHECK(h_rows[5].rfind("0,0,", 0) == 0);
        CHECK(h_rows[5].back() == '1');

        const auto j = nlohmann::json::parse(io::aoa_json(res.estimate));
        CHECK(j["angle_deg"].get<double>() == res.estimate.angle);
        CHECK(j["profile"].size() == lib.angles().size());
        CHECK(j["profile"][0].size() == 2);
        CHECK(j["excluded_orders"] == nlohmann::json::array({0}));
        CHECK(j["psr"].get<double>() >= 1.0);
        CHECK(j["f0_used"].get<double>() == f0);
    }

    TEST_CASE("scenario report exports")
    {
        World world;
        const auto sched = CodeSchedule::column_shifted(BinaryCode::single_bit(8, 0, 1.87e-3), 8);
        const double f0 = sched.base_code().modulation_frequency();
        world.nodes.push_back({"a", {{0, 0}, 90.0, -6.0 * f0}, RisConfig::half_wavelength(8, 8, fc), sched});
        world.nodes.push_back({"b", {{10, 0}, 90.0, 6.0 * f0}, RisConfig::half_wavelength(8, 8, fc), sched});
        world.user = Vec2{4.0, 7.0};
        const auto rep = run_scenario(ScenarioKind::multi_ris_fix, world, {});
        const auto j = nlohmann::json::parse(io::scenario_json(rep, {}));
        CHECK(j["scenario"] == "multi_ris_fix");
        CHECK(j["ris"].size() == 2);
        CHECK(j["position"].contains("error_m"));
        CHECK(j["position"]["ground_truth"][0] == 4.0);

        const auto rows = lines_of(io::scenario_csv(rep));
        CHECK(rows.size() == 3);
        CHECK(rows.front().find("position_error_m") != std::string::npos);
        CHECK(rows[1].rfind("multi_ris_fix,a,", 0) == 0);
    }

    TEST_CASE("enum names")
    {
        CHECK(io::to_string(ElementTaper::cosine) == "cosine");
        CHECK(io::to_string(SynthesisMode::time_domain) == "time_domain");
    }
}
