// SPDX-License-Identifier: Apache-2.0

#include <stcloc/scenario.hpp>

#include <benchmark/benchmark.h>

using namespace stcloc;

namespace {

constexpr double fc = 5.385e9;

struct Rig
{
    RisConfig ris;
    CodeSchedule sched;
    double f0;
};

Rig rig(std::size_t L)
{
    auto sched = CodeSchedule::column_shifted(BinaryCode::single_bit(L, 0, 1.87e-3), L);
    const double f0 = sched.base_code().modulation_frequency();
    return {RisConfig::half_wavelength(L, L, fc), sched, f0};
}

void harmonic_coefficients(benchmark::State &state)
{
    const auto code = BinaryCode::from_string("0110100110010110", 1e-3);
    for (auto _ : state)
        for (int n = -8; n <= 8; ++n)
            benchmark::DoNotOptimize(harmonic_value(code, n));
}
BENCHMARK(harmonic_coefficients);

void pattern_library(benchmark::State &state)
{
    const auto r = rig(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(build_pattern_library(r.ris, r.sched, 0.1));
}
BENCHMARK(pattern_library)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void synthesis(benchmark::State &state)
{
    const auto r = rig(16);
    const auto mode = state.range(0) == 0 ? SynthesisMode::harmonic_domain : SynthesisMode::time_domain;
    ChannelConfig ch;
    ch.snr_db = 10.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(synthesize_received(r.ris, r.sched, 20.0, ch, 18.0 / r.f0, 64 * r.f0, mode));
}
BENCHMARK(synthesis)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void receiver_chain(benchmark::State &state)
{
    const auto r = rig(16);
    const auto lib = build_pattern_library(r.ris, r.sched, 0.1);
    ReceiverSettings s;
    s.f0_known = state.range(0) == 1;
    ChannelConfig ch;
    ch.snr_db = 10.0;
    const auto w = synthesize_received(r.ris, r.sched, 20.0, ch, capture_duration(s, 8, r.f0, 64 * r.f0), 64 * r.f0);
    for (auto _ : state)
        benchmark::DoNotOptimize(run_receiver(w, lib, s));
}
BENCHMARK(receiver_chain)->ArgName("f0_known")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void bearing_fix(benchmark::State &state)
{
    const RisPose a{{0, 0}, 90.0}, b{{10, 0}, 90.0}, c{{5, 20}, 270.0};
    const Vec2 user{4, 7};
    const PoseObservation obs[] = {{a, local_angle(a, user)}, {b, local_angle(b, user)}, {c, local_angle(c, user)}};
    for (auto _ : state)
        benchmark::DoNotOptimize(intersect_bearings(std::span<const PoseObservation>(obs), 0.05));
}
BENCHMARK(bearing_fix);

} // namespace

BENCHMARK_MAIN();
