// SPDX-License-Identifier: Apache-2.0

#include "stcloc/code.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stcloc {

namespace {

long positive_mod(long a, long m)
{
    const long r = a % m;
    return r < 0 ? r + m : r;
}

// exp(-j*pi*k/L) with k reduced modulo 2L first so large orders keep full precision.
cplx unit_phasor(long k, long L)
{
    const long r = positive_mod(k, 2 * L);
    return std::polar(1.0, -pi * static_cast<double>(r) / static_cast<double>(L));
}

} // namespace

double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    return std::sin(x) / x;
}

BinaryCode::BinaryCode(std::vector<std::uint8_t> bits, double bit_duration) : bits_(std::move(bits)), tau_(bit_duration)
{
    if (bits_.empty())
        throw std::invalid_argument("BinaryCode: code length must be at least 1");
    if (!(bit_duration > 0.0) || !std::isfinite(bit_duration))
        throw std::invalid_argument("BinaryCode: bit duration must be a positive number of seconds");
    for (auto b : bits_)
        if (b > 1)
            throw std::invalid_argument("BinaryCode: bits must be 0 or 1");
}

BinaryCode BinaryCode::from_string(std::string_view bits, double bit_duration)
{
    std::vector<std::uint8_t> v;
    v.reserve(bits.size());
    for (char c : bits)
    {
        if (c != '0' && c != '1')
            throw std::invalid_argument("BinaryCode: bitstring may only contain '0' and '1'");
        v.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return BinaryCode(std::move(v), bit_duration);
}

BinaryCode BinaryCode::single_bit(std::size_t length, std::size_t on_index, double bit_duration)
{
    if (on_index >= length)
        throw std::invalid_argument("BinaryCode::single_bit: index out of range");
    std::vector<std::uint8_t> v(length, 0);
    v[on_index] = 1;
    return BinaryCode(std::move(v), bit_duration);
}

bool BinaryCode::is_single_bit() const
{
    return std::count(bits_.begin(), bits_.end(), std::uint8_t{1}) == 1;
}

bool BinaryCode::is_all_zero() const
{
    return std::none_of(bits_.begin(), bits_.end(), [](auto b) { return b != 0; });
}

std::string BinaryCode::to_string() const
{
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_)
        s.push_back(b ? '1' : '0');
    return s;
}

cplx harmonic_value(const BinaryCode &code, int n)
{
    const long L = static_cast<long>(code.length());
    cplx sum{0.0, 0.0};
    for (long m = 1; m <= L; ++m)
        if (code.bit(static_cast<std::size_t>(m - 1)))
            sum += unit_phasor(static_cast<long>(n) * (2 * m - 1), L);
    return sum * (sinc(pi * n / static_cast<double>(L)) / static_cast<double>(L));
}

HarmonicCoefficient harmonic_coefficient(const BinaryCode &code, int n)
{
    const cplx c = harmonic_value(code, n);
    HarmonicCoefficient h;
    h.order = n;
    h.magnitude = std::abs(c);
    if (h.magnitude == 0.0)
        h.phase = 0.0;
    else
    {
        h.phase = std::arg(c);
        if (h.phase <= -pi)
            h.phase = pi;
    }
    return h;
}

cplx mapped_harmonic(const BinaryCode &code, int n, const ReflectionMap &map)
{
    const cplx c = harmonic_value(code, n);
    const double delta = n == 0 ? 1.0 : 0.0;
    return map.on * c + map.off * (delta - c);
}

BinaryCode shift_code(const BinaryCode &code, long k)
{
    const long L = static_cast<long>(code.length());
    const long s = positive_mod(k, L);
    std::vector<std::uint8_t> out(code.length());
    for (long i = 0; i < L; ++i)
        out[static_cast<std::size_t>((i + s) % L)] = code.bits()[static_cast<std::size_t>(i)];
    return BinaryCode(std::move(out), code.bit_duration());
}

double phase_shift_per_bit(int n, int code_length)
{
    if (code_length < 1)
        throw std::invalid_argument("phase_shift_per_bit: code length must be >= 1");
    return 2.0 * pi * n / static_cast<double>(code_length);
}

std::vector<cplx> sample_switching_waveform(const BinaryCode &code, std::size_t samples_per_period,
                                            const ReflectionMap &map)
{
    const std::size_t L = code.length();
    if (samples_per_period < 2 * L)
        throw std::invalid_argument("sample_switching_waveform: need at least 2 samples per bit");
    std::vector<cplx> out(samples_per_period);
    // Bit index floor(i*L/N) in integers: the interval [(m-1)tau, m*tau) is left-inclusive.
    for (std::size_t i = 0; i < samples_per_period; ++i)
        out[i] = map(code.bit((i * L) / samples_per_period));
    return out;
}

CodeSchedule::CodeSchedule(BinaryCode base, std::vector<long> column_shifts) : base_(std::move(base))
{
    if (column_shifts.empty())
        throw std::invalid_argument("CodeSchedule: at least one column is required");
    const long L = static_cast<long>(base_.length());
    shifts_.reserve(column_shifts.size());
    for (long k : column_shifts)
        shifts_.push_back(static_cast<std::size_t>(positive_mod(k, L)));
}

CodeSchedule CodeSchedule::column_shifted(BinaryCode base, std::size_t num_columns)
{
    std::vector<long> shifts(num_columns);
    for (std::size_t q = 0; q < num_columns; ++q)
        shifts[q] = static_cast<long>(q);
    return CodeSchedule(std::move(base), std::move(shifts));
}

BinaryCode CodeSchedule::column_code(std::size_t column) const
{
    return shift_code(base_, static_cast<long>(shifts_.at(column)));
}

bool CodeSchedule::column_state(std::size_t column, long frame) const
{
    const long L = static_cast<long>(base_.length());
    const long idx = positive_mod(frame - static_cast<long>(shifts_[column]), L);
    return base_.bit(static_cast<std::size_t>(idx));
}

} // namespace stcloc
