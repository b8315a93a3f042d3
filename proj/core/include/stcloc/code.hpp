// SPDX-License-Identifier: Apache-2.0
//
// Binary switching codes, their Fourier coefficients and column-shift schedules.

#ifndef STCLOC_CODE_HPP
#define STCLOC_CODE_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stcloc {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// Unnormalized sinc, sin(x)/x with sinc(0) = 1.
double sinc(double x);

// Complex reflection coefficient applied while a bit is 0 (off) or 1 (on).
struct ReflectionMap
{
    cplx off{0.0, 0.0};
    cplx on{1.0, 0.0};

    cplx operator()(bool bit) const { return bit ? on : off; }
    bool is_real() const { return off.imag() == 0.0 && on.imag() == 0.0; }

    static ReflectionMap on_off() { return {cplx(0.0), cplx(1.0)}; }
    // (0, pi) binary phase states.
    static ReflectionMap antipodal() { return {cplx(-1.0), cplx(1.0)}; }

    bool operator==(const ReflectionMap &) const = default;
};

/// Periodic binary switching code of L bits, each lasting `bit_duration` seconds.
///
/// One period is T0 = L * bit_duration and the modulation frequency is f0 = 1 / T0.
/// Both are always derived from the bit duration, never stored.
class BinaryCode
{
  public:
    BinaryCode(std::vector<std::uint8_t> bits, double bit_duration);

    // Parses a compact bitstring such as "0010000000000000".
    static BinaryCode from_string(std::string_view bits, double bit_duration);
    // Length-L code with exactly one bit set at zero-based `on_index`.
    static BinaryCode single_bit(std::size_t length, std::size_t on_index, double bit_duration);

    std::size_t length() const { return bits_.size(); }
    std::span<const std::uint8_t> bits() const { return bits_; }
    bool bit(std::size_t i) const { return bits_[i] != 0; }

    double bit_duration() const { return tau_; }
    double period() const { return static_cast<double>(bits_.size()) * tau_; }
    double modulation_frequency() const { return 1.0 / period(); }

    bool is_single_bit() const;
    bool is_all_zero() const;

    std::string to_string() const;

    bool operator==(const BinaryCode &) const = default;

  private:
    std::vector<std::uint8_t> bits_;
    double tau_;
};

/// Fourier coefficient of a code at order n, stored as magnitude and phase.
struct HarmonicCoefficient
{
    int order = 0;
    double magnitude = 0.0; // S_n
    double phase = 0.0;     // Theta_n in (-pi, pi]; 0 when magnitude is exactly zero

    cplx value() const { return std::polar(magnitude, phase); }
};

// Complex Fourier coefficient c_n of the 0/1 switching function of `code`.
cplx harmonic_value(const BinaryCode &code, int n);

HarmonicCoefficient harmonic_coefficient(const BinaryCode &code, int n);

// Fourier coefficient of the waveform after mapping bits through `map`:
// map.on * c_n + map.off * (delta_{n,0} - c_n).
cplx mapped_harmonic(const BinaryCode &code, int n, const ReflectionMap &map);

// Cyclic right shift by k (mod L); a shift of +1 makes every bit fire one slot later.
BinaryCode shift_code(const BinaryCode &code, long k);

// Phase advance of harmonic n per one-bit shift, 2*pi*n/L (not wrapped).
double phase_shift_per_bit(int n, int code_length);

// One period of the piecewise-constant waveform, sample i taken at t = i*T0/N.
// Throws std::invalid_argument unless samples_per_period >= 2L.
std::vector<cplx> sample_switching_waveform(const BinaryCode &code, std::size_t samples_per_period,
                                            const ReflectionMap &map = ReflectionMap::on_off());

/// Base code plus one cyclic shift per RIS column.
class CodeSchedule
{
  public:
    CodeSchedule(BinaryCode base, std::vector<long> column_shifts);

    // Column q gets shift q.
    static CodeSchedule column_shifted(BinaryCode base, std::size_t num_columns);

    const BinaryCode &base_code() const { return base_; }
    std::size_t num_columns() const { return shifts_.size(); }
    std::size_t code_length() const { return base_.length(); }
    // Shift of column q reduced to [0, L).
    std::size_t shift(std::size_t column) const { return shifts_[column]; }
    BinaryCode column_code(std::size_t column) const;

    // Bit driving column q during frame (bit slot) `frame`.
    bool column_state(std::size_t column, long frame) const;

  private:
    BinaryCode base_;
    std::vector<std::size_t> shifts_;
};

} // namespace stcloc

#endif
