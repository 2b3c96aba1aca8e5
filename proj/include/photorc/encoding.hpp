#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace photorc {

/// Ordered sequence of ON/OFF bits, one byte per bit.
struct BinaryPattern {
    std::vector<std::uint8_t> bits;

    BinaryPattern() = default;
    explicit BinaryPattern(std::size_t length) : bits(length, 0) {}
    explicit BinaryPattern(std::vector<std::uint8_t> b) : bits(std::move(b)) {}

    std::size_t size() const { return bits.size(); }
    std::size_t popcount() const;
    bool operator==(const BinaryPattern&) const = default;
};

std::size_t hamming_distance(const BinaryPattern& a, const BinaryPattern& b);

/// 8-bit intensity levels; level k stands for the real value k / 255.
struct Quantized8 {
    std::vector<std::uint8_t> levels;

    std::size_t size() const { return levels.size(); }
    bool operator==(const Quantized8&) const = default;
};

/// Scalar-to-binary basket encoder.
///
/// Bit i (0-based) is ON when x lies in the closed window
/// [c_i - s, c_i + s] with c_i = (2i + 1) / (2 n_bin) and
/// s = (2 floor(n_bin / 2) - 1) / (4 n_bin). Both window edges are stored as
/// integer numerators over the common denominator 4 n_bin so that 8-bit
/// levels can be tested exactly.
class BasketCodec {
public:
    explicit BasketCodec(int n_bin);

    int n_bin() const { return n_bin_; }
    const std::vector<double>& centers() const { return centers_; }
    double half_width() const { return half_width_; }

    /// Window edges as numerators over denominator().
    std::int64_t lower_numerator(int i) const { return lower_num_[i]; }
    std::int64_t upper_numerator(int i) const { return upper_num_[i]; }
    std::int64_t denominator() const { return 4 * static_cast<std::int64_t>(n_bin_); }

    /// Bits for an 8-bit level, tested in exact integer arithmetic.
    std::span<const std::uint8_t> level_bits(std::uint8_t level) const {
        return {level_table_.data() + static_cast<std::size_t>(level) * n_bin_,
                static_cast<std::size_t>(n_bin_)};
    }

private:
    int n_bin_;
    std::vector<double> centers_;
    double half_width_;
    std::vector<std::int64_t> lower_num_;
    std::vector<std::int64_t> upper_num_;
    std::vector<std::uint8_t> level_table_;
};

BasketCodec make_codec(int n_bin);

/// Encodes x in [0, 1]; values outside the range raise DomainError.
BinaryPattern encode_scalar(double x, const BasketCodec& codec);

/// Writes the n_bin bits of x into out (no allocation).
void encode_scalar_into(double x, const BasketCodec& codec, std::span<std::uint8_t> out);

BinaryPattern encode_vector(std::span<const double> v, const BasketCodec& codec);

/// Encoding of the dequantized levels, exact at window edges.
BinaryPattern encode_levels(const Quantized8& q, const BasketCodec& codec);

/// Round-half-up quantization after clipping to [0, 1]; NaN maps to 0.
std::uint8_t quantize8(double v);
Quantized8 quantize8(std::span<const double> v);

inline double dequantize8(std::uint8_t level) { return level / 255.0; }
std::vector<double> dequantize8(const Quantized8& q);

}  // namespace photorc
