#include "photorc/encoding.hpp"

#include "photorc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace photorc {

std::size_t BinaryPattern::popcount() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::size_t hamming_distance(const BinaryPattern& a, const BinaryPattern& b) {
    if (a.size() != b.size()) {
        throw ShapeError("hamming_distance: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " differ");
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a.bits[i] != b.bits[i]);
    return d;
}

BasketCodec::BasketCodec(int n_bin) : n_bin_(n_bin) {
    if (n_bin < 2) {
        throw InvalidParameter("basket codec needs n_bin >= 2, got " + std::to_string(n_bin));
    }
    const std::int64_t n = n_bin;
    const std::int64_t h = n / 2;
    half_width_ = static_cast<double>(2 * h - 1) / static_cast<double>(4 * n);
    centers_.resize(n_bin);
    lower_num_.resize(n_bin);
    upper_num_.resize(n_bin);
    for (std::int64_t i = 1; i <= n; ++i) {
        centers_[i - 1] = static_cast<double>(2 * i - 1) / static_cast<double>(2 * n);
        // c_i -+ s over 4n: 2(2i - 1) -+ (2h - 1)
        lower_num_[i - 1] = 4 * i - 2 - (2 * h - 1);
        upper_num_[i - 1] = 4 * i - 2 + (2 * h - 1);
    }
    level_table_.resize(256 * static_cast<std::size_t>(n_bin));
    const std::int64_t den = 4 * n;
    for (std::int64_t level = 0; level < 256; ++level) {
        // level / 255 in [lo / den, hi / den]  <=>  den * level in [255 lo, 255 hi]
        for (int i = 0; i < n_bin; ++i) {
            const bool on = den * level >= 255 * lower_num_[i] && den * level <= 255 * upper_num_[i];
            level_table_[static_cast<std::size_t>(level) * n_bin + i] = on ? 1 : 0;
        }
    }
}

BasketCodec make_codec(int n_bin) { return BasketCodec(n_bin); }

void encode_scalar_into(double x, const BasketCodec& codec, std::span<std::uint8_t> out) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("basket encoding is defined on [0, 1], got " + std::to_string(x));
    }
    // Dequantized 8-bit values take the exact integer path.
    const double scaled = x * 255.0;
    const double rounded = std::nearbyint(scaled);
    if (scaled == rounded && rounded / 255.0 == x) {
        const auto bits = codec.level_bits(static_cast<std::uint8_t>(rounded));
        std::copy(bits.begin(), bits.end(), out.begin());
        return;
    }
    const double pos = x * static_cast<double>(codec.denominator());
    for (int i = 0; i < codec.n_bin(); ++i) {
        out[i] = (pos >= static_cast<double>(codec.lower_numerator(i)) &&
                  pos <= static_cast<double>(codec.upper_numerator(i)))
                     ? 1
                     : 0;
    }
}

BinaryPattern encode_scalar(double x, const BasketCodec& codec) {
    BinaryPattern p(static_cast<std::size_t>(codec.n_bin()));
    encode_scalar_into(x, codec, p.bits);
    return p;
}

BinaryPattern encode_vector(std::span<const double> v, const BasketCodec& codec) {
    const auto nb = static_cast<std::size_t>(codec.n_bin());
    BinaryPattern p(v.size() * nb);
    for (std::size_t k = 0; k < v.size(); ++k) {
        try {
            encode_scalar_into(v[k], codec, std::span(p.bits).subspan(k * nb, nb));
        } catch (const DomainError& e) {
            throw DomainError("component " + std::to_string(k) + ": " + e.what());
        }
    }
    return p;
}

BinaryPattern encode_levels(const Quantized8& q, const BasketCodec& codec) {
    const auto nb = static_cast<std::size_t>(codec.n_bin());
    BinaryPattern p(q.size() * nb);
    for (std::size_t k = 0; k < q.size(); ++k) {
        const auto bits = codec.level_bits(q.levels[k]);
        std::copy(bits.begin(), bits.end(), p.bits.begin() + static_cast<std::ptrdiff_t>(k * nb));
    }
    return p;
}

std::uint8_t quantize8(double v) {
    if (!(v > 0.0)) return 0;  // also catches NaN
    if (v >= 1.0) return 255;
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

Quantized8 quantize8(std::span<const double> v) {
    Quantized8 q;
    q.levels.resize(v.size());
    std::transform(v.begin(), v.end(), q.levels.begin(), [](double x) { return quantize8(x); });
    return q;
}

std::vector<double> dequantize8(const Quantized8& q) {
    std::vector<double> out(q.size());
    std::transform(q.levels.begin(), q.levels.end(), out.begin(),
                   [](std::uint8_t l) { return dequantize8(l); });
    return out;
}

}  // namespace photorc
