#include "photorc/optics.hpp"

#include "photorc/errors.hpp"
#include "photorc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

namespace photorc {

TransmissionModel::TransmissionModel(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols,
                                     std::size_t memory_cap_bytes)
    : seed_(seed) {
    if (rows < 1 || cols < 1) {
        throw InvalidParameter("transmission matrix needs positive dimensions, got " +
                               std::to_string(rows) + "x" + std::to_string(cols));
    }
    const auto entries = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    const std::size_t bytes = entries * 2 * sizeof(double);
    if (entries / static_cast<std::size_t>(cols) != static_cast<std::size_t>(rows) ||
        bytes > memory_cap_bytes) {
        throw ResourceError("transmission matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                            " needs " + std::to_string(bytes) + " bytes, cap is " +
                            std::to_string(memory_cap_bytes));
    }
    real_.resize(rows, cols);
    imag_.resize(rows, cols);
    Rng rng(seed);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            real_(r, c) = rng.normal() * inv_sqrt2;
            imag_(r, c) = rng.normal() * inv_sqrt2;
        }
    }
}

TransmissionModel build_transmission(std::uint64_t seed, Eigen::Index n_rows_max, Eigen::Index n_cols,
                                     std::size_t memory_cap_bytes) {
    return TransmissionModel(seed, n_rows_max, n_cols, memory_cap_bytes);
}

void write_transmission_metadata(std::ostream& os, const TransmissionModel& model) {
    os << model.seed() << ' ' << model.rows() << ' ' << model.cols() << '\n';
}

TransmissionModel read_transmission_metadata(std::istream& is) {
    std::uint64_t seed = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(is >> seed >> rows >> cols)) throw FormatError("transmission metadata: expected 'seed rows cols'");
    return TransmissionModel(seed, rows, cols);
}

double LayerOptics::bias_on_fraction() const {
    if (bias_pattern.size() == 0) return 0.0;
    return static_cast<double>(bias_pattern.popcount()) / static_cast<double>(bias_pattern.size());
}

BinaryPattern make_bias_pattern(Eigen::Index width, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw InvalidParameter("bias fraction must lie in [0, 1], got " + std::to_string(fraction));
    }
    BinaryPattern p(static_cast<std::size_t>(width));
    const auto on = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(width) + 0.5));
    std::vector<std::size_t> idx(p.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    for (std::size_t k = 0; k < on; ++k) p.bits[idx[k]] = 1;
    return p;
}

LayerOptics make_layer_optics(Eigen::Index row_begin, Eigen::Index n_rows, Eigen::Index input_width,
                              Eigen::Index state_width, Eigen::Index bias_width, double bias_fraction,
                              std::uint64_t bias_seed, Eigen::Index col_offset) {
    if (n_rows < 1 || input_width < 0 || state_width < 0 || bias_width < 0 ||
        input_width + state_width + bias_width < 1) {
        throw InvalidParameter("layer optics needs at least one row and one column");
    }
    LayerOptics layer;
    layer.row_begin = row_begin;
    layer.n_rows = n_rows;
    layer.input_cols = {col_offset, input_width};
    layer.state_cols = {layer.input_cols.end(), state_width};
    layer.bias_cols = {layer.state_cols.end(), bias_width};
    layer.bias_pattern = make_bias_pattern(bias_width, bias_fraction, bias_seed);
    return layer;
}

namespace {

void check_fits(const TransmissionModel& model, const LayerOptics& layer) {
    if (layer.row_begin < 0 || layer.row_begin + layer.n_rows > model.rows() || layer.first_col() < 0 ||
        layer.first_col() + layer.width() > model.cols()) {
        throw ShapeError("layer optics rows [" + std::to_string(layer.row_begin) + ", " +
                         std::to_string(layer.row_begin + layer.n_rows) + ") / cols [" +
                         std::to_string(layer.first_col()) + ", " +
                         std::to_string(layer.first_col() + layer.width()) + ") exceed the " +
                         std::to_string(model.rows()) + "x" + std::to_string(model.cols()) + " matrix");
    }
}

void check_pattern(const BinaryPattern& pattern, const LayerOptics& layer) {
    if (static_cast<Eigen::Index>(pattern.size()) != layer.width()) {
        throw ShapeError("pattern length " + std::to_string(pattern.size()) + " does not match layer width " +
                         std::to_string(layer.width()));
    }
    const auto offset = static_cast<std::size_t>(layer.input_cols.size + layer.state_cols.size);
    if (!std::equal(layer.bias_pattern.bits.begin(), layer.bias_pattern.bits.end(),
                    pattern.bits.begin() + static_cast<std::ptrdiff_t>(offset))) {
        throw ShapeError("bias region of the pattern differs from the layer's fixed bias pattern");
    }
}

}  // namespace

std::vector<std::complex<double>> field(const BinaryPattern& pattern, const TransmissionModel& model,
                                        const LayerOptics& layer) {
    check_fits(model, layer);
    check_pattern(pattern, layer);
    Eigen::VectorXd re = Eigen::VectorXd::Zero(layer.n_rows);
    Eigen::VectorXd im = Eigen::VectorXd::Zero(layer.n_rows);
    for (std::size_t j = 0; j < pattern.size(); ++j) {
        if (!pattern.bits[j]) continue;
        const Eigen::Index col = layer.first_col() + static_cast<Eigen::Index>(j);
        re += model.real().col(col).segment(layer.row_begin, layer.n_rows);
        im += model.imag().col(col).segment(layer.row_begin, layer.n_rows);
    }
    std::vector<std::complex<double>> out(static_cast<std::size_t>(layer.n_rows));
    for (Eigen::Index k = 0; k < layer.n_rows; ++k) out[static_cast<std::size_t>(k)] = {re(k), im(k)};
    return out;
}

std::vector<double> propagate(const BinaryPattern& pattern, const TransmissionModel& model,
                              const LayerOptics& layer) {
    const auto f = field(pattern, model, layer);
    std::vector<double> out(f.size());
    std::transform(f.begin(), f.end(), out.begin(), [](std::complex<double> z) { return std::norm(z); });
    return out;
}

Eigen::MatrixXd propagate_batch(const Eigen::MatrixXd& patterns, const TransmissionModel& model,
                                const LayerOptics& layer) {
    if (patterns.rows() != layer.width()) {
        throw ShapeError("pattern batch has " + std::to_string(patterns.rows()) + " rows, layer width is " +
                         std::to_string(layer.width()));
    }
    const Eigen::Index drive = layer.input_cols.size + layer.state_cols.size;
    for (Eigen::Index b = 0; b < patterns.cols(); ++b) {
        for (Eigen::Index i = 0; i < layer.bias_cols.size; ++i) {
            if (patterns(drive + i, b) != layer.bias_pattern.bits[static_cast<std::size_t>(i)]) {
                throw ShapeError("bias region of pattern " + std::to_string(b) +
                                 " differs from the layer's fixed bias pattern");
            }
        }
    }
    return propagate_driven(patterns.topRows(drive), model, layer);
}

Eigen::MatrixXd propagate_driven(const Eigen::MatrixXd& drive, const TransmissionModel& model,
                                 const LayerOptics& layer) {
    check_fits(model, layer);
    const Eigen::Index width = layer.input_cols.size + layer.state_cols.size;
    if (drive.rows() != width) {
        throw ShapeError("drive batch has " + std::to_string(drive.rows()) + " rows, layer drive width is " +
                         std::to_string(width));
    }
    Eigen::VectorXd bias(layer.bias_cols.size);
    for (Eigen::Index i = 0; i < bias.size(); ++i) bias(i) = layer.bias_pattern.bits[static_cast<std::size_t>(i)];
    const auto r0 = layer.row_begin;
    const auto nr = layer.n_rows;
    const Eigen::VectorXd bias_re = model.real().block(r0, layer.bias_cols.begin, nr, layer.bias_cols.size) * bias;
    const Eigen::VectorXd bias_im = model.imag().block(r0, layer.bias_cols.begin, nr, layer.bias_cols.size) * bias;
    Eigen::MatrixXd re = model.real().block(r0, layer.first_col(), nr, width) * drive;
    Eigen::MatrixXd im = model.imag().block(r0, layer.first_col(), nr, width) * drive;
    re.colwise() += bias_re;
    im.colwise() += bias_im;
    return re.cwiseAbs2() + im.cwiseAbs2();
}

double percentile_value(std::vector<double> values, double percentile) {
    if (values.empty()) throw CalibrationError("percentile of an empty sample");
    if (!(percentile > 0.0 && percentile <= 100.0)) {
        throw InvalidParameter("percentile must lie in (0, 100], got " + std::to_string(percentile));
    }
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
    return values[rank - 1];
}

double calibrate_scale(const TransmissionModel& model, const LayerOptics& layer,
                       std::span<const BinaryPattern> warmup_patterns, double percentile) {
    if (warmup_patterns.size() < 32) {
        throw CalibrationError("calibration needs at least 32 warm-up patterns, got " +
                               std::to_string(warmup_patterns.size()));
    }
    if (!(percentile > 50.0 && percentile <= 100.0)) {
        throw InvalidParameter("calibration percentile must lie in (50, 100], got " + std::to_string(percentile));
    }
    std::vector<double> pooled;
    pooled.reserve(warmup_patterns.size() * static_cast<std::size_t>(layer.n_rows));
    for (const auto& p : warmup_patterns) {
        const auto intensity = propagate(p, model, layer);
        pooled.insert(pooled.end(), intensity.begin(), intensity.end());
    }
    const double scale = percentile_value(std::move(pooled), percentile);
    if (!(scale > 0.0)) throw CalibrationError("warm-up intensities are all zero (degenerate optics)");
    return scale;
}

Quantized8 detect(std::span<const double> intensity, double scale) {
    if (!(scale > 0.0)) throw InvalidParameter("detection scale must be positive");
    Quantized8 q;
    q.levels.resize(intensity.size());
    for (std::size_t k = 0; k < intensity.size(); ++k) q.levels[k] = quantize8(intensity[k] / scale);
    return q;
}

}  // namespace photorc
