#pragma once

#include "photorc/encoding.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace photorc {

/// Fixed complex Gaussian transmission matrix standing in for the diffuser.
///
/// Entries are (a + i b) / sqrt(2) with a, b standard normal, drawn from
/// Rng(seed) column by column (row index fastest, real part first). The
/// matrix is a pure function of (seed, rows, cols) and is never serialized.
class TransmissionModel {
public:
    static constexpr std::size_t kDefaultMemoryCap = std::size_t{2} << 30;

    TransmissionModel(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols,
                      std::size_t memory_cap_bytes = kDefaultMemoryCap);

    std::uint64_t seed() const { return seed_; }
    Eigen::Index rows() const { return real_.rows(); }
    Eigen::Index cols() const { return real_.cols(); }

    const Eigen::MatrixXd& real() const { return real_; }
    const Eigen::MatrixXd& imag() const { return imag_; }
    std::complex<double> at(Eigen::Index row, Eigen::Index col) const {
        return {real_(row, col), imag_(row, col)};
    }

private:
    std::uint64_t seed_;
    Eigen::MatrixXd real_;
    Eigen::MatrixXd imag_;
};

TransmissionModel build_transmission(std::uint64_t seed, Eigen::Index n_rows_max, Eigen::Index n_cols,
                                     std::size_t memory_cap_bytes = TransmissionModel::kDefaultMemoryCap);

/// Metadata-only persistence: "seed rows cols" on one line.
void write_transmission_metadata(std::ostream& os, const TransmissionModel& model);
TransmissionModel read_transmission_metadata(std::istream& is);

struct ColumnRange {
    Eigen::Index begin = 0;
    Eigen::Index size = 0;

    Eigen::Index end() const { return begin + size; }
};

/// One layer's view of the optics: which camera rows it reads and where its
/// input, state and bias regions sit on the modulator.
///
/// The pattern fed to a layer is laid out as [input | state | bias]; the
/// three column ranges are contiguous in that order starting at
/// input_cols.begin.
struct LayerOptics {
    Eigen::Index row_begin = 0;
    Eigen::Index n_rows = 0;
    ColumnRange input_cols;
    ColumnRange state_cols;
    ColumnRange bias_cols;
    BinaryPattern bias_pattern;
    double scale = 1.0;

    Eigen::Index first_col() const { return input_cols.begin; }
    Eigen::Index width() const { return input_cols.size + state_cols.size + bias_cols.size; }
    double bias_on_fraction() const;
};

/// Bias pattern with round-half-up(fraction * width) ON bits at seeded
/// pseudo-random positions.
BinaryPattern make_bias_pattern(Eigen::Index width, double fraction, std::uint64_t seed);

LayerOptics make_layer_optics(Eigen::Index row_begin, Eigen::Index n_rows, Eigen::Index input_width,
                              Eigen::Index state_width, Eigen::Index bias_width, double bias_fraction,
                              std::uint64_t bias_seed, Eigen::Index col_offset = 0);

/// Complex field on the layer's rows before detection (linear in the pattern).
std::vector<std::complex<double>> field(const BinaryPattern& pattern, const TransmissionModel& model,
                                        const LayerOptics& layer);

/// |field|^2 for one pattern.
std::vector<double> propagate(const BinaryPattern& pattern, const TransmissionModel& model,
                              const LayerOptics& layer);

/// Batched |field|^2: patterns is width x B with 0/1 entries, result is n_rows x B.
Eigen::MatrixXd propagate_batch(const Eigen::MatrixXd& patterns, const TransmissionModel& model,
                                const LayerOptics& layer);

/// propagate_batch with the bias region implied: drive holds only the input
/// and state rows of each pattern, and the layer's fixed bias field is added
/// once per call.
Eigen::MatrixXd propagate_driven(const Eigen::MatrixXd& drive, const TransmissionModel& model,
                                 const LayerOptics& layer);

/// Nearest-rank percentile of pooled values (percentile 100 is the maximum).
double percentile_value(std::vector<double> values, double percentile);

/// Exposure calibration: the given percentile of all intensities produced by
/// the warm-up patterns.
double calibrate_scale(const TransmissionModel& model, const LayerOptics& layer,
                       std::span<const BinaryPattern> warmup_patterns, double percentile = 99.0);

/// Camera model: quantize8(intensity / scale).
Quantized8 detect(std::span<const double> intensity, double scale);

}  // namespace photorc
