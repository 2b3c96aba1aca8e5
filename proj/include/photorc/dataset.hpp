#pragma once

#include "photorc/features.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace photorc {

/// Images from an IDX3 file, pixels kept as raw bytes.
struct IdxImages {
    int count = 0;
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> pixels;

    /// Image i with pixels scaled to [0, 1] by / 255.
    Eigen::MatrixXd image(std::size_t i) const;
};

/// IDX parsing: big-endian 32-bit magic (2051 images, 2049 labels), then
/// the dimension words, then unsigned bytes.
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes, const std::string& name = "images");
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes, const std::string& name = "labels");
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<int> read_idx_labels(const std::filesystem::path& path);
void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, std::span<const int> labels);

/// MNIST pool: the 60000 training images followed by the 10000 test images.
struct MnistData {
    IdxImages images;
    std::vector<int> labels;
    std::size_t train_count = 0;

    std::size_t size() const { return labels.size(); }
};

MnistData load_mnist(const std::filesystem::path& dir);

/// Directory named by PHOTORC_DATA_ROOT, or empty.
std::filesystem::path data_root();

/// Relative paths resolve against data_root() when it is set.
std::filesystem::path resolve_data_path(const std::string& path);

/// Generic sequence dataset.
///
/// manifest.csv starts with the header line
///     sample_file,label,source_id,split_group
/// and lists one sample per line; sample_file is relative to the manifest.
/// Each sample file holds comma-separated rows, one row per time step and
/// one column per feature.
std::vector<SequenceSample> load_sequence_dataset(const std::filesystem::path& manifest);
void write_sequence_dataset(const std::filesystem::path& dir, std::span<const SequenceSample> samples);

Sequence read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Sequence& frames);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace photorc
