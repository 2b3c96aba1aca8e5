#pragma once

#include "photorc/reservoir.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace photorc {

struct HogParams {
    int cell_size = 7;
    int block_size = 1;
    int n_orientations = 9;
    bool signed_orientation = false;
    double epsilon = 1e-6;
};

/// Descriptor length for an image of the given size; raises ShapeError when
/// the image does not tile into cells or the block grid is empty.
Eigen::Index hog_length(Eigen::Index rows, Eigen::Index cols, const HogParams& params);

/// Histogram of oriented gradients.
///
/// Centered [-1, 0, 1] gradients with zero padding; orientations in
/// [0, 180) (or [0, 360) when signed) with bin b centered at b * width and
/// linear vote splitting between the two nearest bins (wrapping around);
/// magnitude-weighted cell histograms; blocks of block_size^2 cells at a
/// one-cell stride, each scaled by 1 / sqrt(|v|^2 + eps^2); blocks
/// concatenated row-major.
Eigen::VectorXd hog(const Eigen::MatrixXd& image, const HogParams& params);

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // k x d, orthonormal rows
    Eigen::VectorXd explained_variance;

    int k() const { return static_cast<int>(components.rows()); }
    bool fitted() const { return components.rows() > 0; }
};

/// Thin SVD of the mean-centered rows of samples (one sample per row).
/// Component signs are fixed so that each component's largest-magnitude
/// entry is positive.
PcaModel pca_fit(const Eigen::MatrixXd& samples, int k);
Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& projected);

/// Per-feature min-max bounds.
struct MinMaxBounds {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    bool fitted() const { return lo.size() > 0; }
};

/// Bounds over the rows of samples.
MinMaxBounds fit_bounds(const Eigen::MatrixXd& samples);

/// (x - lo) / (hi - lo) clipped to [0, 1]; zero-span features map to 0.
Eigen::VectorXd scale_clip(const Eigen::VectorXd& x, const MinMaxBounds& bounds);

struct SequenceSample {
    Sequence frames;
    int label = 0;
    std::string source_id;
    int group = 0;
};

struct NormalizeOptions {
    bool ti46 = false;
    int ti46_channels = 86;
    int ti46_steps = 130;
};

/// Bounds over every frame of the given samples.
MinMaxBounds fit_sequence_bounds(std::span<const SequenceSample* const> samples);

/// Min-max scales each frame. In TI-46 mode the frame width must equal
/// ti46_channels and the sequence is zero-padded to ti46_steps frames.
SequenceSample normalize_sequence(const SequenceSample& sample, const MinMaxBounds& bounds,
                                  const NormalizeOptions& options = {});

/// The four 7-column strips of a 28 x 28 digit: [0,7), [7,14), [14,21), [21,28).
constexpr int kMnistSide = 28;
constexpr int kMnistStrips = 4;
constexpr int kMnistStripWidth = 7;

Eigen::MatrixXd mnist_strip(const Eigen::MatrixXd& image, int strip);

/// One digit as four frames: strip -> HOG -> PCA -> min-max scaling.
SequenceSample mnist_sequence(const Eigen::MatrixXd& image, const HogParams& hog_params, const PcaModel& pca,
                              const MinMaxBounds& bounds);

/// MNIST preprocessing fitted on a training split.
///
/// With pooled fitting a single PCA model and a single set of bounds cover
/// all strip positions; per-position fitting keeps one of each per strip.
class MnistPipeline {
public:
    struct Options {
        HogParams hog;
        int components = 25;
        bool per_position = false;
    };

    using ImageSource = std::function<Eigen::MatrixXd(std::size_t)>;

    MnistPipeline() = default;
    explicit MnistPipeline(Options options) : options_(options) {}

    /// Fits on images image_at(i) for every i in train.
    void fit(const ImageSource& image_at, std::span<const std::size_t> train);

    bool fitted() const { return !pca_.empty(); }
    SequenceSample sequence(const Eigen::MatrixXd& image) const;

    const Options& options() const { return options_; }
    const PcaModel& pca(int strip) const;
    const MinMaxBounds& bounds(int strip) const;

private:
    Options options_;
    std::vector<PcaModel> pca_;
    std::vector<MinMaxBounds> bounds_;
};

}  // namespace photorc
