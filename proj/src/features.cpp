#include "photorc/features.hpp"

#include "photorc/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace photorc {

Eigen::Index hog_length(Eigen::Index rows, Eigen::Index cols, const HogParams& p) {
    if (p.cell_size < 1 || p.block_size < 1 || p.n_orientations < 1) {
        throw InvalidParameter("HOG parameters must be positive");
    }
    if (rows % p.cell_size != 0 || cols % p.cell_size != 0) {
        throw ShapeError("image " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " does not tile into cells of " + std::to_string(p.cell_size));
    }
    const Eigen::Index cy = rows / p.cell_size;
    const Eigen::Index cx = cols / p.cell_size;
    const Eigen::Index by = cy - p.block_size + 1;
    const Eigen::Index bx = cx - p.block_size + 1;
    if (by < 1 || bx < 1) throw ShapeError("HOG block grid is empty for this image size");
    return by * bx * p.block_size * p.block_size * p.n_orientations;
}

Eigen::VectorXd hog(const Eigen::MatrixXd& image, const HogParams& p) {
    const Eigen::Index rows = image.rows();
    const Eigen::Index cols = image.cols();
    const Eigen::Index length = hog_length(rows, cols, p);
    const Eigen::Index cy = rows / p.cell_size;
    const Eigen::Index cx = cols / p.cell_size;
    const int nb = p.n_orientations;
    const double range = p.signed_orientation ? 360.0 : 180.0;
    const double bin_width = range / nb;

    auto px = [&](Eigen::Index r, Eigen::Index c) {
        return (r < 0 || c < 0 || r >= rows || c >= cols) ? 0.0 : image(r, c);
    };

    // cell histograms, indexed [(cell_row * cx + cell_col) * nb + bin]
    std::vector<double> cells(static_cast<std::size_t>(cy * cx * nb), 0.0);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double gx = px(r, c + 1) - px(r, c - 1);
            const double gy = px(r + 1, c) - px(r - 1, c);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            double theta = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
            theta = std::fmod(theta, range);
            if (theta < 0.0) theta += range;
            if (theta >= range) theta -= range;
            const double pos = theta / bin_width;
            const double lower = std::floor(pos);
            const double frac = pos - lower;
            const int b0 = static_cast<int>(lower) % nb;
            const int b1 = (b0 + 1) % nb;
            const std::size_t base = static_cast<std::size_t>(((r / p.cell_size) * cx + c / p.cell_size) * nb);
            cells[base + static_cast<std::size_t>(b0)] += mag * (1.0 - frac);
            cells[base + static_cast<std::size_t>(b1)] += mag * frac;
        }
    }

    Eigen::VectorXd out(length);
    Eigen::Index pos = 0;
    const int bs = p.block_size;
    for (Eigen::Index by = 0; by + bs <= cy; ++by) {
        for (Eigen::Index bx = 0; bx + bs <= cx; ++bx) {
            const Eigen::Index start = pos;
            double sq = 0.0;
            for (int dy = 0; dy < bs; ++dy) {
                for (int dx = 0; dx < bs; ++dx) {
                    const std::size_t base = static_cast<std::size_t>(((by + dy) * cx + (bx + dx)) * nb);
                    for (int b = 0; b < nb; ++b) {
                        const double v = cells[base + static_cast<std::size_t>(b)];
                        out(pos++) = v;
                        sq += v * v;
                    }
                }
            }
            out.segment(start, pos - start) /= std::sqrt(sq + p.epsilon * p.epsilon);
        }
    }
    return out;
}

PcaModel pca_fit(const Eigen::MatrixXd& samples, int k) {
    const Eigen::Index n = samples.rows();
    const Eigen::Index d = samples.cols();
    if (k < 1 || k > std::min(n, d)) {
        throw InvalidParameter("PCA with " + std::to_string(k) + " components needs k <= min(samples, dims) = " +
                               std::to_string(std::min(n, d)));
    }
    PcaModel m;
    m.mean = samples.colwise().mean().transpose();
    const Eigen::MatrixXd centered = samples.rowwise() - m.mean.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    m.components = svd.matrixV().leftCols(k).transpose();
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::Index arg = 0;
        m.components.row(i).cwiseAbs().maxCoeff(&arg);
        if (m.components(i, arg) < 0.0) m.components.row(i) *= -1.0;
    }
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    m.explained_variance = svd.singularValues().head(k).array().square() / denom;
    return m;
}

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& x) {
    if (!model.fitted()) throw StateError("PCA model is not fitted");
    if (x.size() != model.mean.size()) throw ShapeError("PCA input dimension mismatch");
    return model.components * (x - model.mean);
}

Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& projected) {
    if (!model.fitted()) throw StateError("PCA model is not fitted");
    return model.components.transpose() * projected + model.mean;
}

MinMaxBounds fit_bounds(const Eigen::MatrixXd& samples) {
    if (samples.rows() == 0) throw InvalidParameter("cannot fit bounds on zero samples");
    return {samples.colwise().minCoeff().transpose(), samples.colwise().maxCoeff().transpose()};
}

Eigen::VectorXd scale_clip(const Eigen::VectorXd& x, const MinMaxBounds& b) {
    if (!b.fitted()) throw StateError("scaling bounds are not fitted");
    if (x.size() != b.lo.size()) throw ShapeError("scaling input dimension mismatch");
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double span = b.hi(i) - b.lo(i);
        out(i) = span > 0.0 ? std::clamp((x(i) - b.lo(i)) / span, 0.0, 1.0) : 0.0;
    }
    return out;
}

MinMaxBounds fit_sequence_bounds(std::span<const SequenceSample* const> samples) {
    Eigen::Index dim = -1;
    MinMaxBounds b;
    for (const auto* s : samples) {
        for (const auto& f : s->frames) {
            if (dim < 0) {
                dim = f.size();
                b.lo = f;
                b.hi = f;
                continue;
            }
            if (f.size() != dim) throw ShapeError("frames of differing dimension in the training split");
            b.lo = b.lo.cwiseMin(f);
            b.hi = b.hi.cwiseMax(f);
        }
    }
    if (dim < 0) throw InvalidParameter("cannot fit bounds on zero frames");
    return b;
}

SequenceSample normalize_sequence(const SequenceSample& sample, const MinMaxBounds& bounds,
                                  const NormalizeOptions& options) {
    if (sample.frames.empty()) throw InvalidParameter("sequence '" + sample.source_id + "' has no frames");
    SequenceSample out;
    out.label = sample.label;
    out.source_id = sample.source_id;
    out.group = sample.group;
    if (options.ti46) {
        for (const auto& f : sample.frames) {
            if (f.size() != options.ti46_channels) {
                throw FormatError("cochleagram '" + sample.source_id + "' has " + std::to_string(f.size()) +
                                  " channels, expected " + std::to_string(options.ti46_channels));
            }
        }
        if (static_cast<int>(sample.frames.size()) > options.ti46_steps) {
            throw FormatError("cochleagram '" + sample.source_id + "' has " + std::to_string(sample.frames.size()) +
                              " steps, more than the padded length " + std::to_string(options.ti46_steps));
        }
    }
    for (const auto& f : sample.frames) out.frames.push_back(scale_clip(f, bounds));
    if (options.ti46) {
        while (static_cast<int>(out.frames.size()) < options.ti46_steps) {
            out.frames.push_back(Eigen::VectorXd::Zero(options.ti46_channels));
        }
    }
    return out;
}

Eigen::MatrixXd mnist_strip(const Eigen::MatrixXd& image, int strip) {
    if (image.rows() != kMnistSide || image.cols() != kMnistSide) throw ShapeError("MNIST images are 28x28");
    if (strip < 0 || strip >= kMnistStrips) throw InvalidParameter("strip index out of range");
    return image.middleCols(strip * kMnistStripWidth, kMnistStripWidth);
}

SequenceSample mnist_sequence(const Eigen::MatrixXd& image, const HogParams& hog_params, const PcaModel& pca,
                              const MinMaxBounds& bounds) {
    if (!pca.fitted()) throw StateError("MNIST sequence needs a fitted PCA model");
    SequenceSample s;
    for (int k = 0; k < kMnistStrips; ++k) {
        s.frames.push_back(scale_clip(pca_transform(pca, hog(mnist_strip(image, k), hog_params)), bounds));
    }
    return s;
}

void MnistPipeline::fit(const ImageSource& image_at, std::span<const std::size_t> train) {
    if (train.empty()) throw InvalidParameter("MNIST pipeline needs training images");
    const Eigen::Index len = hog_length(kMnistSide, kMnistStripWidth, options_.hog);
    const auto n = static_cast<Eigen::Index>(train.size());
    std::array<Eigen::MatrixXd, kMnistStrips> descriptors;
    for (auto& d : descriptors) d.resize(n, len);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::MatrixXd img = image_at(train[static_cast<std::size_t>(i)]);
        for (int k = 0; k < kMnistStrips; ++k) descriptors[k].row(i) = hog(mnist_strip(img, k), options_.hog).transpose();
    }
    pca_.clear();
    bounds_.clear();
    if (options_.per_position) {
        for (int k = 0; k < kMnistStrips; ++k) {
            pca_.push_back(pca_fit(descriptors[k], options_.components));
            Eigen::MatrixXd projected = (descriptors[k].rowwise() - pca_.back().mean.transpose()) *
                                        pca_.back().components.transpose();
            bounds_.push_back(fit_bounds(projected));
        }
        return;
    }
    Eigen::MatrixXd pooled(n * kMnistStrips, len);
    for (int k = 0; k < kMnistStrips; ++k) pooled.middleRows(k * n, n) = descriptors[k];
    pca_.push_back(pca_fit(pooled, options_.components));
    const Eigen::MatrixXd projected =
        (pooled.rowwise() - pca_.back().mean.transpose()) * pca_.back().components.transpose();
    bounds_.push_back(fit_bounds(projected));
}

const PcaModel& MnistPipeline::pca(int strip) const {
    if (!fitted()) throw StateError("MNIST pipeline is not fitted");
    return pca_.size() == 1 ? pca_.front() : pca_.at(static_cast<std::size_t>(strip));
}

const MinMaxBounds& MnistPipeline::bounds(int strip) const {
    if (!fitted()) throw StateError("MNIST pipeline is not fitted");
    return bounds_.size() == 1 ? bounds_.front() : bounds_.at(static_cast<std::size_t>(strip));
}

SequenceSample MnistPipeline::sequence(const Eigen::MatrixXd& image) const {
    if (!fitted()) throw StateError("MNIST pipeline is not fitted");
    SequenceSample s;
    for (int k = 0; k < kMnistStrips; ++k) {
        s.frames.push_back(scale_clip(pca_transform(pca(k), hog(mnist_strip(image, k), options_.hog)), bounds(k)));
    }
    return s;
}

}  // namespace photorc
