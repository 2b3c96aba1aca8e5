#pragma once

// Reference HOG for tests: votes are spread with a circular triangular
// kernel over bin centers instead of the floor/fraction split.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace oracle {

inline Eigen::VectorXd hog_reference(const Eigen::MatrixXd& img, int cell, int block, int bins, bool is_signed,
                                     double eps) {
    const double range = is_signed ? 360.0 : 180.0;
    const double w = range / bins;
    const int rows = static_cast<int>(img.rows());
    const int cols = static_cast<int>(img.cols());
    const int cy = rows / cell;
    const int cx = cols / cell;
    auto at = [&](int r, int c) { return (r < 0 || c < 0 || r >= rows || c >= cols) ? 0.0 : img(r, c); };

    Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(cy * cx, bins);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double gx = at(r, c + 1) - at(r, c - 1);
            const double gy = at(r + 1, c) - at(r - 1, c);
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
            while (deg < 0.0) deg += range;
            while (deg >= range) deg -= range;
            for (int b = 0; b < bins; ++b) {
                double d = std::abs(deg - b * w);
                d = std::min(d, range - d);
                const double k = 1.0 - d / w;
                if (k > 0.0) hist((r / cell) * cx + c / cell, b) += mag * k;
            }
        }
    }

    Eigen::VectorXd out((cy - block + 1) * (cx - block + 1) * block * block * bins);
    int pos = 0;
    for (int by = 0; by + block <= cy; ++by) {
        for (int bx = 0; bx + block <= cx; ++bx) {
            Eigen::VectorXd v(block * block * bins);
            int k = 0;
            for (int dy = 0; dy < block; ++dy) {
                for (int dx = 0; dx < block; ++dx) {
                    for (int b = 0; b < bins; ++b) v(k++) = hist((by + dy) * cx + bx + dx, b);
                }
            }
            out.segment(pos, v.size()) = v / std::sqrt(v.squaredNorm() + eps * eps);
            pos += static_cast<int>(v.size());
        }
    }
    return out;
}

}  // namespace oracle
