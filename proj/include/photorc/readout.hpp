#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

namespace photorc {

/// Readout training data: one column per sample.
struct DesignMatrix {
    Eigen::MatrixXd states;   // N_X x T
    Eigen::MatrixXd targets;  // N_Y x T, one-hot columns

    Eigen::Index samples() const { return states.cols(); }
};

/// Builds one-hot targets; labels are class indices in [0, n_classes).
DesignMatrix make_design(Eigen::MatrixXd states, std::span<const int> labels, int n_classes);

/// Class index of every target column.
std::vector<int> target_classes(const DesignMatrix& d);

struct ReadoutModel {
    Eigen::MatrixXd weights;  // N_Y x N_X
    double lambda = 0.0;
    std::vector<int> class_labels;
    // Standardization fitted on the training columns; empty when disabled.
    bool standardized = false;
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_scale;
    Eigen::VectorXd target_offset;

    /// Raw output scores for a batch of state columns.
    Eigen::MatrixXd outputs(const Eigen::MatrixXd& states) const;
};

/// Sufficient statistics of a ridge problem; fold statistics subtract.
struct RidgeStats {
    Eigen::MatrixXd gram;   // sum x x^T
    Eigen::MatrixXd cross;  // sum x y^T
    Eigen::VectorXd x_sum;
    Eigen::VectorXd y_sum;
    double count = 0.0;

    static RidgeStats of(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets);
    RidgeStats& operator-=(const RidgeStats& other);
    RidgeStats& operator+=(const RidgeStats& other);
};

/// Normal equations of one ridge problem, ready to be solved for many lambdas.
class RidgeSystem {
public:
    RidgeSystem(const RidgeStats& stats, bool standardize);

    /// W = C^T (A + lambda I)^-1 via a Cholesky solve. Raises IllConditioned
    /// when the system cannot be factorized.
    ReadoutModel solve(double lambda, std::vector<int> class_labels) const;

private:
    Eigen::MatrixXd lhs_;  // A
    Eigen::MatrixXd rhs_;  // C, N_X x N_Y
    bool standardize_;
    Eigen::VectorXd mean_;
    Eigen::VectorXd scale_;
    Eigen::VectorXd offset_;
};

/// Closed-form ridge: W = Y R^T (R R^T + lambda I)^-1.
ReadoutModel train_ridge(const DesignMatrix& d, double lambda, bool standardize = false);

/// Ridge objective ||W R - Y||_F^2 + lambda ||W||_F^2.
double ridge_objective(const Eigen::MatrixXd& w, const DesignMatrix& d, double lambda);

/// Max-abs residual of the normal equations W (R R^T + lambda I) - Y R^T.
double stationarity_residual(const Eigen::MatrixXd& w, const DesignMatrix& d, double lambda);

/// Class index with the largest output; ties go to the lowest index.
int argmax_class(const Eigen::Ref<const Eigen::VectorXd>& scores);

/// Predicted class label for one state vector.
int predict(const ReadoutModel& model, const Eigen::VectorXd& state);

struct ConfusionMatrix {
    Eigen::MatrixXi counts;  // rows: true class, cols: predicted class

    long total() const { return counts.cast<long>().sum(); }
    long trace() const { return counts.cast<long>().trace(); }
    double accuracy() const { return total() ? static_cast<double>(trace()) / static_cast<double>(total()) : 0.0; }
};

struct Score {
    double accuracy = 0.0;
    ConfusionMatrix confusion;
};

Score score(const ReadoutModel& model, const DesignMatrix& d);

struct LambdaSelection {
    double lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_accuracy;
};

/// k-fold search (column j in fold j mod k) over an ascending positive grid;
/// ties go to the larger lambda.
LambdaSelection select_lambda(const DesignMatrix& d, std::span<const double> grid, int folds,
                              bool standardize = false);

/// points values log-spaced between lo and hi inclusive.
std::vector<double> log_grid(double lo, double hi, int points);

/// Text artifact with hexadecimal floats, so the round trip is bit-exact.
void save_readout(std::ostream& os, const ReadoutModel& model);
ReadoutModel load_readout(std::istream& is);

}  // namespace photorc
