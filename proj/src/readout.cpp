#include "photorc/readout.hpp"

#include "photorc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace photorc {

DesignMatrix make_design(Eigen::MatrixXd states, std::span<const int> labels, int n_classes) {
    if (n_classes < 1) throw InvalidParameter("need at least one class");
    if (static_cast<Eigen::Index>(labels.size()) != states.cols()) {
        throw ShapeError("design has " + std::to_string(states.cols()) + " state columns but " +
                         std::to_string(labels.size()) + " labels");
    }
    DesignMatrix d;
    d.targets = Eigen::MatrixXd::Zero(n_classes, states.cols());
    for (std::size_t t = 0; t < labels.size(); ++t) {
        if (labels[t] < 0 || labels[t] >= n_classes) {
            throw InvalidParameter("label " + std::to_string(labels[t]) + " outside [0, " + std::to_string(n_classes) + ")");
        }
        d.targets(labels[t], static_cast<Eigen::Index>(t)) = 1.0;
    }
    d.states = std::move(states);
    return d;
}

std::vector<int> target_classes(const DesignMatrix& d) {
    std::vector<int> out(static_cast<std::size_t>(d.targets.cols()));
    for (Eigen::Index t = 0; t < d.targets.cols(); ++t) out[static_cast<std::size_t>(t)] = argmax_class(d.targets.col(t));
    return out;
}

Eigen::MatrixXd ReadoutModel::outputs(const Eigen::MatrixXd& states) const {
    if (states.rows() != weights.cols()) {
        throw ShapeError("state dimension " + std::to_string(states.rows()) + " does not match readout input " +
                         std::to_string(weights.cols()));
    }
    if (!standardized) return weights * states;
    const Eigen::MatrixXd z =
        (states.colwise() - feature_mean).array().colwise() / feature_scale.array();
    return (weights * z).colwise() + target_offset;
}

RidgeStats RidgeStats::of(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets) {
    RidgeStats s;
    const auto n = states.rows();
    s.gram = Eigen::MatrixXd::Zero(n, n);
    s.gram.selfadjointView<Eigen::Lower>().rankUpdate(states);
    s.gram.triangularView<Eigen::StrictlyUpper>() = s.gram.transpose();
    s.cross = states * targets.transpose();
    s.x_sum = states.rowwise().sum();
    s.y_sum = targets.rowwise().sum();
    s.count = static_cast<double>(states.cols());
    return s;
}

RidgeStats& RidgeStats::operator-=(const RidgeStats& other) {
    gram -= other.gram;
    cross -= other.cross;
    x_sum -= other.x_sum;
    y_sum -= other.y_sum;
    count -= other.count;
    return *this;
}

RidgeStats& RidgeStats::operator+=(const RidgeStats& other) {
    gram += other.gram;
    cross += other.cross;
    x_sum += other.x_sum;
    y_sum += other.y_sum;
    count += other.count;
    return *this;
}

RidgeSystem::RidgeSystem(const RidgeStats& stats, bool standardize) : standardize_(standardize) {
    if (stats.count < 1.0) throw InvalidParameter("ridge regression needs at least one sample");
    if (!standardize) {
        lhs_ = stats.gram;
        rhs_ = stats.cross;
        return;
    }
    // Centered second moments from the raw sums, then per-feature scaling.
    const double n = stats.count;
    mean_ = stats.x_sum / n;
    offset_ = stats.y_sum / n;
    lhs_ = stats.gram - n * mean_ * mean_.transpose();
    rhs_ = stats.cross - n * mean_ * offset_.transpose();
    scale_.resize(mean_.size());
    for (Eigen::Index i = 0; i < mean_.size(); ++i) {
        const double var = lhs_(i, i) / n;
        scale_(i) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    const Eigen::VectorXd inv = scale_.cwiseInverse();
    lhs_ = inv.asDiagonal() * lhs_ * inv.asDiagonal();
    rhs_ = inv.asDiagonal() * rhs_;
}

ReadoutModel RidgeSystem::solve(double lambda, std::vector<int> class_labels) const {
    if (!(lambda >= 0.0)) throw InvalidParameter("ridge lambda must be non-negative");
    Eigen::MatrixXd a = lhs_;
    a.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success || (lambda == 0.0 && llt.rcond() < 1e-13)) {
        throw IllConditioned("ridge system is singular or ill-conditioned at lambda = " + std::to_string(lambda));
    }
    ReadoutModel m;
    m.weights = llt.solve(rhs_).transpose();
    m.lambda = lambda;
    if (class_labels.empty()) {
        for (Eigen::Index c = 0; c < m.weights.rows(); ++c) class_labels.push_back(static_cast<int>(c));
    }
    m.class_labels = std::move(class_labels);
    if (standardize_) {
        m.standardized = true;
        m.feature_mean = mean_;
        m.feature_scale = scale_;
        m.target_offset = offset_;
    }
    return m;
}

ReadoutModel train_ridge(const DesignMatrix& d, double lambda, bool standardize) {
    if (d.states.cols() != d.targets.cols()) throw ShapeError("states and targets disagree on sample count");
    return RidgeSystem(RidgeStats::of(d.states, d.targets), standardize).solve(lambda, {});
}

double ridge_objective(const Eigen::MatrixXd& w, const DesignMatrix& d, double lambda) {
    return (w * d.states - d.targets).squaredNorm() + lambda * w.squaredNorm();
}

double stationarity_residual(const Eigen::MatrixXd& w, const DesignMatrix& d, double lambda) {
    Eigen::MatrixXd a = d.states * d.states.transpose();
    a.diagonal().array() += lambda;
    return (w * a - d.targets * d.states.transpose()).cwiseAbs().maxCoeff();
}

int argmax_class(const Eigen::Ref<const Eigen::VectorXd>& scores) {
    if (scores.size() == 0) throw ShapeError("argmax of an empty score vector");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i) {
        if (scores(i) > scores(best)) best = i;
    }
    return static_cast<int>(best);
}

int predict(const ReadoutModel& model, const Eigen::VectorXd& state) {
    const Eigen::VectorXd y = model.outputs(state);
    return model.class_labels.at(static_cast<std::size_t>(argmax_class(y)));
}

Score score(const ReadoutModel& model, const DesignMatrix& d) {
    const auto n_classes = static_cast<int>(model.weights.rows());
    if (d.targets.rows() != n_classes) throw ShapeError("target classes do not match the readout outputs");
    const Eigen::MatrixXd y = model.outputs(d.states);
    Score s;
    s.confusion.counts = Eigen::MatrixXi::Zero(n_classes, n_classes);
    for (Eigen::Index t = 0; t < y.cols(); ++t) {
        s.confusion.counts(argmax_class(d.targets.col(t)), argmax_class(y.col(t))) += 1;
    }
    s.accuracy = s.confusion.accuracy();
    return s;
}

LambdaSelection select_lambda(const DesignMatrix& d, std::span<const double> grid, int folds, bool standardize) {
    if (grid.empty()) throw InvalidParameter("lambda grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw InvalidParameter("lambda grid values must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidParameter("lambda grid must be strictly ascending");
    }
    if (folds < 2) throw InvalidParameter("lambda selection needs at least 2 folds");
    const Eigen::Index t = d.samples();
    if (t < folds) {
        throw ProtocolError("lambda selection with " + std::to_string(folds) + " folds needs at least that many samples, got " +
                            std::to_string(t));
    }

    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(folds));
    for (Eigen::Index j = 0; j < t; ++j) members[static_cast<std::size_t>(j % folds)].push_back(j);

    std::vector<RidgeStats> fold_stats;
    std::vector<DesignMatrix> fold_data;
    for (const auto& m : members) {
        DesignMatrix part;
        part.states = d.states(Eigen::all, m);
        part.targets = d.targets(Eigen::all, m);
        fold_stats.push_back(RidgeStats::of(part.states, part.targets));
        fold_data.push_back(std::move(part));
    }
    RidgeStats total = fold_stats.front();
    for (std::size_t k = 1; k < fold_stats.size(); ++k) total += fold_stats[k];

    LambdaSelection sel;
    sel.grid.assign(grid.begin(), grid.end());
    sel.mean_accuracy.assign(grid.size(), 0.0);
    for (std::size_t k = 0; k < fold_stats.size(); ++k) {
        RidgeStats train = total;
        train -= fold_stats[k];
        const RidgeSystem system(train, standardize);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            double acc = 0.0;
            try {
                acc = score(system.solve(grid[g], {}), fold_data[k]).accuracy;
            } catch (const IllConditioned&) {
                acc = 0.0;
            }
            sel.mean_accuracy[g] += acc / folds;
        }
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (sel.mean_accuracy[g] >= sel.mean_accuracy[best]) best = g;
    }
    sel.lambda = grid[best];
    return sel;
}

std::vector<double> log_grid(double lo, double hi, int points) {
    if (!(lo > 0.0 && hi >= lo) || points < 1) throw InvalidParameter("invalid log grid");
    if (points == 1) return {lo};
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (points - 1));
    return g;
}

namespace {

void put_hex(std::ostream& os, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    os << buf;
}

void put_vector(std::ostream& os, const char* key, const Eigen::VectorXd& v) {
    os << key;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        os << ' ';
        put_hex(os, v(i));
    }
    os << '\n';
}

double parse_hex(const std::string& token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw FormatError("readout artifact: bad number '" + token + "'");
    return v;
}

std::istringstream expect_line(std::istream& is, const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("readout artifact: missing '" + key + "' line");
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != key) throw FormatError("readout artifact: expected '" + key + "', found '" + k + "'");
    return ls;
}

Eigen::VectorXd read_vector(std::istream& is, const std::string& key, Eigen::Index n) {
    auto ls = expect_line(is, key);
    Eigen::VectorXd v(n);
    std::string tok;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(ls >> tok)) throw FormatError("readout artifact: '" + key + "' is short");
        v(i) = parse_hex(tok);
    }
    return v;
}

}  // namespace

void save_readout(std::ostream& os, const ReadoutModel& model) {
    os << "photorc-readout 1\n";
    os << "shape " << model.weights.rows() << ' ' << model.weights.cols() << '\n';
    os << "lambda ";
    put_hex(os, model.lambda);
    os << "\nlabels";
    for (int c : model.class_labels) os << ' ' << c;
    os << "\nstandardized " << (model.standardized ? 1 : 0) << '\n';
    if (model.standardized) {
        put_vector(os, "feature_mean", model.feature_mean);
        put_vector(os, "feature_scale", model.feature_scale);
        put_vector(os, "target_offset", model.target_offset);
    }
    os << "weights\n";
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
            if (c) os << ' ';
            put_hex(os, model.weights(r, c));
        }
        os << '\n';
    }
}

ReadoutModel load_readout(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "photorc-readout 1") throw FormatError("not a photorc readout artifact");
    ReadoutModel m;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    {
        auto ls = expect_line(is, "shape");
        if (!(ls >> rows >> cols) || rows < 1 || cols < 0) throw FormatError("readout artifact: bad shape");
    }
    {
        auto ls = expect_line(is, "lambda");
        std::string tok;
        ls >> tok;
        m.lambda = parse_hex(tok);
    }
    {
        auto ls = expect_line(is, "labels");
        int c = 0;
        while (ls >> c) m.class_labels.push_back(c);
        if (static_cast<Eigen::Index>(m.class_labels.size()) != rows) throw FormatError("readout artifact: label count mismatch");
    }
    {
        auto ls = expect_line(is, "standardized");
        int flag = 0;
        ls >> flag;
        m.standardized = flag != 0;
    }
    if (m.standardized) {
        m.feature_mean = read_vector(is, "feature_mean", cols);
        m.feature_scale = read_vector(is, "feature_scale", cols);
        m.target_offset = read_vector(is, "target_offset", rows);
    }
    expect_line(is, "weights");
    m.weights.resize(rows, cols);
    std::string tok;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!(is >> tok)) throw FormatError("readout artifact: weights are truncated");
            m.weights(r, c) = parse_hex(tok);
        }
    }
    return m;
}

}  // namespace photorc
