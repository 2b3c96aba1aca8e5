#include "photorc/experiment.hpp"

#include "photorc/errors.hpp"
#include "photorc/reservoir.hpp"
#include "photorc/rng.hpp"
#include "photorc/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <typeinfo>

namespace photorc {

namespace {

// Stream tag for calibration subsampling under the shuffle seed.
constexpr std::uint64_t kCalibrationStream = 0x63616c6962ULL;

int class_count(const std::vector<int>& labels) {
    int top = -1;
    for (int l : labels) {
        if (l < 0) throw FormatError("negative class label " + std::to_string(l));
        top = std::max(top, l);
    }
    return top + 1;
}

std::vector<int> labels_at(const DataPool& pool, const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(pool.labels[i]);
    return out;
}

DeepConfig fold_reservoir_config(const ExperimentConfig& config, int repetition) {
    DeepConfig deep = config.reservoir.deep;
    deep.optics_seed = config.seeds.optics + static_cast<std::uint64_t>(repetition);
    deep.bias_seed = config.seeds.bias;
    return deep;
}

template <typename Derived>
bool same(const Eigen::DenseBase<Derived>& a, const Eigen::DenseBase<Derived>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.derived().array() == b.derived().array()).all();
}

}  // namespace

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const InvalidParameter*>(&e)) return "invalid-parameter";
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const ShapeError*>(&e)) return "shape";
    if (dynamic_cast<const ResourceError*>(&e)) return "resource";
    if (dynamic_cast<const CalibrationError*>(&e)) return "calibration";
    if (dynamic_cast<const AllocationError*>(&e)) return "allocation";
    if (dynamic_cast<const IllConditioned*>(&e)) return "ill-conditioned";
    if (dynamic_cast<const ProtocolError*>(&e)) return "protocol";
    if (dynamic_cast<const FormatError*>(&e)) return "format";
    if (dynamic_cast<const StateError*>(&e)) return "state";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const std::bad_alloc*>(&e)) return "out-of-memory";
    return "error";
}

DataPool pool_from_mnist(IdxImages images, std::vector<int> labels) {
    if (static_cast<std::size_t>(images.count) != labels.size()) {
        throw FormatError("MNIST images (" + std::to_string(images.count) + ") and labels (" +
                          std::to_string(labels.size()) + ") differ in count");
    }
    DataPool pool;
    pool.kind = DatasetKind::mnist;
    pool.images = std::move(images);
    pool.labels = std::move(labels);
    pool.groups.assign(pool.labels.size(), 0);
    pool.source_ids.assign(pool.labels.size(), std::string());
    pool.n_classes = std::max(10, class_count(pool.labels));
    return pool;
}

DataPool pool_from_sequences(DatasetKind kind, std::vector<SequenceSample> samples) {
    if (samples.empty()) throw FormatError("sequence dataset is empty");
    DataPool pool;
    pool.kind = kind;
    for (const auto& s : samples) {
        if (s.frames.empty()) throw FormatError("sample '" + s.source_id + "' has no frames");
        pool.labels.push_back(s.label);
        pool.groups.push_back(s.group);
        pool.source_ids.push_back(s.source_id);
    }
    pool.sequences = std::move(samples);
    pool.n_classes = class_count(pool.labels);
    return pool;
}

DataPool load_pool(const ExperimentConfig& config) {
    const auto& ds = config.dataset;
    switch (ds.kind) {
        case DatasetKind::mnist: {
            auto data = load_mnist(resolve_data_path(ds.path));
            return pool_from_mnist(std::move(data.images), std::move(data.labels));
        }
        case DatasetKind::sequence_dir: {
            auto path = resolve_data_path(ds.path);
            if (std::filesystem::is_directory(path)) path /= "manifest.csv";
            return pool_from_sequences(DatasetKind::sequence_dir, load_sequence_dataset(path));
        }
        case DatasetKind::synthetic:
            return pool_from_sequences(DatasetKind::synthetic,
                                       synthetic_task(ds.synthetic_kind, ds.synthetic, config.seeds.data));
    }
    throw ConfigError("unknown dataset kind");
}

std::vector<Split> make_splits(const ExperimentConfig& config, const DataPool& pool, std::vector<std::string>* notes) {
    auto note = [&](std::string s) {
        if (notes) notes->push_back(std::move(s));
    };
    switch (config.protocol.cv) {
        case CvProtocol::holdout: {
            if (pool.kind == DatasetKind::mnist) {
                const auto n_train = static_cast<std::size_t>(config.dataset.mnist_train);
                const auto n_test = static_cast<std::size_t>(config.dataset.mnist_test);
                note("non-paper-scale: seeded MNIST subsample, " + std::to_string(n_train) + " train / " +
                     std::to_string(n_test) + " test, single holdout split");
                return {holdout_split(pool.size(), n_train, n_test, config.seeds.shuffle)};
            }
            const double frac = config.dataset.holdout_test_fraction;
            if (!(frac > 0.0 && frac < 1.0)) throw ConfigError("dataset.holdout_test_fraction must lie in (0, 1)");
            const auto n_test = static_cast<std::size_t>(std::llround(frac * static_cast<double>(pool.size())));
            return {holdout_split(pool.size(), pool.size() - n_test, n_test, config.seeds.shuffle)};
        }
        case CvProtocol::mnist_7fold:
            if (pool.kind != DatasetKind::mnist) throw ProtocolError("mnist-7fold needs the MNIST dataset");
            return cv_mnist_7fold(pool.size(), config.seeds.shuffle);
        case CvProtocol::ti46_grouped: {
            auto folds = cv_ti46_grouped(pool.labels, config.seeds.shuffle);
            if (!folds.paper_scale) {
                note("non-paper-scale: " + std::to_string(pool.size()) +
                     " samples grouped proportionally instead of 10 groups of 50");
            }
            return std::move(folds.splits);
        }
        case CvProtocol::kth_central:
            return cv_kth_central(pool.source_ids, pool.groups);
    }
    throw ConfigError("unknown protocol");
}

FoldOutcome run_fold(const ExperimentConfig& config, const DataPool& pool, const Split& split, int repetition) {
    if (split.train.empty() || split.test.empty()) throw ProtocolError("split '" + split.name + "' has an empty side");
    FoldOutcome out;
    FittedFold& fitted = out.fitted;

    // Preprocessing is fitted on training indices only.
    std::vector<Sequence> train_seq;
    std::vector<Sequence> test_seq;
    train_seq.reserve(split.train.size());
    test_seq.reserve(split.test.size());
    if (pool.kind == DatasetKind::mnist) {
        MnistPipeline pipeline({config.dataset.hog, config.dataset.pca_components, config.dataset.pca_per_position});
        pipeline.fit([&](std::size_t i) { return pool.images.image(i); }, split.train);
        const int models = config.dataset.pca_per_position ? kMnistStrips : 1;
        for (int s = 0; s < models; ++s) {
            fitted.pca.push_back(pipeline.pca(s));
            fitted.bounds.push_back(pipeline.bounds(s));
        }
        for (auto i : split.train) train_seq.push_back(pipeline.sequence(pool.images.image(i)).frames);
        for (auto i : split.test) test_seq.push_back(pipeline.sequence(pool.images.image(i)).frames);
    } else {
        std::vector<const SequenceSample*> train_ptrs;
        for (auto i : split.train) train_ptrs.push_back(&pool.sequences[i]);
        fitted.bounds.push_back(fit_sequence_bounds(train_ptrs));
        NormalizeOptions opts;
        opts.ti46 = config.dataset.ti46_mode;
        for (auto i : split.train) train_seq.push_back(normalize_sequence(pool.sequences[i], fitted.bounds[0], opts).frames);
        for (auto i : split.test) test_seq.push_back(normalize_sequence(pool.sequences[i], fitted.bounds[0], opts).frames);
    }
    const int input_dim = static_cast<int>(train_seq.front().front().size());

    DeepReservoir reservoir(fold_reservoir_config(config, repetition), input_dim);
    {
        std::vector<std::size_t> order(train_seq.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(config.seeds.shuffle, kCalibrationStream + static_cast<std::uint64_t>(repetition)));
        rng.shuffle(order);
        const auto n = std::min(order.size(), static_cast<std::size_t>(std::max(1, config.reservoir.calibration_samples)));
        std::vector<Sequence> warmup;
        for (std::size_t k = 0; k < n; ++k) warmup.push_back(train_seq[order[k]]);
        reservoir.calibrate(warmup, config.reservoir.calibration_iterations);
    }
    fitted.scales = reservoir.scales();

    auto features = [&](const std::vector<Sequence>& seqs) {
        std::vector<const Sequence*> ptrs;
        ptrs.reserve(seqs.size());
        for (const auto& s : seqs) ptrs.push_back(&s);
        return reservoir.run_batch(ptrs, config.reservoir.aggregation, config.reservoir.batch_size);
    };

    std::vector<int> class_labels(static_cast<std::size_t>(pool.n_classes));
    std::iota(class_labels.begin(), class_labels.end(), 0);
    {
        const auto train_labels = labels_at(pool, split.train);
        DesignMatrix train = make_design(features(train_seq), train_labels, pool.n_classes);
        train_seq.clear();
        train_seq.shrink_to_fit();
        const auto grid = log_grid(config.readout.lambda_min, config.readout.lambda_max, config.readout.lambda_points);
        fitted.selection = select_lambda(train, grid, config.readout.folds, config.readout.standardize);
        fitted.readout = train_ridge(train, fitted.selection.lambda, config.readout.standardize);
        fitted.readout.class_labels = class_labels;
    }

    const auto test_labels = labels_at(pool, split.test);
    const DesignMatrix test = make_design(features(test_seq), test_labels, pool.n_classes);
    const Score s = score(fitted.readout, test);

    FoldResult& r = out.result;
    r.split = split.name;
    r.repetition = repetition;
    r.optics_seed = config.seeds.optics + static_cast<std::uint64_t>(repetition);
    r.n_train = split.train.size();
    r.n_test = split.test.size();
    r.ok = true;
    r.accuracy = s.accuracy;
    r.lambda = fitted.selection.lambda;
    r.confusion = s.confusion;
    return out;
}

int RunReport::failed_folds() const {
    return static_cast<int>(std::count_if(folds.begin(), folds.end(), [](const FoldResult& f) { return !f.ok; }));
}

void summarize(RunReport& report) {
    std::vector<double> acc;
    report.confusion.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(report.class_labels.size()),
                                                    static_cast<Eigen::Index>(report.class_labels.size()));
    for (const auto& f : report.folds) {
        if (!f.ok) continue;
        acc.push_back(f.accuracy);
        if (f.confusion.counts.rows() == report.confusion.counts.rows()) report.confusion.counts += f.confusion.counts;
    }
    report.mean_accuracy = 0.0;
    report.std_accuracy = 0.0;
    if (acc.empty()) return;
    for (double a : acc) report.mean_accuracy += a;
    report.mean_accuracy /= static_cast<double>(acc.size());
    if (acc.size() > 1) {
        double ss = 0.0;
        for (double a : acc) ss += (a - report.mean_accuracy) * (a - report.mean_accuracy);
        report.std_accuracy = std::sqrt(ss / static_cast<double>(acc.size() - 1));
    }
}

RunReport run_experiment(const ExperimentConfig& config) { return run_experiment(config, load_pool(config)); }

RunReport run_experiment(const ExperimentConfig& config, const DataPool& pool) {
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.name = config.name;
    report.config_text = render_config(config);
    report.config_digest = config_digest(config);
    if (config.protocol.repetitions < 1) throw ConfigError("protocol.repetitions must be at least 1");
    for (const auto& layer : config.reservoir.deep.layers()) report.layer_neurons.push_back(layer.n_neurons);
    report.class_labels.resize(static_cast<std::size_t>(pool.n_classes));
    std::iota(report.class_labels.begin(), report.class_labels.end(), 0);
    if (config.reservoir.deep.depth > 1) {
        report.notes.push_back("assumption: per-layer sizes follow the " + to_string(config.reservoir.deep.allocation) +
                               " allocation rule");
    }

    const auto splits = make_splits(config, pool, &report.notes);
    for (int rep = 0; rep < config.protocol.repetitions; ++rep) {
        for (const auto& split : splits) {
            try {
                report.folds.push_back(run_fold(config, pool, split, rep).result);
            } catch (const std::exception& e) {
                FoldResult f;
                f.split = split.name;
                f.repetition = rep;
                f.optics_seed = config.seeds.optics + static_cast<std::uint64_t>(rep);
                f.n_train = split.train.size();
                f.n_test = split.test.size();
                f.error = error_kind(e) + ": " + e.what();
                report.folds.push_back(std::move(f));
            }
        }
    }
    summarize(report);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

DataPool poison_rows(const DataPool& pool, const std::vector<std::size_t>& rows) {
    DataPool out = pool;
    const int classes = std::max(1, pool.n_classes);
    for (auto i : rows) {
        if (i >= pool.size()) throw ProtocolError("poisoned row " + std::to_string(i) + " is outside the pool");
        out.labels[i] = (pool.labels[i] + 1) % classes;
        if (pool.kind == DatasetKind::mnist) {
            const auto px = static_cast<std::size_t>(pool.images.rows) * static_cast<std::size_t>(pool.images.cols);
            for (std::size_t k = i * px; k < (i + 1) * px; ++k) out.images.pixels[k] = static_cast<std::uint8_t>(255 - pool.images.pixels[k]);
        } else {
            auto& s = out.sequences[i];
            s.label = out.labels[i];
            for (auto& f : s.frames) f = (7.5 - 3.0 * f.array()).matrix();
        }
    }
    return out;
}

LeakageAudit audit_leakage(const ExperimentConfig& config, const DataPool& pool, const Split& split) {
    const FittedFold a = run_fold(config, pool, split, 0).fitted;
    const FittedFold b = run_fold(config, poison_rows(pool, split.test), split, 0).fitted;
    LeakageAudit audit;
    auto differ = [&](const std::string& what) {
        audit.difference = what;
        return audit;
    };
    if (a.pca.size() != b.pca.size() || a.bounds.size() != b.bounds.size()) return differ("preprocessing model count");
    for (std::size_t s = 0; s < a.pca.size(); ++s) {
        if (!same(a.pca[s].mean, b.pca[s].mean)) return differ("pca[" + std::to_string(s) + "].mean");
        if (!same(a.pca[s].components, b.pca[s].components)) return differ("pca[" + std::to_string(s) + "].components");
        if (!same(a.pca[s].explained_variance, b.pca[s].explained_variance)) {
            return differ("pca[" + std::to_string(s) + "].explained_variance");
        }
    }
    for (std::size_t s = 0; s < a.bounds.size(); ++s) {
        if (!same(a.bounds[s].lo, b.bounds[s].lo) || !same(a.bounds[s].hi, b.bounds[s].hi)) {
            return differ("bounds[" + std::to_string(s) + "]");
        }
    }
    if (a.scales != b.scales) return differ("exposure scales");
    if (a.selection.lambda != b.selection.lambda || a.selection.mean_accuracy != b.selection.mean_accuracy) {
        return differ("lambda selection");
    }
    if (!same(a.readout.weights, b.readout.weights)) return differ("readout weights");
    if (!same(a.readout.feature_mean, b.readout.feature_mean) || !same(a.readout.feature_scale, b.readout.feature_scale) ||
        !same(a.readout.target_offset, b.readout.target_offset)) {
        return differ("standardization");
    }
    audit.unchanged = true;
    return audit;
}

}  // namespace photorc
