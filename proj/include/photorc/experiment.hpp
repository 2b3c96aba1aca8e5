#pragma once

#include "photorc/config.hpp"
#include "photorc/dataset.hpp"
#include "photorc/features.hpp"
#include "photorc/protocols.hpp"
#include "photorc/readout.hpp"

#include <cstdint>
#include <exception>
#include <string>
#include <vector>

namespace photorc {

/// Everything a run can draw samples from. MNIST keeps raw images so that
/// preprocessing is refitted per fold; other sources keep raw sequences.
struct DataPool {
    DatasetKind kind = DatasetKind::synthetic;
    IdxImages images;
    std::vector<SequenceSample> sequences;
    std::vector<int> labels;
    std::vector<int> groups;
    std::vector<std::string> source_ids;
    int n_classes = 0;

    std::size_t size() const { return labels.size(); }
};

DataPool load_pool(const ExperimentConfig& config);
DataPool pool_from_mnist(IdxImages images, std::vector<int> labels);
DataPool pool_from_sequences(DatasetKind kind, std::vector<SequenceSample> samples);

/// Short diagnostic tag for a library error ("allocation", "protocol", ...).
std::string error_kind(const std::exception& e);

/// Splits of the configured protocol. Scale remarks (subsampled MNIST,
/// non-standard TI-46 grouping) are appended to notes.
std::vector<Split> make_splits(const ExperimentConfig& config, const DataPool& pool, std::vector<std::string>* notes = nullptr);

/// Every parameter fitted on a fold's training indices.
struct FittedFold {
    std::vector<PcaModel> pca;
    std::vector<MinMaxBounds> bounds;
    std::vector<double> scales;
    LambdaSelection selection;
    ReadoutModel readout;
};

struct FoldResult {
    std::string split;
    int repetition = 0;
    std::uint64_t optics_seed = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    bool ok = false;
    std::string error;  // "<kind>: <message>" when !ok
    double accuracy = 0.0;
    double lambda = 0.0;
    ConfusionMatrix confusion;
};

struct FoldOutcome {
    FittedFold fitted;
    FoldResult result;
};

/// Fits preprocessing, reservoir exposure, lambda and readout on split.train
/// and scores split.test. Errors propagate.
FoldOutcome run_fold(const ExperimentConfig& config, const DataPool& pool, const Split& split, int repetition);

struct RunReport {
    std::string name;
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;  // over successful folds
    double std_accuracy = 0.0;   // sample standard deviation; 0 for a single fold
    ConfusionMatrix confusion;   // summed over successful folds
    std::vector<int> class_labels;
    std::string config_text;
    std::string config_digest;
    std::vector<int> layer_neurons;
    std::vector<std::string> notes;
    double wall_seconds = 0.0;  // kept out of every deterministic artifact

    int failed_folds() const;
};

/// All repetitions x all splits. A failing fold is recorded with its
/// diagnostic and the run continues.
RunReport run_experiment(const ExperimentConfig& config);
RunReport run_experiment(const ExperimentConfig& config, const DataPool& pool);

/// Mean and sample standard deviation of the successful folds.
void summarize(RunReport& report);

/// Refits one fold on a copy of the pool whose test rows are corrupted and
/// compares every fitted parameter bit for bit.
struct LeakageAudit {
    bool unchanged = false;
    std::string difference;  // first differing parameter
};

LeakageAudit audit_leakage(const ExperimentConfig& config, const DataPool& pool, const Split& split);

/// Copy of pool with every row in `rows` replaced by out-of-distribution
/// garbage and a rotated label.
DataPool poison_rows(const DataPool& pool, const std::vector<std::size_t>& rows);

}  // namespace photorc
