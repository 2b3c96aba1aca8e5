#pragma once

#include "photorc/features.hpp"
#include "photorc/reservoir.hpp"
#include "photorc/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace photorc {

enum class DatasetKind { mnist, sequence_dir, synthetic };
enum class CvProtocol { holdout, mnist_7fold, ti46_grouped, kth_central };
enum class BudgetRule { fixed, per_layer_100 };

struct DatasetConfig {
    DatasetKind kind = DatasetKind::synthetic;
    std::string path;
    int mnist_train = 10000;
    int mnist_test = 2000;
    HogParams hog;
    int pca_components = 25;
    bool pca_per_position = false;
    bool ti46_mode = false;
    double holdout_test_fraction = 0.25;
    SyntheticKind synthetic_kind = SyntheticKind::delayed_recall;
    SyntheticParams synthetic;
};

struct ReservoirRunConfig {
    DeepConfig deep;  // optics_seed and bias_seed are taken from SeedConfig
    Aggregation aggregation = Aggregation::final_step;
    int calibration_samples = 64;
    int calibration_iterations = 3;
    int batch_size = 256;
};

struct ReadoutConfig {
    double lambda_min = 1e-6;
    double lambda_max = 1e6;
    int lambda_points = 13;
    int folds = 3;
    bool standardize = true;
};

struct ProtocolConfig {
    CvProtocol cv = CvProtocol::holdout;
    int repetitions = 1;
};

/// Every random draw of a run traces to one of these.
struct SeedConfig {
    std::uint64_t optics = 1;   // transmission matrix; repetition r uses optics + r
    std::uint64_t bias = 2;     // bias mirror placement
    std::uint64_t shuffle = 3;  // protocol partitions and subsamples
    std::uint64_t data = 4;     // synthetic data generation
};

struct SweepConfig {
    std::vector<int> depths{2, 3, 4, 5};
    std::vector<int> budgets{200, 300, 400, 500};
    BudgetRule budget_rule = BudgetRule::per_layer_100;
};

struct OutputConfig {
    std::string dir = "photorc-out";  // relative to the working directory
};

struct ExperimentConfig {
    std::string name = "experiment";
    DatasetConfig dataset;
    ReservoirRunConfig reservoir;
    ReadoutConfig readout;
    ProtocolConfig protocol;
    SeedConfig seeds;
    SweepConfig sweep;
    OutputConfig output;
};

/// Parses the sectioned key-value format:
///
///     # comment
///     [section]
///     key = value
///
/// Every key has a fixed type (int, uint, real, bool, string, enum or int
/// list); unknown keys, duplicate keys and values of the wrong type are
/// errors. Keys that are absent keep their defaults.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical rendering of every key, one "key = value  # type" line each,
/// sections in fixed order. parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& config);

/// 64-bit FNV-1a of render_config, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

std::string to_string(DatasetKind k);
std::string to_string(CvProtocol p);
std::string to_string(BudgetRule r);

}  // namespace photorc
