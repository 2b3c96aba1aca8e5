#pragma once

#include "photorc/encoding.hpp"
#include "photorc/optics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace photorc {

enum class Allocation { decreasing, uniform, increasing };
enum class BiasProfile { uniform, mild_increasing };
enum class Aggregation { final_step, mean, concat_all_steps };

Allocation parse_allocation(const std::string& s);
BiasProfile parse_bias_profile(const std::string& s);
Aggregation parse_aggregation(const std::string& s);
std::string to_string(Allocation a);
std::string to_string(BiasProfile b);
std::string to_string(Aggregation a);

/// Neurons per layer under a fixed budget, every entry a multiple of 25.
///
/// decreasing: weights l^-gamma normalized to one, each layer rounded to the
/// nearest multiple of 25, the rounding deficit (itself rounded to 25) added
/// to layer 1. increasing is the reversed decreasing list; uniform rounds
/// N / L to the nearest multiple of 25.
std::vector<int> allocate_neurons(int total, int depth, double gamma, Allocation strategy);

/// Linear interpolation from alpha_first (layer 1) to alpha_last (layer L).
std::vector<double> leakage_schedule(double alpha_first, double alpha_last, int depth);

/// Per-layer fraction of bias mirrors held ON.
std::vector<double> bias_fractions(BiasProfile profile, int depth, double base, double increment);

struct LayerConfig {
    int n_neurons = 25;
    double alpha = 1.0;
    double bias_fraction = 0.0;
    std::uint64_t bias_seed = 0;
};

struct DeepConfig {
    int depth = 1;
    int total_neurons = 500;
    Allocation allocation = Allocation::decreasing;
    double gamma = 1.2;
    double alpha_first = 0.95;
    double alpha_last = 0.65;
    BiasProfile bias_profile = BiasProfile::mild_increasing;
    double bias_base = 0.10;
    double bias_increment = 0.05;
    int bias_width = 400;
    int n_bin = 10;
    std::uint64_t optics_seed = 1;
    std::uint64_t bias_seed = 2;
    double calibration_percentile = 99.0;
    int washout = 0;

    /// Expanded per-layer configuration; validates every field.
    std::vector<LayerConfig> layers() const;
};

/// Per-layer stored 8-bit states r and their cached encodings x.
struct ReservoirState {
    std::vector<Quantized8> r;
    std::vector<BinaryPattern> x;
    long time_index = 0;
};

using Sequence = std::vector<Eigen::VectorXd>;

/// Per-step, per-layer levels of one trajectory.
using Trajectory = std::vector<std::vector<Quantized8>>;

/// Columnar text dump: "step,layer,neuron,level" rows.
void write_trajectory(std::ostream& os, const Trajectory& trajectory);

/// Called for every layer update with the input bits the layer consumed.
using LayerObserver = std::function<void(int layer, const BinaryPattern& input_bits)>;

/// Time-multiplexed deep reservoir: one transmission matrix, L layers that
/// each own a disjoint block of camera rows and a fixed bias pattern.
///
/// Layer widths on the modulator: layer 1 input = input_dim * n_bin, layer
/// l > 1 input = n_(l-1) * n_bin, state = n_l * n_bin, then bias_width bias
/// mirrors. All layers start at modulator column 0.
class DeepReservoir {
public:
    DeepReservoir(const DeepConfig& config, int input_dim);
    DeepReservoir(const DeepConfig& config, int input_dim, std::shared_ptr<const TransmissionModel> model);

    int depth() const { return static_cast<int>(layers_.size()); }
    int input_dim() const { return input_dim_; }
    int state_dim() const;
    const DeepConfig& config() const { return config_; }
    const BasketCodec& codec() const { return codec_; }
    const TransmissionModel& transmission() const { return *model_; }
    const LayerConfig& layer_config(int l) const { return layers_.at(static_cast<std::size_t>(l)); }
    const LayerOptics& layer_optics(int l) const { return optics_.at(static_cast<std::size_t>(l)); }

    void set_scale(int l, double scale);
    bool calibrated() const;
    std::vector<double> scales() const;

    /// Sets every layer's exposure to the configured percentile of the
    /// intensities seen while driving the warm-up sequences. A first pass
    /// takes provisional scales from the first time step, later passes refine
    /// them on full trajectories.
    void calibrate(std::span<const Sequence> warmup, int iterations = 3);

    ReservoirState initial_state() const;

    /// One leaky update of layer l (0-based) given its encoded input bits.
    void step_layer(int l, const BinaryPattern& u_bits, ReservoirState& state) const;

    /// One full deep step: layer 1 reads the encoded input, layer l > 1 reads
    /// layer l-1's encoding from this same step.
    void step_deep(std::span<const double> input, ReservoirState& state,
                   const LayerObserver& observer = {}) const;

    /// Readout features of one sequence from a zero state.
    Eigen::VectorXd run_sequence(const Sequence& sample, Aggregation aggregation,
                                 Trajectory* trajectory = nullptr) const;

    /// Feature dimension for a given aggregation and sequence length.
    Eigen::Index feature_dim(Aggregation aggregation, std::size_t steps) const;

    /// Batched equivalent of run_sequence; returns one feature column per
    /// sample. Samples are grouped by length and processed batch_size at a
    /// time.
    Eigen::MatrixXd run_batch(std::span<const Sequence* const> samples, Aggregation aggregation,
                              Eigen::Index batch_size = 256) const;

private:
    using Collector = std::function<void(int layer, const Eigen::MatrixXd& intensity)>;

    void build(std::shared_ptr<const TransmissionModel> model);
    void check_scales() const;
    void run_group(std::span<const Sequence* const> group, Aggregation aggregation,
                   Eigen::Ref<Eigen::MatrixXd> out, const Collector& collector, bool provisional,
                   std::vector<double>* provisional_scales) const;

    DeepConfig config_;
    int input_dim_;
    BasketCodec codec_;
    std::vector<LayerConfig> layers_;
    std::vector<LayerOptics> optics_;
    std::vector<bool> calibrated_;
    std::shared_ptr<const TransmissionModel> model_;
};

/// Transmission matrix dimensions (rows, cols) needed by a configuration.
std::pair<Eigen::Index, Eigen::Index> transmission_shape(const DeepConfig& config, int input_dim);

}  // namespace photorc
