#include "photorc/reservoir.hpp"

#include "photorc/errors.hpp"
#include "photorc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace photorc {

Allocation parse_allocation(const std::string& s) {
    if (s == "decreasing") return Allocation::decreasing;
    if (s == "uniform") return Allocation::uniform;
    if (s == "increasing") return Allocation::increasing;
    throw InvalidParameter("unknown allocation strategy '" + s + "'");
}

BiasProfile parse_bias_profile(const std::string& s) {
    if (s == "uniform") return BiasProfile::uniform;
    if (s == "mild-increasing") return BiasProfile::mild_increasing;
    throw InvalidParameter("unknown bias profile '" + s + "'");
}

Aggregation parse_aggregation(const std::string& s) {
    if (s == "final") return Aggregation::final_step;
    if (s == "mean") return Aggregation::mean;
    if (s == "concat-all-steps") return Aggregation::concat_all_steps;
    throw InvalidParameter("unknown aggregation '" + s + "'");
}

std::string to_string(Allocation a) {
    switch (a) {
        case Allocation::decreasing: return "decreasing";
        case Allocation::uniform: return "uniform";
        case Allocation::increasing: return "increasing";
    }
    return "?";
}

std::string to_string(BiasProfile b) {
    return b == BiasProfile::uniform ? "uniform" : "mild-increasing";
}

std::string to_string(Aggregation a) {
    switch (a) {
        case Aggregation::final_step: return "final";
        case Aggregation::mean: return "mean";
        case Aggregation::concat_all_steps: return "concat-all-steps";
    }
    return "?";
}

namespace {

int round_to_25(double x) { return 25 * static_cast<int>(std::floor(x / 25.0 + 0.5)); }

}  // namespace

std::vector<int> allocate_neurons(int total, int depth, double gamma, Allocation strategy) {
    if (depth < 1) throw InvalidParameter("depth must be >= 1");
    if (!(gamma > 0.0)) throw InvalidParameter("power-law exponent must be positive");
    if (total < 25 * depth) {
        throw AllocationError("budget " + std::to_string(total) + " is below 25 neurons per layer for depth " +
                              std::to_string(depth));
    }
    std::vector<int> n(static_cast<std::size_t>(depth));
    if (strategy == Allocation::uniform) {
        std::fill(n.begin(), n.end(), round_to_25(static_cast<double>(total) / depth));
    } else {
        std::vector<double> phi(n.size());
        for (int l = 1; l <= depth; ++l) phi[static_cast<std::size_t>(l - 1)] = std::pow(static_cast<double>(l), -gamma);
        const double sum = std::accumulate(phi.begin(), phi.end(), 0.0);
        for (std::size_t l = 0; l < n.size(); ++l) n[l] = round_to_25(total * (phi[l] / sum));
    }
    // Budget correction goes to the first layer for every strategy so that all
    // strategies share the same total.
    const int deficit = total - std::accumulate(n.begin(), n.end(), 0);
    n[0] += round_to_25(static_cast<double>(deficit));
    for (std::size_t l = 0; l < n.size(); ++l) {
        if (n[l] < 25) {
            throw AllocationError("layer " + std::to_string(l + 1) + " receives " + std::to_string(n[l]) +
                                  " neurons (budget " + std::to_string(total) + " too small for depth " +
                                  std::to_string(depth) + ")");
        }
    }
    if (strategy == Allocation::increasing) std::reverse(n.begin(), n.end());
    return n;
}

std::vector<double> leakage_schedule(double alpha_first, double alpha_last, int depth) {
    if (depth < 1) throw InvalidParameter("depth must be >= 1");
    for (double a : {alpha_first, alpha_last}) {
        if (!(a > 0.0 && a <= 1.0)) throw InvalidParameter("leakage rate must lie in (0, 1], got " + std::to_string(a));
    }
    std::vector<double> alpha(static_cast<std::size_t>(depth));
    alpha[0] = alpha_first;
    for (int l = 2; l <= depth; ++l) {
        alpha[static_cast<std::size_t>(l - 1)] =
            alpha_first + (alpha_last - alpha_first) * static_cast<double>(l - 1) / static_cast<double>(depth - 1);
    }
    if (depth > 1) alpha.back() = alpha_last;
    return alpha;
}

std::vector<double> bias_fractions(BiasProfile profile, int depth, double base, double increment) {
    std::vector<double> b(static_cast<std::size_t>(depth));
    for (int l = 0; l < depth; ++l) {
        b[static_cast<std::size_t>(l)] = profile == BiasProfile::uniform ? base : base + increment * l;
        const double v = b[static_cast<std::size_t>(l)];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidParameter("bias fraction of layer " + std::to_string(l + 1) + " is " + std::to_string(v) +
                                   ", outside [0, 1]");
        }
    }
    return b;
}

std::vector<LayerConfig> DeepConfig::layers() const {
    if (n_bin < 2 || n_bin > 64) throw InvalidParameter("n_bin must lie in [2, 64]");
    if (bias_width < 0) throw InvalidParameter("bias width must be non-negative");
    if (washout < 0) throw InvalidParameter("washout must be non-negative");
    const auto n = allocate_neurons(total_neurons, depth, gamma, allocation);
    const auto alpha = leakage_schedule(alpha_first, alpha_last, depth);
    const auto bias = bias_fractions(bias_profile, depth, bias_base, bias_increment);
    std::vector<LayerConfig> out(static_cast<std::size_t>(depth));
    for (std::size_t l = 0; l < out.size(); ++l) {
        out[l] = {n[l], alpha[l], bias[l], derive_seed(bias_seed, l)};
    }
    return out;
}

void write_trajectory(std::ostream& os, const Trajectory& trajectory) {
    os << "step,layer,neuron,level\n";
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        for (std::size_t l = 0; l < trajectory[t].size(); ++l) {
            const auto& levels = trajectory[t][l].levels;
            for (std::size_t k = 0; k < levels.size(); ++k) {
                os << t << ',' << l + 1 << ',' << k << ',' << static_cast<int>(levels[k]) << '\n';
            }
        }
    }
}

namespace {

/// Leaky mix on dequantized values, re-quantized to 8 bits.
inline std::uint8_t mix_level(std::uint8_t previous, std::uint8_t detected, double alpha) {
    return quantize8((1.0 - alpha) * dequantize8(previous) + alpha * dequantize8(detected));
}

struct Widths {
    Eigen::Index input;
    Eigen::Index state;
};

std::vector<Widths> layer_widths(const std::vector<LayerConfig>& layers, int input_dim, int n_bin) {
    std::vector<Widths> w;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Eigen::Index in = l == 0 ? static_cast<Eigen::Index>(input_dim) * n_bin
                                       : static_cast<Eigen::Index>(layers[l - 1].n_neurons) * n_bin;
        w.push_back({in, static_cast<Eigen::Index>(layers[l].n_neurons) * n_bin});
    }
    return w;
}

}  // namespace

std::pair<Eigen::Index, Eigen::Index> transmission_shape(const DeepConfig& config, int input_dim) {
    const auto layers = config.layers();
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    for (const auto& w : layer_widths(layers, input_dim, config.n_bin)) {
        cols = std::max(cols, w.input + w.state + config.bias_width);
    }
    for (const auto& l : layers) rows += l.n_neurons;
    return {rows, cols};
}

DeepReservoir::DeepReservoir(const DeepConfig& config, int input_dim)
    : DeepReservoir(config, input_dim, nullptr) {}

DeepReservoir::DeepReservoir(const DeepConfig& config, int input_dim, std::shared_ptr<const TransmissionModel> model)
    : config_(config), input_dim_(input_dim), codec_(config.n_bin), layers_(config.layers()) {
    if (input_dim < 1) throw InvalidParameter("input dimension must be >= 1");
    if (!(config.calibration_percentile > 50.0 && config.calibration_percentile <= 100.0)) {
        throw InvalidParameter("calibration percentile must lie in (50, 100]");
    }
    build(std::move(model));
}

void DeepReservoir::build(std::shared_ptr<const TransmissionModel> model) {
    const auto [rows, cols] = transmission_shape(config_, input_dim_);
    if (!model) {
        model = std::make_shared<const TransmissionModel>(config_.optics_seed, rows, cols);
    } else if (model->rows() < rows || model->cols() < cols) {
        throw ShapeError("transmission model " + std::to_string(model->rows()) + "x" + std::to_string(model->cols()) +
                         " is smaller than the required " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    model_ = std::move(model);
    const auto widths = layer_widths(layers_, input_dim_, config_.n_bin);
    Eigen::Index row = 0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        optics_.push_back(make_layer_optics(row, layers_[l].n_neurons, widths[l].input, widths[l].state,
                                            config_.bias_width, layers_[l].bias_fraction, layers_[l].bias_seed));
        row += layers_[l].n_neurons;
    }
    calibrated_.assign(layers_.size(), false);
}

int DeepReservoir::state_dim() const {
    int n = 0;
    for (const auto& l : layers_) n += l.n_neurons;
    return n;
}

void DeepReservoir::set_scale(int l, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw CalibrationError("layer scale must be positive and finite");
    optics_.at(static_cast<std::size_t>(l)).scale = scale;
    calibrated_.at(static_cast<std::size_t>(l)) = true;
}

bool DeepReservoir::calibrated() const {
    return std::all_of(calibrated_.begin(), calibrated_.end(), [](bool b) { return b; });
}

std::vector<double> DeepReservoir::scales() const {
    std::vector<double> s;
    for (const auto& o : optics_) s.push_back(o.scale);
    return s;
}

void DeepReservoir::check_scales() const {
    if (!calibrated()) throw StateError("reservoir exposure is not calibrated");
}

ReservoirState DeepReservoir::initial_state() const {
    ReservoirState s;
    for (const auto& l : layers_) {
        Quantized8 q;
        q.levels.assign(static_cast<std::size_t>(l.n_neurons), 0);
        s.x.push_back(encode_levels(q, codec_));
        s.r.push_back(std::move(q));
    }
    return s;
}

void DeepReservoir::step_layer(int l, const BinaryPattern& u_bits, ReservoirState& state) const {
    check_scales();
    const auto li = static_cast<std::size_t>(l);
    const auto& opt = optics_.at(li);
    if (static_cast<Eigen::Index>(u_bits.size()) != opt.input_cols.size) {
        throw ShapeError("layer " + std::to_string(l + 1) + " expects " + std::to_string(opt.input_cols.size) +
                         " input bits, got " + std::to_string(u_bits.size()));
    }
    if (state.r.size() != layers_.size() || static_cast<Eigen::Index>(state.x[li].size()) != opt.state_cols.size) {
        throw ShapeError("reservoir state does not match layer " + std::to_string(l + 1));
    }
    BinaryPattern pattern;
    pattern.bits.reserve(static_cast<std::size_t>(opt.width()));
    pattern.bits.insert(pattern.bits.end(), u_bits.bits.begin(), u_bits.bits.end());
    pattern.bits.insert(pattern.bits.end(), state.x[li].bits.begin(), state.x[li].bits.end());
    pattern.bits.insert(pattern.bits.end(), opt.bias_pattern.bits.begin(), opt.bias_pattern.bits.end());

    const auto detected = detect(propagate(pattern, *model_, opt), opt.scale);
    auto& r = state.r[li].levels;
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = mix_level(r[k], detected.levels[k], layers_[li].alpha);
    state.x[li] = encode_levels(state.r[li], codec_);
}

void DeepReservoir::step_deep(std::span<const double> input, ReservoirState& state,
                              const LayerObserver& observer) const {
    if (static_cast<int>(input.size()) != input_dim_) {
        throw ShapeError("input frame has " + std::to_string(input.size()) + " features, reservoir expects " +
                         std::to_string(input_dim_));
    }
    BinaryPattern u = encode_vector(input, codec_);
    for (int l = 0; l < depth(); ++l) {
        if (observer) observer(l, u);
        step_layer(l, u, state);
        u = state.x[static_cast<std::size_t>(l)];
    }
    ++state.time_index;
}

Eigen::Index DeepReservoir::feature_dim(Aggregation aggregation, std::size_t steps) const {
    const auto n = static_cast<Eigen::Index>(state_dim());
    if (aggregation != Aggregation::concat_all_steps) return n;
    const auto kept = static_cast<Eigen::Index>(steps) - config_.washout;
    return kept > 0 ? kept * n : 0;
}

Eigen::VectorXd DeepReservoir::run_sequence(const Sequence& sample, Aggregation aggregation,
                                            Trajectory* trajectory) const {
    if (sample.empty()) throw InvalidParameter("cannot run an empty sequence");
    const auto steps = sample.size();
    if (static_cast<std::size_t>(config_.washout) >= steps) {
        throw InvalidParameter("washout of " + std::to_string(config_.washout) + " steps leaves nothing of a " +
                               std::to_string(steps) + "-step sequence");
    }
    const auto n = static_cast<Eigen::Index>(state_dim());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(feature_dim(aggregation, steps));
    auto state = initial_state();
    for (std::size_t t = 0; t < steps; ++t) {
        const auto& frame = sample[t];
        step_deep(std::span<const double>(frame.data(), static_cast<std::size_t>(frame.size())), state);
        if (trajectory) trajectory->push_back(state.r);
        if (static_cast<int>(t) < config_.washout) continue;
        Eigen::VectorXd concat(n);
        Eigen::Index pos = 0;
        for (const auto& q : state.r) {
            for (auto level : q.levels) concat(pos++) = dequantize8(level);
        }
        switch (aggregation) {
            case Aggregation::final_step:
                if (t + 1 == steps) out = concat;
                break;
            case Aggregation::mean: out += concat; break;
            case Aggregation::concat_all_steps:
                out.segment((static_cast<Eigen::Index>(t) - config_.washout) * n, n) = concat;
                break;
        }
    }
    if (aggregation == Aggregation::mean) out /= static_cast<double>(steps - static_cast<std::size_t>(config_.washout));
    return out;
}

void DeepReservoir::run_group(std::span<const Sequence* const> group, Aggregation aggregation,
                              Eigen::Ref<Eigen::MatrixXd> out, const Collector& collector, bool provisional,
                              std::vector<double>* provisional_scales) const {
    const auto batch = static_cast<Eigen::Index>(group.size());
    const std::size_t steps = group.front()->size();
    const auto nb = static_cast<Eigen::Index>(codec_.n_bin());
    const auto n_total = static_cast<Eigen::Index>(state_dim());
    const auto kept = static_cast<double>(steps - static_cast<std::size_t>(config_.washout));

    using LevelMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
    std::vector<LevelMatrix> levels;
    for (const auto& l : layers_) levels.push_back(LevelMatrix::Zero(l.n_neurons, batch));

    out.setZero();
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const auto& opt = optics_[li];
            Eigen::MatrixXd patterns(opt.input_cols.size + opt.state_cols.size, batch);
            for (Eigen::Index b = 0; b < batch; ++b) {
                double* col = patterns.col(b).data();
                std::uint8_t bits[64];
                if (li == 0) {
                    const auto& frame = (*group[static_cast<std::size_t>(b)])[t];
                    if (frame.size() != input_dim_) {
                        throw ShapeError("input frame has " + std::to_string(frame.size()) +
                                         " features, reservoir expects " + std::to_string(input_dim_));
                    }
                    for (Eigen::Index k = 0; k < input_dim_; ++k) {
                        encode_scalar_into(frame(k), codec_, std::span<std::uint8_t>(bits, static_cast<std::size_t>(nb)));
                        for (Eigen::Index i = 0; i < nb; ++i) col[k * nb + i] = bits[i];
                    }
                } else {
                    const auto& prev = levels[li - 1];
                    for (Eigen::Index k = 0; k < prev.rows(); ++k) {
                        const auto lb = codec_.level_bits(prev(k, b));
                        for (Eigen::Index i = 0; i < nb; ++i) col[k * nb + i] = lb[static_cast<std::size_t>(i)];
                    }
                }
                double* state_col = col + opt.input_cols.size;
                const auto& cur = levels[li];
                for (Eigen::Index k = 0; k < cur.rows(); ++k) {
                    const auto lb = codec_.level_bits(cur(k, b));
                    for (Eigen::Index i = 0; i < nb; ++i) state_col[k * nb + i] = lb[static_cast<std::size_t>(i)];
                }
            }

            const Eigen::MatrixXd intensity = propagate_driven(patterns, *model_, opt);
            if (collector) collector(static_cast<int>(li), intensity);

            double scale = opt.scale;
            if (provisional) {
                double& s = (*provisional_scales)[li];
                if (!(s > 0.0)) {
                    std::vector<double> pooled(intensity.data(), intensity.data() + intensity.size());
                    s = percentile_value(std::move(pooled), config_.calibration_percentile);
                }
                scale = s > 0.0 ? s : 1.0;
            }
            const double alpha = layers_[li].alpha;
            auto& cur = levels[li];
            for (Eigen::Index b = 0; b < batch; ++b) {
                for (Eigen::Index k = 0; k < cur.rows(); ++k) {
                    cur(k, b) = mix_level(cur(k, b), quantize8(intensity(k, b) / scale), alpha);
                }
            }
        }

        if (static_cast<int>(t) < config_.washout) continue;
        const bool last = t + 1 == steps;
        if (aggregation == Aggregation::final_step && !last) continue;
        Eigen::Index offset = aggregation == Aggregation::concat_all_steps
                                  ? (static_cast<Eigen::Index>(t) - config_.washout) * n_total
                                  : 0;
        for (const auto& cur : levels) {
            for (Eigen::Index b = 0; b < batch; ++b) {
                for (Eigen::Index k = 0; k < cur.rows(); ++k) {
                    const double v = dequantize8(cur(k, b));
                    if (aggregation == Aggregation::mean) {
                        out(offset + k, b) += v;
                    } else {
                        out(offset + k, b) = v;
                    }
                }
            }
            offset += cur.rows();
        }
    }
    if (aggregation == Aggregation::mean) out /= kept;
}

Eigen::MatrixXd DeepReservoir::run_batch(std::span<const Sequence* const> samples, Aggregation aggregation,
                                         Eigen::Index batch_size) const {
    check_scales();
    if (samples.empty()) return Eigen::MatrixXd(state_dim(), 0);
    if (batch_size < 1) throw InvalidParameter("batch size must be >= 1");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    for (auto i : order) {
        if (samples[i]->empty()) throw InvalidParameter("cannot run an empty sequence (sample " + std::to_string(i) + ")");
        if (samples[i]->size() <= static_cast<std::size_t>(config_.washout)) {
            throw InvalidParameter("washout leaves nothing of sample " + std::to_string(i));
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return samples[a]->size() < samples[b]->size(); });
    const auto dim = feature_dim(aggregation, samples[order.front()]->size());
    if (aggregation == Aggregation::concat_all_steps &&
        samples[order.front()]->size() != samples[order.back()]->size()) {
        throw ShapeError("concat-all-steps aggregation needs equal-length sequences");
    }
    Eigen::MatrixXd features(dim, static_cast<Eigen::Index>(samples.size()));
    std::size_t begin = 0;
    while (begin < order.size()) {
        const auto len = samples[order[begin]]->size();
        std::size_t end = begin;
        while (end < order.size() && samples[order[end]]->size() == len &&
               static_cast<Eigen::Index>(end - begin) < batch_size) {
            ++end;
        }
        std::vector<const Sequence*> group;
        for (std::size_t i = begin; i < end; ++i) group.push_back(samples[order[i]]);
        Eigen::MatrixXd block(dim, static_cast<Eigen::Index>(group.size()));
        run_group(group, aggregation, block, {}, false, nullptr);
        for (std::size_t i = begin; i < end; ++i) {
            features.col(static_cast<Eigen::Index>(order[i])) = block.col(static_cast<Eigen::Index>(i - begin));
        }
        begin = end;
    }
    return features;
}

void DeepReservoir::calibrate(std::span<const Sequence> warmup, int iterations) {
    if (warmup.empty()) throw CalibrationError("calibration needs warm-up sequences");
    if (iterations < 1) throw InvalidParameter("calibration needs at least one iteration");
    std::vector<const Sequence*> ptrs;
    for (const auto& s : warmup) {
        if (s.empty()) throw CalibrationError("empty warm-up sequence");
        ptrs.push_back(&s);
    }
    std::stable_sort(ptrs.begin(), ptrs.end(), [](const Sequence* a, const Sequence* b) { return a->size() < b->size(); });

    auto for_each_group = [&](const auto& fn) {
        std::size_t begin = 0;
        while (begin < ptrs.size()) {
            std::size_t end = begin;
            while (end < ptrs.size() && ptrs[end]->size() == ptrs[begin]->size()) ++end;
            fn(std::span<const Sequence* const>(ptrs.data() + begin, end - begin));
            begin = end;
        }
    };

    // Provisional exposure from the first time step of the warm-up drive.
    std::vector<double> provisional(layers_.size(), 0.0);
    for_each_group([&](std::span<const Sequence* const> group) {
        Eigen::MatrixXd scratch(static_cast<Eigen::Index>(state_dim()), static_cast<Eigen::Index>(group.size()));
        run_group(group, Aggregation::final_step, scratch, {}, true, &provisional);
    });
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (!(provisional[l] > 0.0)) {
            throw CalibrationError("layer " + std::to_string(l + 1) + " sees zero intensity on all warm-up data");
        }
        set_scale(static_cast<int>(l), provisional[l]);
    }

    for (int it = 1; it < iterations; ++it) {
        std::vector<std::vector<double>> pooled(layers_.size());
        const Collector collect = [&](int l, const Eigen::MatrixXd& intensity) {
            auto& p = pooled[static_cast<std::size_t>(l)];
            p.insert(p.end(), intensity.data(), intensity.data() + intensity.size());
        };
        for_each_group([&](std::span<const Sequence* const> group) {
            Eigen::MatrixXd scratch(static_cast<Eigen::Index>(state_dim()), static_cast<Eigen::Index>(group.size()));
            run_group(group, Aggregation::final_step, scratch, collect, false, nullptr);
        });
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const double s = percentile_value(std::move(pooled[l]), config_.calibration_percentile);
            if (!(s > 0.0)) {
                throw CalibrationError("layer " + std::to_string(l + 1) + " sees zero intensity on all warm-up data");
            }
            set_scale(static_cast<int>(l), s);
        }
    }
}

}  // namespace photorc
