#include <doctest.h>

#include "photorc/errors.hpp"
#include "photorc/reservoir.hpp"
#include "photorc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <vector>

using namespace photorc;

namespace {

// Independent basket bits of level/255 for n = 10 bins, by integer
// cross-multiplication against the window |x - (2i+1)/20| <= 9/40.
std::vector<int> oracle_bits(int level) {
    std::vector<int> b(10);
    for (int i = 0; i < 10; ++i) b[static_cast<std::size_t>(i)] = std::llabs(40LL * level - 510LL * (2 * i + 1)) <= 255LL * 9;
    return b;
}

int oracle_quantize(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return static_cast<int>(std::floor(v * 255.0 + 0.5));
}

Sequence random_sequence(Rng& rng, int steps, int dim) {
    Sequence s;
    for (int t = 0; t < steps; ++t) {
        Eigen::VectorXd f(dim);
        for (int i = 0; i < dim; ++i) f(i) = rng.uniform();
        s.push_back(f);
    }
    return s;
}

DeepConfig small_config(int depth, int total) {
    DeepConfig c;
    c.depth = depth;
    c.total_neurons = total;
    c.bias_width = 40;
    c.optics_seed = 7;
    c.bias_seed = 8;
    return c;
}

DeepReservoir calibrated(const DeepConfig& c, int dim, std::uint64_t seed = 1) {
    DeepReservoir res(c, dim);
    Rng rng(seed);
    std::vector<Sequence> warm;
    for (int i = 0; i < 40; ++i) warm.push_back(random_sequence(rng, 4, dim));
    res.calibrate(warm);
    return res;
}

}  // namespace

TEST_CASE("allocation examples") {
    CHECK(allocate_neurons(500, 5, 1.2, Allocation::decreasing) == std::vector<int>{250, 100, 75, 50, 25});
    CHECK(allocate_neurons(500, 5, 1.2, Allocation::increasing) == std::vector<int>{25, 50, 75, 100, 250});
    CHECK(allocate_neurons(500, 5, 1.2, Allocation::uniform) == std::vector<int>{100, 100, 100, 100, 100});
    for (auto s : {Allocation::decreasing, Allocation::uniform, Allocation::increasing}) {
        CHECK(allocate_neurons(500, 1, 1.2, s) == std::vector<int>{500});
    }
    CHECK(allocate_neurons(1500, 3, 1.2, Allocation::decreasing) == std::vector<int>{900, 375, 225});
    CHECK_THROWS_AS(allocate_neurons(100, 5, 1.2, Allocation::decreasing), AllocationError);
    CHECK_THROWS_AS(allocate_neurons(500, 0, 1.2, Allocation::decreasing), InvalidParameter);
}

TEST_CASE("allocation budget property") {
    for (int depth = 1; depth <= 6; ++depth) {
        for (int total = 25 * depth; total <= 3000; total += 25) {
            std::vector<int> sums;
            for (auto s : {Allocation::decreasing, Allocation::uniform, Allocation::increasing}) {
                std::vector<int> n;
                try {
                    n = allocate_neurons(total, depth, 1.2, s);
                } catch (const AllocationError&) {
                    continue;
                }
                REQUIRE(n.size() == static_cast<std::size_t>(depth));
                for (int v : n) {
                    CHECK(v >= 25);
                    CHECK(v % 25 == 0);
                }
                const int sum = std::accumulate(n.begin(), n.end(), 0);
                INFO("N=" << total << " L=" << depth);
                CHECK(std::abs(sum - total) < 25 * depth);
                sums.push_back(sum);
            }
            for (int s : sums) CHECK(s == sums.front());
        }
    }
}

TEST_CASE("leakage schedule") {
    CHECK(leakage_schedule(0.95, 0.65, 5) == std::vector<double>{0.95, 0.875, 0.80, 0.725, 0.65});
    CHECK(leakage_schedule(0.95, 0.65, 1) == std::vector<double>{0.95});
    CHECK(leakage_schedule(0.65, 0.65, 4) == std::vector<double>(4, 0.65));
    for (int depth = 2; depth <= 9; ++depth) {
        for (auto [a, b] : {std::pair{0.95, 0.65}, std::pair{0.65, 0.95}, std::pair{0.3, 1.0}}) {
            const auto s = leakage_schedule(a, b, depth);
            CHECK(s.front() == a);
            CHECK(s.back() == b);
            for (std::size_t l = 1; l < s.size(); ++l) CHECK((s[l] - s[l - 1]) * (b - a) >= 0.0);
        }
    }
    CHECK_THROWS_AS(leakage_schedule(0.0, 0.5, 3), InvalidParameter);
    CHECK_THROWS_AS(leakage_schedule(0.5, 1.1, 3), InvalidParameter);
}

TEST_CASE("bias fractions") {
    const auto b = bias_fractions(BiasProfile::mild_increasing, 5, 0.10, 0.05);
    for (std::size_t l = 0; l < 5; ++l) CHECK(b[l] == doctest::Approx(0.10 + 0.05 * static_cast<double>(l)));
    CHECK(bias_fractions(BiasProfile::uniform, 3, 0.10, 0.05) == std::vector<double>(3, 0.10));
    CHECK_THROWS_AS(bias_fractions(BiasProfile::mild_increasing, 30, 0.10, 0.05), InvalidParameter);
}

TEST_CASE("layer geometry and feature dimensions") {
    DeepConfig c = small_config(5, 500);
    DeepReservoir res(c, 3);
    CHECK(res.state_dim() == 500);
    CHECK(res.layer_optics(0).input_cols.size == 30);
    CHECK(res.layer_optics(1).input_cols.size == 2500);
    CHECK(res.layer_optics(4).state_cols.size == 250);
    for (int l = 0; l < 5; ++l) {
        CHECK(res.layer_optics(l).first_col() == 0);
        CHECK(res.layer_optics(l).bias_cols.size == 40);
        if (l > 0) CHECK(res.layer_optics(l).row_begin == res.layer_optics(l - 1).row_begin + res.layer_optics(l - 1).n_rows);
    }
    CHECK(res.feature_dim(Aggregation::final_step, 130) == 500);
    CHECK(res.feature_dim(Aggregation::mean, 130) == 500);
    CHECK(res.feature_dim(Aggregation::concat_all_steps, 4) == 2000);
    const auto [rows, cols] = transmission_shape(c, 3);
    CHECK(rows == 500);
    CHECK(cols == 2500 + 1000 + 40);
}

TEST_CASE("uncalibrated reservoir refuses to step") {
    DeepReservoir res(small_config(1, 25), 2);
    auto s = res.initial_state();
    const std::vector<double> x{0.1, 0.2};
    CHECK_THROWS_AS(res.step_deep(x, s), StateError);
    CHECK_THROWS_AS(res.set_scale(0, 0.0), CalibrationError);
}

TEST_CASE("hand-traced single-layer update") {
    DeepConfig c = small_config(1, 25);
    c.alpha_first = c.alpha_last = 0.8;
    c.bias_width = 10;
    DeepReservoir res(c, 2);
    const double scale = 30.0;
    res.set_scale(0, scale);
    const auto& m = res.transmission();
    const auto& bias = res.layer_optics(0).bias_pattern.bits;

    std::vector<int> r(25, 0);
    auto state = res.initial_state();
    const std::vector<std::vector<int>> inputs{{0, 255}, {128, 64}, {200, 17}, {3, 3}};
    for (const auto& in : inputs) {
        // Pattern [input | state | bias] built from the oracle encoder.
        std::vector<int> p;
        for (int level : in) for (int b : oracle_bits(level)) p.push_back(b);
        for (int level : r) for (int b : oracle_bits(level)) p.push_back(b);
        for (auto b : bias) p.push_back(b);
        REQUIRE(p.size() == static_cast<std::size_t>(m.cols()));
        std::vector<int> next(25);
        for (int k = 0; k < 25; ++k) {
            std::complex<double> f = 0.0;
            for (std::size_t j = 0; j < p.size(); ++j) if (p[j]) f += m.at(k, static_cast<Eigen::Index>(j));
            const int v = oracle_quantize(std::norm(f) / scale);
            next[static_cast<std::size_t>(k)] = oracle_quantize(0.2 * r[static_cast<std::size_t>(k)] / 255.0 + 0.8 * v / 255.0);
        }
        r = next;

        const std::vector<double> x{in[0] / 255.0, in[1] / 255.0};
        res.step_deep(x, state);
        for (int k = 0; k < 25; ++k) CHECK(state.r[0].levels[static_cast<std::size_t>(k)] == r[static_cast<std::size_t>(k)]);
    }
    CHECK(state.time_index == 4);
}

TEST_CASE("alpha = 1 keeps no memory") {
    DeepConfig c = small_config(1, 50);
    c.alpha_first = c.alpha_last = 1.0;
    auto res = calibrated(c, 3);
    Rng rng(5);
    auto state = res.initial_state();
    for (int t = 0; t < 5; ++t) {
        const auto frame = random_sequence(rng, 1, 3)[0];
        const auto u = encode_vector(std::span<const double>(frame.data(), 3), res.codec());
        BinaryPattern p = u;
        const auto& opt = res.layer_optics(0);
        p.bits.insert(p.bits.end(), state.x[0].bits.begin(), state.x[0].bits.end());
        p.bits.insert(p.bits.end(), opt.bias_pattern.bits.begin(), opt.bias_pattern.bits.end());
        const auto detected = detect(propagate(p, res.transmission(), opt), opt.scale);
        res.step_layer(0, u, state);
        CHECK(state.r[0] == detected);
    }
}

TEST_CASE("deep step feeds layer l the same-step state of layer l-1") {
    auto res = calibrated(small_config(3, 300), 4);
    Rng rng(2);
    auto state = res.initial_state();
    for (int t = 0; t < 6; ++t) {
        const auto frame = random_sequence(rng, 1, 4)[0];
        std::vector<BinaryPattern> seen(3);
        std::vector<ReservoirState> snapshots;
        res.step_deep(std::span<const double>(frame.data(), 4), state,
                      [&](int l, const BinaryPattern& u) { seen[static_cast<std::size_t>(l)] = u; });
        CHECK(seen[0] == encode_vector(std::span<const double>(frame.data(), 4), res.codec()));
        CHECK(seen[1] == state.x[0]);
        CHECK(seen[2] == state.x[1]);
        for (int l = 0; l < 3; ++l) CHECK(state.x[static_cast<std::size_t>(l)] == encode_levels(state.r[static_cast<std::size_t>(l)], res.codec()));
    }
}

TEST_CASE("depth-1 deep step equals one layer step") {
    auto res = calibrated(small_config(1, 75), 2);
    auto a = res.initial_state();
    auto b = res.initial_state();
    const std::vector<double> x{0.3, 0.9};
    res.step_deep(x, a);
    res.step_layer(0, encode_vector(x, res.codec()), b);
    CHECK(a.r == b.r);
    CHECK(a.x == b.x);
}

TEST_CASE("states stay bounded and obey the convexity bound") {
    DeepConfig c = small_config(3, 300);
    auto res = calibrated(c, 5);
    const auto layers = c.layers();
    Rng rng(44);
    auto state = res.initial_state();
    for (int t = 0; t < 30; ++t) {
        const auto prev = state.r;
        const auto frame = random_sequence(rng, 1, 5)[0];
        res.step_deep(std::span<const double>(frame.data(), 5), state);
        for (std::size_t l = 0; l < 3; ++l) {
            const double a = layers[l].alpha;
            for (std::size_t k = 0; k < state.r[l].size(); ++k) {
                const double now = dequantize8(state.r[l].levels[k]);
                CHECK(now >= 0.0);
                CHECK(now <= 1.0);
                CHECK(now <= (1 - a) * dequantize8(prev[l].levels[k]) + a + 1.0 / 255.0);
            }
        }
    }
}

TEST_CASE("identical configs give bit-identical trajectories") {
    DeepConfig c = small_config(2, 150);
    auto a = calibrated(c, 3);
    auto b = calibrated(c, 3);
    CHECK(a.scales() == b.scales());
    Rng rng(9);
    const auto seq = random_sequence(rng, 12, 3);
    Trajectory ta, tb;
    a.run_sequence(seq, Aggregation::final_step, &ta);
    b.run_sequence(seq, Aggregation::final_step, &tb);
    CHECK(ta == tb);
    REQUIRE(ta.size() == 12);

    std::ostringstream os;
    write_trajectory(os, ta);
    const auto text = os.str();
    CHECK(text.rfind("step,layer,neuron,level\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 12 * 150);
}

TEST_CASE("aggregations") {
    auto res = calibrated(small_config(2, 150), 3);
    Rng rng(10);
    const auto one = random_sequence(rng, 1, 3);
    CHECK(res.run_sequence(one, Aggregation::final_step) == res.run_sequence(one, Aggregation::mean));

    const auto four = random_sequence(rng, 4, 3);
    Trajectory tr;
    const auto concat = res.run_sequence(four, Aggregation::concat_all_steps, &tr);
    CHECK(concat.size() == 4 * 150);
    const auto final = res.run_sequence(four, Aggregation::final_step);
    CHECK(concat.tail(150) == final);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(150);
    for (int t = 0; t < 4; ++t) mean += concat.segment(150 * t, 150);
    CHECK((res.run_sequence(four, Aggregation::mean) - mean / 4.0).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK_THROWS_AS(res.run_sequence(Sequence{}, Aggregation::final_step), InvalidParameter);
}

TEST_CASE("batched driver matches the sequential path") {
    auto res = calibrated(small_config(3, 300), 4);
    Rng rng(13);
    std::vector<Sequence> seqs;
    for (int i = 0; i < 9; ++i) seqs.push_back(random_sequence(rng, 3 + i % 3, 4));
    std::vector<const Sequence*> ptrs;
    for (const auto& s : seqs) ptrs.push_back(&s);
    for (auto agg : {Aggregation::final_step, Aggregation::mean}) {
        const auto batch = res.run_batch(ptrs, agg, 4);
        for (std::size_t i = 0; i < seqs.size(); ++i) {
            CHECK((batch.col(static_cast<Eigen::Index>(i)) - res.run_sequence(seqs[i], agg)).cwiseAbs().maxCoeff() <= 1e-15);
        }
    }
    std::vector<Sequence> equal;
    for (int i = 0; i < 5; ++i) equal.push_back(random_sequence(rng, 4, 4));
    std::vector<const Sequence*> eptrs;
    for (const auto& s : equal) eptrs.push_back(&s);
    const auto batch = res.run_batch(eptrs, Aggregation::concat_all_steps, 2);
    for (std::size_t i = 0; i < equal.size(); ++i) {
        CHECK(batch.col(static_cast<Eigen::Index>(i)) == res.run_sequence(equal[i], Aggregation::concat_all_steps));
    }
}

TEST_CASE("calibration sets every layer's exposure") {
    auto res = calibrated(small_config(3, 300), 4);
    CHECK(res.calibrated());
    for (double s : res.scales()) CHECK(s > 0.0);
    DeepReservoir raw(small_config(3, 300), 4);
    CHECK_THROWS(raw.calibrate(std::vector<Sequence>{}));
}
