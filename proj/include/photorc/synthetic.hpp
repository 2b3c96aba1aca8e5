#pragma once

#include "photorc/features.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace photorc {

enum class SyntheticKind { delayed_recall, noisy_channel };

SyntheticKind parse_synthetic_kind(const std::string& s);
std::string to_string(SyntheticKind k);

struct SyntheticParams {
    int classes = 4;
    int per_class = 50;
    int length = 10;
    int dim = 8;
    int delay = 3;
    double noise = 0.2;
    double distractor = 0.0;  // distractor frames are uniform in [0, distractor]
};

/// Balanced, seeded sequence-classification data in [0, 1].
///
/// Every class owns a prototype frame drawn uniformly in [0, 1]^dim.
/// delayed-recall: frames are distractors except frame
///   length - 1 - delay, which is the class prototype plus Gaussian noise;
///   a final-step readout must remember the cue for `delay` steps.
/// noisy-channel: every frame is the prototype plus Gaussian noise.
/// Samples are shuffled across classes; group is the sample's position
/// modulo 10.
std::vector<SequenceSample> synthetic_task(SyntheticKind kind, const SyntheticParams& params, std::uint64_t seed);

}  // namespace photorc
