#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace photorc {

struct Split {
    std::string name;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded partition of a 70000-sample pool into 7 disjoint test blocks of
/// 10000; each fold trains on the other 60000.
std::vector<Split> cv_mnist_7fold(std::size_t pool_size, std::uint64_t seed);

struct GroupedFolds {
    std::vector<Split> splits;
    bool paper_scale = false;  // 500 samples, 10 classes, groups of 50
};

/// Class-balanced grouping into `folds` groups; fold k tests group k.
///
/// Each class's samples are shuffled and dealt round-robin into the groups
/// (the dealing position carries over between classes), then every group's
/// order is shuffled once. With 500 samples of 10 digits this yields groups
/// of 50 with 5 samples of every digit.
GroupedFolds cv_ti46_grouped(std::span<const int> labels, std::uint64_t seed, int folds = 10);

/// Two folds over 4-segment recordings: fold A tests segment 2, fold B
/// tests segment 3; the other three segments train.
std::vector<Split> cv_kth_central(std::span<const std::string> source_ids, std::span<const int> segments);

/// Seeded subsample of a pool: the first n_train of a permutation train, the
/// next n_test test.
Split holdout_split(std::size_t pool_size, std::size_t n_train, std::size_t n_test, std::uint64_t seed);

}  // namespace photorc
