#include "photorc/protocols.hpp"

#include "photorc/errors.hpp"
#include "photorc/rng.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace photorc {

namespace {

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    Rng rng(seed);
    rng.shuffle(p);
    return p;
}

}  // namespace

std::vector<Split> cv_mnist_7fold(std::size_t pool_size, std::uint64_t seed) {
    constexpr std::size_t kPool = 70000;
    constexpr std::size_t kFolds = 7;
    constexpr std::size_t kBlock = 10000;
    if (pool_size != kPool) {
        throw ProtocolError("7-fold MNIST protocol needs exactly 70000 samples, got " + std::to_string(pool_size));
    }
    const auto perm = permutation(pool_size, seed);
    std::vector<Split> splits;
    for (std::size_t k = 0; k < kFolds; ++k) {
        Split s;
        s.name = "fold" + std::to_string(k + 1);
        for (std::size_t i = 0; i < pool_size; ++i) {
            (i / kBlock == k ? s.test : s.train).push_back(perm[i]);
        }
        splits.push_back(std::move(s));
    }
    return splits;
}

GroupedFolds cv_ti46_grouped(std::span<const int> labels, std::uint64_t seed, int folds) {
    if (folds < 2) throw ProtocolError("grouped protocol needs at least 2 folds");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    if (by_class.empty()) throw ProtocolError("grouped protocol on an empty dataset");
    const std::size_t per_class = by_class.begin()->second.size();
    bool balanced = true;
    for (const auto& [c, idx] : by_class) balanced = balanced && idx.size() == per_class;
    if (!balanced || labels.size() % static_cast<std::size_t>(folds) != 0) {
        std::ostringstream msg;
        msg << "grouped protocol needs balanced classes and a sample count divisible by " << folds << "; class counts:";
        for (const auto& [c, idx] : by_class) msg << ' ' << c << '=' << idx.size();
        throw ProtocolError(msg.str());
    }

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(folds));
    std::size_t slot = 0;
    for (auto& [c, idx] : by_class) {
        rng.shuffle(idx);
        for (auto i : idx) {
            groups[slot % groups.size()].push_back(i);
            ++slot;
        }
    }
    for (auto& g : groups) rng.shuffle(g);

    GroupedFolds out;
    out.paper_scale = labels.size() == 500 && by_class.size() == 10 && folds == 10;
    for (std::size_t k = 0; k < groups.size(); ++k) {
        Split s;
        s.name = "group" + std::to_string(k + 1);
        s.test = groups[k];
        for (std::size_t j = 0; j < groups.size(); ++j) {
            if (j != k) s.train.insert(s.train.end(), groups[j].begin(), groups[j].end());
        }
        out.splits.push_back(std::move(s));
    }
    return out;
}

std::vector<Split> cv_kth_central(std::span<const std::string> source_ids, std::span<const int> segments) {
    if (source_ids.size() != segments.size()) throw ProtocolError("source ids and segment tags differ in length");
    std::map<std::string, std::vector<int>> seen;
    for (std::size_t i = 0; i < segments.size(); ++i) seen[source_ids[i]].push_back(segments[i]);
    for (auto& [src, segs] : seen) {
        std::sort(segs.begin(), segs.end());
        if (segs != std::vector<int>{1, 2, 3, 4}) {
            std::ostringstream msg;
            msg << "recording '" << src << "' must contribute segments 1..4 exactly once, found";
            for (int s : segs) msg << ' ' << s;
            throw ProtocolError(msg.str());
        }
    }
    std::vector<Split> splits;
    for (int test_segment : {2, 3}) {
        Split s;
        s.name = test_segment == 2 ? "segment2" : "segment3";
        for (std::size_t i = 0; i < segments.size(); ++i) {
            (segments[i] == test_segment ? s.test : s.train).push_back(i);
        }
        splits.push_back(std::move(s));
    }
    return splits;
}

Split holdout_split(std::size_t pool_size, std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
    if (n_train + n_test > pool_size || n_train == 0 || n_test == 0) {
        throw ProtocolError("holdout of " + std::to_string(n_train) + " + " + std::to_string(n_test) +
                            " samples does not fit a pool of " + std::to_string(pool_size));
    }
    const auto perm = permutation(pool_size, seed);
    Split s;
    s.name = "holdout";
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                  perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
    return s;
}

}  // namespace photorc
