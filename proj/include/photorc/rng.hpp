#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace photorc {

/// Portable random stream.
///
/// The standard distributions (normal_distribution, shuffle, ...) are
/// implementation-defined, so results would differ between standard
/// libraries. Every draw in the library goes through this class instead:
/// raw 64-bit words come from std::mt19937_64 (fully specified by the
/// standard) and all derived variates use the fixed mappings below.
///
///   uniform()   : (word >> 11) * 2^-53, in [0, 1)
///   below(n)    : rejection sampling on the top bits, in [0, n)
///   normal()    : Box-Muller, both variates of a pair are used in order
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t below(std::uint64_t n);

    double normal();

    /// Fisher-Yates, iterating from the back.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& items) { shuffle(std::span<T>(items)); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent child seed from a parent seed and a stream tag
/// (splitmix64 finalizer over the pair).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace photorc
