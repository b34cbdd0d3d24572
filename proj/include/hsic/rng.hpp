#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace hsic {

/// Bumped whenever any variate algorithm below changes, since study outputs
/// are only reproducible within one version.
inline constexpr int kVariateVersion = 1;

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Folds a sequence of words into one seed: h = mix64(h ^ mix64(word + i))
/// starting from a fixed constant. Distinct sequences of equal length give
/// distinct seeds with overwhelming probability.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) noexcept;

/// Platform-independent random stream. The engine is mt19937_64, whose
/// output sequence is fixed by the C++ standard; every variate is built
/// here rather than with <random> distributions, which are
/// implementation-defined.
///
///   uniform()      53-bit fraction in [0, 1)
///   normal()       Marsaglia polar method, spare value cached
///   student_t4()   Z / sqrt(V/4), V a sum of four squared normals
///   chi_sq1()      Z^2
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double normal();
    double student_t4();
    double chi_sq1();

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Fisher-Yates shuffle from the last element down.
    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hsic
