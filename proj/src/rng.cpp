#include "hsic/rng.hpp"

#include <cmath>

namespace hsic {

std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    std::uint64_t i = 0;
    for (std::uint64_t w : words) {
        h = mix64(h ^ mix64(w + i));
        ++i;
    }
    return h;
}

double RandomStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double RandomStream::student_t4() {
    const double z = normal();
    double v = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double g = normal();
        v += g * g;
    }
    return z / std::sqrt(v / 4.0);
}

double RandomStream::chi_sq1() {
    const double z = normal();
    return z * z;
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        const std::uint64_t r = engine_();
        if (r >= threshold) return r % bound;
    }
}

}  // namespace hsic
