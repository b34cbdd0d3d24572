#include "hsic/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace hsic {

unsigned resolve_threads(int requested) {
    unsigned threads = requested > 0 ? static_cast<unsigned>(requested)
                                     : std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv(kThreadCapEnv)) {
        char* end = nullptr;
        const long value = std::strtol(cap, &end, 10);
        if (end != cap && value > 0) {
            threads = std::min(threads, static_cast<unsigned>(value));
        }
    }
    return std::max(1u, threads);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(std::min<std::size_t>(count, 1024)));
    if (threads == 1) {
        std::exception_ptr first;
        for (std::size_t i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                if (!first) first = std::current_exception();
            }
        }
        if (first) std::rethrow_exception(first);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = std::numeric_limits<std::size_t>::max();
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace hsic
