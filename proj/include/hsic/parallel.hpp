#pragma once

#include <cstddef>
#include <functional>

namespace hsic {

/// Name of the environment variable that caps worker threads.
inline constexpr const char* kThreadCapEnv = "HSIC_MAX_THREADS";

/// Resolves a requested thread count: 0 means hardware concurrency. The
/// result is capped by HSIC_MAX_THREADS when set and is always >= 1.
unsigned resolve_threads(int requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Callers
/// write results into per-index slots, so output never depends on the
/// schedule. If any call throws, every index still runs and the exception
/// from the lowest failing index is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace hsic
