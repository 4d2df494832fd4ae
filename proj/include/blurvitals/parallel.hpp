#pragma once

#include <cstddef>
#include <cstdlib>
#include <memory>
#include <string>

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

namespace blurvitals {

/// Runs fn(i) for i in [0, n). Every index must write only its own output
/// slot, which keeps results independent of the schedule.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& r) {
        for (std::size_t i = r.begin(); i != r.end(); ++i) fn(i);
    });
}

/// Caps worker threads from BLURVITALS_THREADS; keep the returned handle alive.
inline std::unique_ptr<tbb::global_control> thread_limit_from_env() {
    const char* env = std::getenv("BLURVITALS_THREADS");
    if (env == nullptr || *env == '\0') return nullptr;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || n < 1) return nullptr;
    return std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                 static_cast<std::size_t>(n));
}

} // namespace blurvitals
