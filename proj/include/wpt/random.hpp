#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace wpt::random {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent engine for trial `trial` of run `seed`; does not depend on scheduling.
inline std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial)
{
    return std::mt19937_64(splitmix64(seed ^ splitmix64(trial)));
}

/// Worker count: WPT_THREADS if set, else hardware concurrency.
inline unsigned thread_count()
{
    if (const char* env = std::getenv("WPT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(i) for i in [0, n). Each index is handled by exactly one thread,
/// so results written to slot i do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = 0)
{
    if (threads == 0) threads = thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t lo = n * w / threads;
        const std::size_t hi = n * (w + 1) / threads;
        pool.emplace_back([lo, hi, w, &body, &errors] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace wpt::random
