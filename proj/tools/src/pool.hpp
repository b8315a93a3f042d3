// SPDX-License-Identifier: Apache-2.0
//
// Bounded worker pool for independent sweep points.

#ifndef STCLOC_TOOLS_POOL_HPP
#define STCLOC_TOOLS_POOL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace stcloc::cli {

// Size from STCLOC_WORKERS, else the hardware concurrency capped at 8. Throws
// std::invalid_argument when the variable is set but not a positive integer.
std::size_t worker_count();

// Calls fn(i) for every i < count on at most `workers` threads. Indices are claimed in
// order; the first exception (lowest index) is rethrown after all workers stop.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)> &fn)
{
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;)
        {
            try
            {
                fn(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> threads;
        for (std::size_t t = 1; t < std::min(workers, count); ++t)
            threads.emplace_back(work);
        work();
    }
    for (const auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace stcloc::cli

#endif
