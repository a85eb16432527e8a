#include "cohesim/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace cohesim {

namespace {
std::atomic<unsigned> g_limit{0};
}

void set_thread_limit(unsigned limit) { g_limit = limit; }

unsigned thread_count()
{
    const unsigned n = base_thread_count();
    const unsigned limit = g_limit;
    return limit > 0 ? std::min(n, limit) : n;
}

unsigned base_thread_count()
{
    if (const char* env = std::getenv("COHESIM_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_chunks(std::size_t n, unsigned workers,
                     const std::function<void(unsigned, std::size_t, std::size_t)>& fn)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    const std::size_t chunk = (n + workers - 1) / workers;
    if (workers == 1) {
        fn(0, 0, n);
        return;
    }
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            pool.emplace_back([&fn, &failures, w, begin, end] {
                try {
                    fn(w, begin, end);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
}

}  // namespace cohesim
