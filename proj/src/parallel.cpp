#include "wavespeed/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace wavespeed {

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::clamp<unsigned>(jobs, 1u, 256u));
    if (threads == 1 || count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::min(threads, count) - 1);
        for (std::size_t k = 1; k < std::min(threads, count); ++k) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace wavespeed
