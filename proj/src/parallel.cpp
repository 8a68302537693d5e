#include "mobs/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "mobs/errors.hpp"

namespace mobs {

void parallel_for(Eigen::Index count, int threads,
                  const std::function<void(Eigen::Index)>& fn) {
    if (count <= 0) return;
    if (threads < 1) throw InvalidArgument("parallel_for: threads must be >= 1");
    const auto workers = static_cast<int>(std::min<Eigen::Index>(threads, count));
    if (workers == 1) {
        for (Eigen::Index i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<Eigen::Index> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const Eigen::Index i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count, std::memory_order_relaxed);  // drain remaining work
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace mobs
