#pragma once
// Minimal deterministic work sharing.  Each index writes only its own slot,
// so results are identical regardless of the worker count.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mscat {

// worker count from MSCAT_WORKERS, default 1; clamped to [1, hardware]
inline int worker_count() {
    const char* env = std::getenv("MSCAT_WORKERS");
    int n = 1;
    if (env != nullptr) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = static_cast<int>(v);
    }
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw > 0 && n > hw) n = hw;
    return n;
}

template <class Body>
void parallel_for(int count, Body&& body) {
    const int workers = std::min(worker_count(), std::max(count, 1));
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mscat
