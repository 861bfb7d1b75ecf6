#pragma once

#include <algorithm>
#include <atomic>
#include <thread>

namespace fraclap {

namespace detail {
inline std::atomic<int>& thread_count_storage() {
    static std::atomic<int> n{0}; // 0 = not set yet
    return n;
}
} // namespace detail

// Worker count used by kernel assembly and handed to the FFT backend.
inline int thread_count() {
    int n = detail::thread_count_storage().load(std::memory_order_relaxed);
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void set_thread_count(int n) {
    detail::thread_count_storage().store(std::max(1, n), std::memory_order_relaxed);
}

} // namespace fraclap
