#ifndef PKGTRIAGE_SRC_PARALLEL_HPP
#define PKGTRIAGE_SRC_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pkgtriage::detail {

// Runs fn(i) for i in [0, n). Each index writes only its own output slot, so
// the result is identical to a sequential loop regardless of scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) threads.emplace_back(work);
    work();
    for (auto& t : threads) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace pkgtriage::detail

#endif // PKGTRIAGE_SRC_PARALLEL_HPP
