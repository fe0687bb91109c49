// sweep.hpp — run independent grid points on a small worker pool, gather in grid order
#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace dsm {

struct PointOutcome {
    bool ok{true};
    std::string error;
};

// Evaluates fn(i) for i in [0, count) on `threads` workers. Results are written by
// the caller into pre-sized storage inside fn; outcomes are returned in index order,
// so output emission stays deterministic regardless of thread count.
inline std::vector<PointOutcome> run_sweep(int count, int threads,
                                           const std::function<void(int)>& fn) {
    std::vector<PointOutcome> outcomes(count);
    if (threads < 1) threads = 1;
    std::atomic<int> next{0};
    auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (const std::exception& e) {
                outcomes[i].ok = false;
                outcomes[i].error = e.what();
            } catch (...) {
                outcomes[i].ok = false;
                outcomes[i].error = "unknown error";
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return outcomes;
}

}  // namespace dsm
