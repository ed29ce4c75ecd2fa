// matfit is Copyright(c) 2026 the matfit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef MATFIT_PARALLEL_HPP
#define MATFIT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace matfit {

// Process-wide thread cap, settable from the CLI (--threads).
inline int& thread_cap() {
    static int cap = int(std::thread::hardware_concurrency());
    return cap;
}

// Static block partition of [0, n) over worker threads. Workers write to
// disjoint indices only; reductions are the caller's job (do them serially
// so results stay independent of the thread count).
inline void parallel_for(int n, const std::function<void(int)>& fn) {
    int nthreads = std::max(1, std::min(thread_cap(), n));
    if (nthreads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    int chunk = (n + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
        int lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace matfit

#endif
