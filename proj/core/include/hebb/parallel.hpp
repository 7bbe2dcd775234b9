#ifndef HEBB_PARALLEL_HPP
#define HEBB_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace hebb {

// Static chunked parallel-for. Results must be merged by the caller in index
// order so worker count never changes emitted numbers.
inline void parallel_for(size_t n, size_t workers, const std::function<void(size_t, size_t)>& body)
{
    if (workers <= 1 || n <= 1) {
        body(0, n);
        return;
    }
    if (workers > n)
        workers = n;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const size_t chunk = (n + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        const size_t begin = w * chunk;
        const size_t end = std::min(n, begin + chunk);
        if (begin >= end)
            break;
        threads.emplace_back(body, begin, end);
    }
    for (auto& t : threads)
        t.join();
}

} // namespace hebb

#endif
