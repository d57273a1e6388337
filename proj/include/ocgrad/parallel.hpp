#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace ocgrad {

/// Fork-join over the index range [begin, end): the range is split into at
/// most `workers` contiguous chunks, fn(worker, chunk_begin, chunk_end) runs
/// once per chunk (chunk 0 on the calling thread), and the call returns only
/// after every chunk has finished. Worker indices are distinct, so fn may use
/// them to address per-worker scratch. The chunk layout never affects which
/// fn invocation handles a given index's output, which keeps results bitwise
/// independent of the worker count.
template <typename Fn>
void for_each_chunk(std::size_t begin, std::size_t end, unsigned workers, Fn&& fn) {
    const std::size_t n = end - begin;
    if (n == 0) return;
    const std::size_t used = std::min<std::size_t>(workers, n);
    if (used <= 1) {
        fn(0u, begin, end);
        return;
    }
    const std::size_t chunk = (n + used - 1) / used;
    {
        std::vector<std::jthread> forked;
        forked.reserve(used - 1);
        for (std::size_t k = 1; k < used; ++k) {
            const std::size_t b = begin + k * chunk;
            const std::size_t e = std::min(end, b + chunk);
            if (b >= e) break;
            forked.emplace_back([&fn, k, b, e] { fn(static_cast<unsigned>(k), b, e); });
        }
        fn(0u, begin, begin + chunk);
    }  // join
}

}  // namespace ocgrad
