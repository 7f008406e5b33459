#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

// Deterministic work distribution: fn(i) must write its result into a
// preallocated slot indexed by i. Tasks are split into contiguous chunks, so
// observable results never depend on the worker count or on scheduling.

namespace slowenv {

inline int default_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (threads < 1) threads = 1;
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    std::size_t per = count / nt;
    std::size_t extra = count % nt;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < nt; ++w) {
        std::size_t len = per + (w < extra ? 1 : 0);
        std::size_t end = begin + len;
        pool.emplace_back([&, w, begin, end]() {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace slowenv
