// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace evmscan
{
/// splitmix64. Used instead of the std distributions, whose output is
/// implementation-defined, so seeded results are identical across toolchains.
class SplitMix64
{
public:
    explicit SplitMix64(uint64_t seed) noexcept : state_(seed) {}

    uint64_t next() noexcept
    {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n), n > 0.
    uint64_t below(uint64_t n) noexcept
    {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do
            v = next();
        while (v >= limit);
        return v % n;
    }

    /// Uniform in [lo, hi].
    uint64_t between(uint64_t lo, uint64_t hi) noexcept { return lo + below(hi - lo + 1); }

    bool chance(double p) noexcept { return unit() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) noexcept
    {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

private:
    uint64_t state_;
};

inline uint64_t fnv1a64(std::string_view bytes) noexcept
{
    uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : bytes)
    {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Whole-file read; returns false if the file cannot be opened.
inline bool read_file(const std::string& path, std::string& out)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        return false;
    out.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
    return !is.bad();
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
/// to per-index slots. The exception of the lowest failing index is rethrown.
template <typename F>
void parallel_for(size_t n, size_t jobs, F&& fn)
{
    jobs = std::max<size_t>(1, std::min(jobs, n));
    if (jobs == 1)
    {
        for (size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::mutex m;
    size_t next = 0;
    auto worker = [&] {
        for (;;)
        {
            size_t i;
            {
                std::lock_guard lock(m);
                if (next >= n)
                    return;
                i = next++;
            }
            try
            {
                fn(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (size_t t = 0; t < jobs; ++t)
        threads.emplace_back(worker);
    for (auto& t : threads)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace evmscan
