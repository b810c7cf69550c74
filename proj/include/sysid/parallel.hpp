#pragma once

#include <cstddef>
#include <cstdint>

#include <omp.h>

namespace sysid {

// Every trial kernel has a serial reference path and an OpenMP path. Both
// produce identical results: per-trial seeds are derived from the trial
// index, and accumulators only hold integer counts and maxima, which merge
// associatively and commutatively.
enum class Execution { serial, parallel };

// Runs body(trial, acc) for trial in [0, n) and returns the merged
// accumulator. Acc needs a default constructor and merge(const Acc&).
template <class Acc, class Body>
Acc reduce_trials(Execution exec, std::uint64_t n, Body&& body) {
    Acc total{};
    if (exec == Execution::serial || n < 2) {
        for (std::uint64_t t = 0; t < n; ++t) body(t, total);
        return total;
    }
#pragma omp parallel
    {
        Acc local{};
#pragma omp for schedule(static)
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(n); ++t) {
            body(static_cast<std::uint64_t>(t), local);
        }
#pragma omp critical(sysid_reduce_trials)
        total.merge(local);
    }
    return total;
}

// Index-addressed fill: out[i] = fn(i). Each slot is written by exactly one
// thread.
template <class T, class Fn>
void for_each_index(Execution exec, std::size_t n, T* out, Fn&& fn) {
    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        out[i] = fn(static_cast<std::size_t>(i));
    }
}

}  // namespace sysid
