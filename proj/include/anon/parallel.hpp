#pragma once

#include <cstddef>
#include <functional>

namespace anon {

// Worker cap: ANON_WORKERS when set (>0), else hardware concurrency.
std::size_t worker_cap();

// Runs fn(i) for i in [0, count). Work is distributed over up to
// worker_cap() threads; calls nested inside a running parallel_for
// execute sequentially. Callers must make fn(i) independent of
// scheduling (write only to slot i), so results match a sequential run.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace anon
