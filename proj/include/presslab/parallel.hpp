// Shared-memory worker pool with deterministic reductions.
#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace presslab {

/// Pool of persistent workers for row-parallel kernels. Worker 0 is the
/// calling thread; a pool of size 1 runs everything inline. One pool is
/// owned by one solve at a time.
///
/// Reductions are summed over fixed 1024-element chunks in chunk order, so
/// dot products and norms are bit-identical for every worker count.
class WorkerPool {
public:
    explicit WorkerPool(int workers = 1);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    int workers() const noexcept { return static_cast<int>(threads_.size()) + 1; }

    /// Calls fn(begin, end) on each worker with a contiguous slice of [0, n).
    void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

    /// Deterministic dot product (worker-count independent).
    double dot(std::span<const double> a, std::span<const double> b);

    /// Deterministic Euclidean norm.
    double norm2(std::span<const double> a);

    /// Splits [0, n) into `parts` near-equal contiguous ranges; returns the p-th.
    static std::pair<std::size_t, std::size_t> slice(std::size_t n, int parts, int p);

    static constexpr std::size_t kChunk = 1024;

private:
    void body(int id);
    void run(const std::function<void(int)>& task);

    std::vector<std::thread> threads_;
    std::mutex mtx_;
    std::condition_variable cv_start_;
    std::condition_variable cv_done_;
    const std::function<void(int)>* task_ = nullptr;
    std::size_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;

    std::vector<double> partials_;
};

}  // namespace presslab
