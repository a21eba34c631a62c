#include "presslab/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace presslab {

WorkerPool::WorkerPool(int workers) {
    if (workers < 1) throw std::invalid_argument("WorkerPool: workers must be >= 1");
    threads_.reserve(workers - 1);
    for (int id = 1; id < workers; ++id)
        threads_.emplace_back([this, id] { body(id); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lk(mtx_);
        stop_ = true;
    }
    cv_start_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::body(int id) {
    std::size_t seen = 0;
    for (;;) {
        const std::function<void(int)>* task;
        {
            std::unique_lock lk(mtx_);
            cv_start_.wait(lk, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            task = task_;
        }
        (*task)(id);
        {
            std::lock_guard lk(mtx_);
            if (--pending_ == 0) cv_done_.notify_one();
        }
    }
}

void WorkerPool::run(const std::function<void(int)>& task) {
    const int nw = workers();
    if (nw == 1) {
        task(0);
        return;
    }
    {
        std::lock_guard lk(mtx_);
        task_ = &task;
        pending_ = nw - 1;
        ++generation_;
    }
    cv_start_.notify_all();
    task(0);
    std::unique_lock lk(mtx_);
    cv_done_.wait(lk, [&] { return pending_ == 0; });
}

std::pair<std::size_t, std::size_t> WorkerPool::slice(std::size_t n, int parts, int p) {
    const std::size_t base = n / parts, rem = n % parts;
    const std::size_t up = static_cast<std::size_t>(p);
    const std::size_t begin = up * base + std::min(up, rem);
    return {begin, begin + base + (up < rem ? 1 : 0)};
}

void WorkerPool::parallel_for(std::size_t n,
                              const std::function<void(std::size_t, std::size_t)>& fn) {
    const int nw = workers();
    if (nw == 1 || n < 2 * kChunk) {
        fn(0, n);
        return;
    }
    run([&](int id) {
        auto [b, e] = slice(n, nw, id);
        if (b < e) fn(b, e);
    });
}

double WorkerPool::dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const std::size_t nchunks = (n + kChunk - 1) / kChunk;
    if (nchunks <= 1 || workers() == 1) {
        // Same chunked order as the parallel path.
        double total = 0.0;
        for (std::size_t c = 0; c < nchunks; ++c) {
            const std::size_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
            total += s;
        }
        return total;
    }
    if (partials_.size() < nchunks) partials_.resize(nchunks);
    const int nw = workers();
    run([&](int id) {
        auto [cb, ce] = slice(nchunks, nw, id);
        for (std::size_t c = cb; c < ce; ++c) {
            const std::size_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
            partials_[c] = s;
        }
    });
    double total = 0.0;
    for (std::size_t c = 0; c < nchunks; ++c) total += partials_[c];
    return total;
}

double WorkerPool::norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace presslab
