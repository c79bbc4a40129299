#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gexpect {

/// Worker count: hardware concurrency capped by GEXPECT_WORKERS when set.
inline unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GEXPECT_WORKERS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) hw = std::min(hw, static_cast<unsigned>(cap));
        } catch (...) {
        }
    }
    return hw;
}

/**
 * Fixed-size pool running index ranges [0, count) in contiguous blocks.
 *
 * Work items must write to disjoint locations; results that need reduction
 * are stored per block and merged by the caller in block order, which keeps
 * outputs independent of the number of workers.
 */
class WorkerPool {
public:
    explicit WorkerPool(unsigned workers = worker_count()) : workers_(std::max(1u, workers)) {
        for (unsigned w = 1; w < workers_; ++w) threads_.emplace_back([this, w] { loop(w); });
    }

    ~WorkerPool() {
        {
            std::lock_guard lock(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    unsigned size() const { return workers_; }

    /// Calls fn(begin, end) on a partition of [0, count) and waits for completion.
    void run(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn) {
        if (workers_ == 1 || count < 2) {
            if (count > 0) fn(0, count);
            return;
        }
        {
            std::lock_guard lock(mu_);
            task_ = &fn;
            count_ = count;
            pending_ = workers_ - 1;
            ++generation_;
        }
        cv_.notify_all();
        const auto [b, e] = block(0, count);
        if (b < e) fn(b, e);
        std::unique_lock lock(mu_);
        done_cv_.wait(lock, [this] { return pending_ == 0; });
        task_ = nullptr;
    }

private:
    std::pair<std::size_t, std::size_t> block(unsigned w, std::size_t count) const {
        const std::size_t per = (count + workers_ - 1) / workers_;
        const std::size_t b = std::min(count, per * w);
        return {b, std::min(count, b + per)};
    }

    void loop(unsigned w) {
        std::size_t seen = 0;
        for (;;) {
            const std::function<void(std::size_t, std::size_t)>* task = nullptr;
            std::size_t count = 0;
            {
                std::unique_lock lock(mu_);
                cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                task = task_;
                count = count_;
            }
            const auto [b, e] = block(w, count);
            if (b < e) (*task)(b, e);
            {
                std::lock_guard lock(mu_);
                --pending_;
            }
            done_cv_.notify_one();
        }
    }

    unsigned workers_;
    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t, std::size_t)>* task_ = nullptr;
    std::size_t count_ = 0;
    unsigned pending_ = 0;
    std::size_t generation_ = 0;
    bool stop_ = false;
};

/// Process-wide pool sized by worker_count().
inline WorkerPool& default_pool() {
    static WorkerPool pool;
    return pool;
}

}  // namespace gexpect
