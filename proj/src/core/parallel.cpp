#include "stdgan/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace stdgan::par {

namespace {

int env_thread_cap() {
    if (const char* s = std::getenv("STDGAN_THREADS")) {
        const int v = std::atoi(s);
        if (v > 0) return v;
    }
    return 1 << 30;
}

std::atomic<int> g_max_threads{-1};

thread_local bool t_in_worker = false;

// Minimal persistent pool. A job is a chunk count plus a closure; workers
// claim chunk indices under the mutex. The submitting thread runs chunk 0
// and then helps drain the rest.
class Pool {
public:
    static Pool& instance() {
        static Pool p;
        return p;
    }

    void run(int nchunks, const std::function<void(int)>& chunk_fn) {
        std::lock_guard<std::mutex> run_lk(run_mutex_);
        ensure_workers(std::min(nchunks - 1, max_threads() - 1));
        {
            std::lock_guard<std::mutex> lk(m_);
            fn_ = &chunk_fn;
            total_chunks_ = nchunks;
            next_chunk_ = 1;
            pending_ = nchunks;
            ++generation_;
        }
        cv_.notify_all();
        chunk_fn(0);
        drain();
        {
            std::unique_lock<std::mutex> lk(m_);
            if (--pending_ > 0) done_cv_.wait(lk, [&] { return pending_ == 0; });
            fn_ = nullptr;
        }
    }

private:
    Pool() = default;
    ~Pool() {
        {
            std::lock_guard<std::mutex> lk(m_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    void ensure_workers(int needed) {
        std::lock_guard<std::mutex> lk(m_);
        while (static_cast<int>(workers_.size()) < needed)
            workers_.emplace_back([this] { worker_loop(); });
    }

    // Claim and execute chunks of the current job until none are left.
    void drain() {
        std::unique_lock<std::mutex> lk(m_);
        while (next_chunk_ < total_chunks_) {
            const int c = next_chunk_++;
            const std::function<void(int)>* fn = fn_;
            lk.unlock();
            (*fn)(c);
            lk.lock();
            if (--pending_ <= 1) done_cv_.notify_all();
        }
    }

    void worker_loop() {
        t_in_worker = true;
        uint64_t seen = 0;
        std::unique_lock<std::mutex> lk(m_);
        while (true) {
            cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            while (next_chunk_ < total_chunks_) {
                const int c = next_chunk_++;
                const std::function<void(int)>* fn = fn_;
                lk.unlock();
                (*fn)(c);
                lk.lock();
                if (--pending_ <= 1) done_cv_.notify_all();
            }
        }
    }

    std::mutex run_mutex_;
    std::mutex m_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    std::vector<std::thread> workers_;
    const std::function<void(int)>* fn_ = nullptr;
    int total_chunks_ = 0;
    int next_chunk_ = 0;
    int pending_ = 0;
    uint64_t generation_ = 0;
    bool stop_ = false;
};

} // namespace

int max_threads() {
    int v = g_max_threads.load(std::memory_order_relaxed);
    if (v <= 0) {
        const int hw = static_cast<int>(std::thread::hardware_concurrency());
        v = std::max(1, std::min(hw > 0 ? hw : 1, env_thread_cap()));
        g_max_threads.store(v, std::memory_order_relaxed);
    }
    return v;
}

void set_max_threads(int n) { g_max_threads.store(std::max(1, n), std::memory_order_relaxed); }

void parallel_for(int64_t begin, int64_t end,
                  const std::function<void(int64_t, int64_t)>& body, int64_t grain) {
    const int64_t count = end - begin;
    if (count <= 0) return;
    grain = std::max<int64_t>(1, grain);
    const int64_t max_chunks = (count + grain - 1) / grain;
    const int nchunks = static_cast<int>(std::min<int64_t>(max_threads(), max_chunks));
    if (nchunks <= 1 || t_in_worker) {
        body(begin, end);
        return;
    }
    const int64_t chunk_size = (count + nchunks - 1) / nchunks;
    std::function<void(int)> chunk_fn = [&](int c) {
        const int64_t b = begin + c * chunk_size;
        const int64_t e = std::min(end, b + chunk_size);
        if (b < e) body(b, e);
    };
    Pool::instance().run(nchunks, chunk_fn);
}

} // namespace stdgan::par
