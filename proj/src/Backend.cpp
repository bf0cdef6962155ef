#include "miniamr/Backend.hpp"

#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace miniamr {

class ThreadPool {
  public:
    explicit ThreadPool(int nthreads) {
        for (int t = 0; t < nthreads; ++t) threads_.emplace_back([this] { run(); });
    }
    ~ThreadPool() {
        {
            std::lock_guard lk(m_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    void submit(std::function<void()> job) {
        {
            std::lock_guard lk(m_);
            ++outstanding_;
            queue_.push_back(std::move(job));
        }
        cv_.notify_one();
    }

    void wait_idle() {
        std::unique_lock lk(m_);
        idle_cv_.wait(lk, [&] { return outstanding_ == 0; });
    }

  private:
    void run() {
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock lk(m_);
                cv_.wait(lk, [&] { return stop_ || !queue_.empty(); });
                if (queue_.empty()) return;
                job = std::move(queue_.front());
                queue_.pop_front();
            }
            job();
            {
                std::lock_guard lk(m_);
                if (--outstanding_ == 0) idle_cv_.notify_all();
            }
        }
    }

    std::mutex m_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<std::function<void()>> queue_;
    std::vector<std::thread> threads_;
    std::size_t outstanding_ = 0;
    bool stop_ = false;
};

namespace {

struct ChunkJob {
    explicit ChunkJob(FunctionRef<void(int)> f, int n) : fn(f), nchunks(n) {}
    FunctionRef<void(int)> fn;
    int nchunks;
    std::atomic<int> next{0};
    std::atomic<int> finished{0};
    std::mutex m;
    std::condition_variable cv;
    std::exception_ptr error;

    void work() {
        for (int c; (c = next.fetch_add(1)) < nchunks;) {
            try {
                fn(c);
            } catch (...) {
                std::lock_guard lk(m);
                if (!error) error = std::current_exception();
            }
            if (finished.fetch_add(1) + 1 == nchunks) {
                std::lock_guard lk(m);
                cv.notify_all();
            }
        }
    }
};

} // namespace

Backend::Backend(Kind kind, int nworkers) : kind_(kind) {
    if (nworkers <= 0) nworkers = std::max(1u, std::thread::hardware_concurrency());
    nworkers_ = kind == Kind::Serial ? 1 : nworkers;
    // Serial backends still own one worker that plays the role of an
    // in-order stream for asynchronous tasks.
    pool_ = std::make_unique<ThreadPool>(std::max(1, nworkers_ - 1));
}

Backend::~Backend() = default;

void Backend::launch(int nchunks, FunctionRef<void(int)> fn) {
    launches_.fetch_add(1, std::memory_order_relaxed);
    if (nchunks <= 0) return;
    if (kind_ == Kind::Serial || nworkers_ == 1 || nchunks == 1) {
        for (int c = 0; c < nchunks; ++c) fn(c);
        return;
    }
    auto job = std::make_shared<ChunkJob>(fn, nchunks);
    const int helpers = std::min(nworkers_ - 1, nchunks - 1);
    for (int h = 0; h < helpers; ++h) pool_->submit([job] { job->work(); });
    job->work();
    {
        std::unique_lock lk(job->m);
        job->cv.wait(lk, [&] { return job->finished.load() == job->nchunks; });
    }
    if (job->error) std::rethrow_exception(job->error);
}

CompletionToken Backend::launch_async(std::function<void()> fn) {
    launches_.fetch_add(1, std::memory_order_relaxed);
    CompletionToken token;
    async_tracking::note_launch(token);
    pool_->submit([fn = std::move(fn), token] {
        try {
            fn();
        } catch (...) {
        }
        token.mark_done();
    });
    return token;
}

void Backend::wait_async() { pool_->wait_idle(); }

std::string to_string(Backend::Kind k) { return k == Backend::Kind::Serial ? "serial" : "parallel"; }

Backend::Kind backend_kind_from_string(const std::string& s) {
    if (s == "serial") return Backend::Kind::Serial;
    if (s == "parallel") return Backend::Kind::CpuParallel;
    throw std::invalid_argument("backend must be serial or parallel, got '" + s + "'");
}

namespace {

struct DefaultBackend {
    std::mutex m;
    Backend::Kind kind = Backend::Kind::Serial;
    int nworkers = 0;
    std::unique_ptr<Backend> b;
};

DefaultBackend& default_state() {
    static DefaultBackend s;
    return s;
}

} // namespace

Backend& default_backend() {
    auto& s = default_state();
    std::lock_guard lk(s.m);
    if (!s.b) s.b = std::make_unique<Backend>(s.kind, s.nworkers);
    return *s.b;
}

bool set_default_backend(Backend::Kind kind, int nworkers) {
    auto& s = default_state();
    std::lock_guard lk(s.m);
    if (s.b) return false;
    s.kind = kind;
    s.nworkers = nworkers;
    return true;
}

} // namespace miniamr
