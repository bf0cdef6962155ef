#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <vector>

namespace miniamr {

//! Completion handle for an asynchronously scheduled task.
class CompletionToken {
  public:
    CompletionToken();

    static CompletionToken completed();

    bool done() const noexcept { return state_->done.load(std::memory_order_acquire); }
    void wait() const;
    void mark_done() const;

    friend bool operator==(const CompletionToken& a, const CompletionToken& b) noexcept {
        return a.state_ == b.state_;
    }

  private:
    struct State {
        std::atomic<bool> done{false};
        mutable std::mutex m;
        mutable std::condition_variable cv;
    };
    std::shared_ptr<State> state_;
};

//! Thread-local bookkeeping of asynchronous launches. Every task launched
//! through Backend::launch_async on a thread is recorded in the thread's
//! stream and in every AsyncScope active on that thread.
namespace async_tracking {

void note_launch(const CompletionToken& t);

//! Incomplete tasks a release on this thread must wait for: those of the
//! innermost active AsyncScope, or the whole thread stream when no scope
//! is active.
std::vector<CompletionToken> pending_for_release();

} // namespace async_tracking

//! Brackets a region whose temporaries are released against the tasks
//! launched inside it. Construction and destruction never block.
class AsyncScope {
  public:
    AsyncScope();
    ~AsyncScope();
    AsyncScope(const AsyncScope&) = delete;
    AsyncScope& operator=(const AsyncScope&) = delete;

    const std::vector<CompletionToken>& tasks() const noexcept { return tasks_; }

  private:
    friend void async_tracking::note_launch(const CompletionToken&);
    friend std::vector<CompletionToken> async_tracking::pending_for_release();
    std::vector<CompletionToken> tasks_;
};

} // namespace miniamr
