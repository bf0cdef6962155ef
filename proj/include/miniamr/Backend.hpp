#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>

#include "miniamr/Config.hpp"
#include "miniamr/Task.hpp"

namespace miniamr {

//! Non-owning reference to a callable; the callable must outlive the call.
template <class Sig>
class FunctionRef;

template <class R, class... Args>
class FunctionRef<R(Args...)> {
  public:
    template <class F>
        requires(!std::is_same_v<std::remove_cvref_t<F>, FunctionRef>)
    FunctionRef(F&& f) noexcept
        : obj_(const_cast<void*>(static_cast<const void*>(std::addressof(f)))),
          call_([](void* o, Args... a) -> R { return (*static_cast<std::remove_reference_t<F>*>(o))(std::forward<Args>(a)...); }) {}

    R operator()(Args... a) const { return call_(obj_, std::forward<Args>(a)...); }

  private:
    void* obj_;
    R (*call_)(void*, Args...);
};

class ThreadPool;

//! Execution backend. Every public launch entry point increments the launch
//! counter exactly once, whatever the number of boxes or tiles it spans.
class Backend {
  public:
    enum class Kind { Serial, CpuParallel };

    //! nworkers <= 0 selects the hardware concurrency.
    explicit Backend(Kind kind = Kind::Serial, int nworkers = 0);
    ~Backend();
    Backend(const Backend&) = delete;
    Backend& operator=(const Backend&) = delete;

    Kind kind() const noexcept { return kind_; }
    int nworkers() const noexcept { return nworkers_; }
    std::uint64_t launch_count() const noexcept { return launches_.load(std::memory_order_relaxed); }

    //! Chunks used for element-wise loops.
    int for_chunks() const noexcept { return kind_ == Kind::Serial ? 1 : 4 * nworkers_; }
    //! Chunks used for reductions; partials are combined in chunk order.
    int reduce_chunks() const noexcept { return kind_ == Kind::Serial ? 1 : nworkers_; }

    //! One launch: runs fn(c) for every c in [0, nchunks), possibly
    //! concurrently, and returns once all chunks finished.
    void launch(int nchunks, FunctionRef<void(int)> fn);

    //! Schedules fn to run later on a worker; the returned token completes
    //! after fn returns. Recorded with async_tracking on the calling thread.
    CompletionToken launch_async(std::function<void()> fn);

    //! Blocks until every async task launched so far has completed.
    void wait_async();

  private:
    Kind kind_;
    int nworkers_;
    std::atomic<std::uint64_t> launches_{0};
    std::unique_ptr<ThreadPool> pool_;
};

std::string to_string(Backend::Kind k);
Backend::Kind backend_kind_from_string(const std::string& s);

//! Process-wide backend used when none is passed explicitly. Serial unless
//! reconfigured with set_default_backend before first use.
Backend& default_backend();
bool set_default_backend(Backend::Kind kind, int nworkers = 0);

} // namespace miniamr
