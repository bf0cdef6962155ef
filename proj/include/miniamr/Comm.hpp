#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "miniamr/Arena.hpp"
#include "miniamr/Backend.hpp"

namespace miniamr {

class CommError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Raised in ranks blocked on the bus after another rank failed.
class BusAborted : public CommError {
  public:
    BusAborted() : CommError("message bus aborted by a failing rank") {}
};

class RankError : public std::runtime_error {
  public:
    RankError(int rank, const std::string& what)
        : std::runtime_error("rank " + std::to_string(rank) + ": " + what), rank_(rank) {}
    int rank() const noexcept { return rank_; }

  private:
    int rank_;
};

//! Point-to-point message counters, indexed by (sender, receiver).
struct MessageStats {
    int nranks = 0;
    std::vector<std::uint64_t> messages;
    std::vector<std::uint64_t> bytes;

    std::uint64_t count(int src, int dst) const { return messages[std::size_t(src) * nranks + dst]; }
    std::uint64_t nbytes(int src, int dst) const { return bytes[std::size_t(src) * nranks + dst]; }
    std::uint64_t total_messages() const;
    std::uint64_t total_bytes() const;
    std::uint64_t max_per_pair() const;

    friend MessageStats operator-(const MessageStats& a, const MessageStats& b);
    std::string str() const;
};

//! In-process message bus connecting simulated ranks. Messages are delivered
//! exactly once and FIFO per ordered (sender, receiver) pair. Collectives
//! (barrier, allgather) go through shared slots and are not counted as messages.
class Bus {
  public:
    explicit Bus(int nranks);

    int nranks() const noexcept { return nranks_; }

    void send(int src, int dst, ArenaBuffer msg);
    ArenaBuffer recv(int src, int dst);

    void barrier();
    std::vector<std::vector<std::byte>> allgather(int rank, std::vector<std::byte> data);

    MessageStats stats() const;
    void abort();
    bool aborted() const;

  private:
    struct Mailbox {
        std::deque<ArenaBuffer> queue;
    };

    int nranks_;
    mutable std::mutex m_;
    std::condition_variable cv_;
    std::vector<Mailbox> boxes_;
    std::vector<std::uint64_t> msg_count_;
    std::vector<std::uint64_t> msg_bytes_;
    bool aborted_ = false;

    std::uint64_t barrier_generation_ = 0;
    int barrier_waiting_ = 0;
    std::vector<std::vector<std::byte>> slots_;
};

class PlanCache;

//! A rank's view of the runtime: identity, bus endpoints, execution backend
//! and the rank-local cache of communication plans.
class Communicator {
  public:
    Communicator(int rank, Bus& bus, Backend& backend);
    ~Communicator();
    Communicator(const Communicator&) = delete;
    Communicator& operator=(const Communicator&) = delete;

    int rank() const noexcept { return rank_; }
    int nranks() const noexcept { return bus_->nranks(); }
    Bus& bus() noexcept { return *bus_; }
    Backend& backend() noexcept { return *backend_; }
    PlanCache& plans() noexcept { return *plans_; }

    void send(int dst, ArenaBuffer msg) { bus_->send(rank_, dst, std::move(msg)); }
    ArenaBuffer recv(int src) { return bus_->recv(src, rank_); }
    void barrier() { bus_->barrier(); }
    std::vector<std::vector<std::byte>> allgather(std::vector<std::byte> data) {
        return bus_->allgather(rank_, std::move(data));
    }

    //! Single-rank communicator on the default backend.
    static Communicator& serial();

  private:
    int rank_;
    Bus* bus_;
    Backend* backend_;
    std::unique_ptr<PlanCache> plans_;
};

//! Runs one program per simulated rank over a shared bus.
class Runtime {
  public:
    explicit Runtime(int nranks, Backend& backend = default_backend());

    int nranks() const noexcept { return bus_.nranks(); }
    Bus& bus() noexcept { return bus_; }
    MessageStats stats() const { return bus_.stats(); }

    //! program(Communicator&) runs once per rank (rank 0 alone runs on the
    //! calling thread when nranks == 1). Returns per-rank results in rank
    //! order. A throwing rank aborts the run with a RankError.
    template <class F>
    auto run(F&& program) {
        using R = std::invoke_result_t<F&, Communicator&>;
        if constexpr (std::is_void_v<R>) {
            run_impl([&](Communicator& c) { program(c); });
        } else {
            std::vector<std::optional<R>> slots(nranks());
            run_impl([&](Communicator& c) { slots[c.rank()].emplace(program(c)); });
            std::vector<R> out;
            out.reserve(slots.size());
            for (auto& s : slots) out.push_back(std::move(*s));
            return out;
        }
    }

  private:
    void run_impl(FunctionRef<void(Communicator&)> body);

    Bus bus_;
    Backend* backend_;
};

template <class F>
auto runtime_spawn(int nranks, F&& program, Backend& backend = default_backend()) {
    Runtime rt(nranks, backend);
    return rt.run(std::forward<F>(program));
}

} // namespace miniamr
