#include "miniamr/Comm.hpp"

#include <algorithm>
#include <exception>
#include <sstream>

#include "miniamr/CommPlan.hpp"

namespace miniamr {

std::uint64_t MessageStats::total_messages() const {
    std::uint64_t t = 0;
    for (auto m : messages) t += m;
    return t;
}

std::uint64_t MessageStats::total_bytes() const {
    std::uint64_t t = 0;
    for (auto b : bytes) t += b;
    return t;
}

std::uint64_t MessageStats::max_per_pair() const {
    return messages.empty() ? 0 : *std::max_element(messages.begin(), messages.end());
}

MessageStats operator-(const MessageStats& a, const MessageStats& b) {
    MessageStats r = a;
    for (std::size_t i = 0; i < r.messages.size(); ++i) {
        r.messages[i] -= b.messages[i];
        r.bytes[i] -= b.bytes[i];
    }
    return r;
}

std::string MessageStats::str() const {
    std::ostringstream os;
    os << "messages " << total_messages() << " bytes " << total_bytes() << "\n";
    for (int s = 0; s < nranks; ++s)
        for (int d = 0; d < nranks; ++d)
            if (count(s, d) > 0) os << "  " << s << " -> " << d << ": " << count(s, d) << " msg, " << nbytes(s, d) << " B\n";
    return os.str();
}

// ---------------------------------------------------------------------------

Bus::Bus(int nranks)
    : nranks_(nranks), boxes_(std::size_t(std::max(nranks, 1)) * std::max(nranks, 1)),
      msg_count_(boxes_.size(), 0), msg_bytes_(boxes_.size(), 0), slots_(std::max(nranks, 1)) {
    if (nranks < 1) throw CommError("runtime: nranks must be >= 1");
}

void Bus::send(int src, int dst, ArenaBuffer msg) {
    if (src < 0 || src >= nranks_ || dst < 0 || dst >= nranks_) throw CommError("send: rank out of range");
    {
        std::lock_guard lk(m_);
        if (aborted_) throw BusAborted();
        const std::size_t k = std::size_t(src) * nranks_ + dst;
        ++msg_count_[k];
        msg_bytes_[k] += msg.size();
        boxes_[k].queue.push_back(std::move(msg));
    }
    cv_.notify_all();
}

ArenaBuffer Bus::recv(int src, int dst) {
    if (src < 0 || src >= nranks_ || dst < 0 || dst >= nranks_) throw CommError("recv: rank out of range");
    const std::size_t k = std::size_t(src) * nranks_ + dst;
    std::unique_lock lk(m_);
    cv_.wait(lk, [&] { return aborted_ || !boxes_[k].queue.empty(); });
    if (boxes_[k].queue.empty()) throw BusAborted();
    ArenaBuffer msg = std::move(boxes_[k].queue.front());
    boxes_[k].queue.pop_front();
    return msg;
}

void Bus::barrier() {
    std::unique_lock lk(m_);
    if (aborted_) throw BusAborted();
    const auto gen = barrier_generation_;
    if (++barrier_waiting_ == nranks_) {
        barrier_waiting_ = 0;
        ++barrier_generation_;
        lk.unlock();
        cv_.notify_all();
        return;
    }
    cv_.wait(lk, [&] { return aborted_ || barrier_generation_ != gen; });
    if (barrier_generation_ == gen) throw BusAborted();
}

std::vector<std::vector<std::byte>> Bus::allgather(int rank, std::vector<std::byte> data) {
    {
        std::lock_guard lk(m_);
        slots_[rank] = std::move(data);
    }
    barrier();
    std::vector<std::vector<std::byte>> out;
    {
        std::lock_guard lk(m_);
        out = slots_;
    }
    barrier();
    return out;
}

MessageStats Bus::stats() const {
    std::lock_guard lk(m_);
    return MessageStats{nranks_, msg_count_, msg_bytes_};
}

void Bus::abort() {
    {
        std::lock_guard lk(m_);
        aborted_ = true;
    }
    cv_.notify_all();
}

bool Bus::aborted() const {
    std::lock_guard lk(m_);
    return aborted_;
}

// ---------------------------------------------------------------------------

Communicator::Communicator(int rank, Bus& bus, Backend& backend)
    : rank_(rank), bus_(&bus), backend_(&backend), plans_(std::make_unique<PlanCache>()) {}

Communicator::~Communicator() = default;

Communicator& Communicator::serial() {
    static Bus bus(1);
    static Communicator comm(0, bus, default_backend());
    return comm;
}

// ---------------------------------------------------------------------------

Runtime::Runtime(int nranks, Backend& backend) : bus_(nranks), backend_(&backend) {}

void Runtime::run_impl(FunctionRef<void(Communicator&)> body) {
    const int n = bus_.nranks();
    if (n == 1) {
        Communicator comm(0, bus_, *backend_);
        try {
            body(comm);
        } catch (const std::exception& e) {
            throw RankError(0, e.what());
        }
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (int r = 0; r < n; ++r) {
        threads.emplace_back([&, r] {
            Communicator comm(r, bus_, *backend_);
            try {
                body(comm);
            } catch (...) {
                errors[r] = std::current_exception();
                bus_.abort();
            }
        });
    }
    for (auto& t : threads) t.join();

    int failed = -1;
    std::string what;
    for (int r = 0; r < n && failed < 0; ++r) {
        if (!errors[r]) continue;
        try {
            std::rethrow_exception(errors[r]);
        } catch (const BusAborted&) {
        } catch (const std::exception& e) {
            failed = r;
            what = e.what();
        } catch (...) {
            failed = r;
            what = "unknown exception";
        }
    }
    if (failed < 0) {
        for (int r = 0; r < n; ++r)
            if (errors[r]) {
                failed = r;
                what = "aborted";
                break;
            }
    }
    if (failed >= 0) throw RankError(failed, what);
}

} // namespace miniamr
