#include "miniamr/Arena.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <new>

namespace miniamr {

namespace {

constexpr std::size_t kSlabAlign = 4096;
constexpr std::size_t kMinGrowth = std::size_t(1) << 20;

std::size_t round_up(std::size_t n, std::size_t a) { return (n + a - 1) / a * a; }

bool is_pow2(std::size_t a) { return a != 0 && (a & (a - 1)) == 0; }

} // namespace

void* Arena::empty_block() noexcept {
    alignas(kArenaAlign) static std::byte sentinel[kArenaAlign];
    return sentinel;
}

// ---------------------------------------------------------------------------

PooledArena::PooledArena(std::size_t initial_capacity, std::string name) : name_(std::move(name)) {
    if (initial_capacity > 0) {
        std::size_t sz = round_up(initial_capacity, kSlabAlign);
        auto* base = static_cast<std::byte*>(::operator new(sz, std::align_val_t{kSlabAlign}, std::nothrow));
        if (!base) throw ArenaError("arena_init: cannot reserve " + std::to_string(sz) + " bytes");
        slabs_.push_back({base, sz, 0});
        stats_.reserved_bytes = sz;
    }
}

PooledArena::~PooledArena() {
    for (auto& s : slabs_) ::operator delete(s.base, std::align_val_t{kSlabAlign});
}

void* PooledArena::bump(std::size_t size, std::size_t align) {
    for (auto it = slabs_.rbegin(); it != slabs_.rend(); ++it) {
        auto addr = reinterpret_cast<std::uintptr_t>(it->base) + it->used;
        std::size_t pad = (align - addr % align) % align;
        if (it->used + pad + size <= it->size) {
            it->used += pad + size;
            return reinterpret_cast<void*>(addr + pad);
        }
        // Only the newest slab is bump-allocated from.
        break;
    }
    std::size_t sz = round_up(std::max(size + align, kMinGrowth), kSlabAlign);
    auto* base = static_cast<std::byte*>(::operator new(sz, std::align_val_t{kSlabAlign}, std::nothrow));
    if (!base) throw ArenaError("arena_alloc: slab growth of " + std::to_string(sz) + " bytes failed");
    slabs_.push_back({base, sz, 0});
    stats_.reserved_bytes += sz;
    ++stats_.slab_growths;
    auto addr = reinterpret_cast<std::uintptr_t>(base);
    std::size_t pad = (align - addr % align) % align;
    slabs_.back().used = pad + size;
    return reinterpret_cast<void*>(addr + pad);
}

void* PooledArena::alloc(std::size_t nbytes, std::size_t align) {
    if (!is_pow2(align)) throw ArenaError("arena_alloc: alignment must be a power of two");
    if (nbytes == 0) return empty_block();
    const std::size_t size = round_up(nbytes, kArenaAlign);
    std::lock_guard lk(m_);
    ++stats_.alloc_calls;
    void* p = nullptr;
    if (auto fl = free_lists_.find(size); fl != free_lists_.end()) {
        auto& list = fl->second;
        for (auto it = list.rbegin(); it != list.rend(); ++it) {
            if (reinterpret_cast<std::uintptr_t>(*it) % align == 0) {
                p = *it;
                list.erase(std::next(it).base());
                break;
            }
        }
    }
    if (!p) p = bump(size, align);
    live_.emplace(p, size);
    stats_.in_use_bytes += size;
    return p;
}

void PooledArena::free(void* p) {
    if (p == nullptr || p == empty_block()) return;
    std::lock_guard lk(m_);
    auto it = live_.find(p);
    if (it == live_.end()) throw ArenaError("arena_free: double free or foreign pointer");
    const std::size_t size = it->second;
    live_.erase(it);
    if (poison_) std::memset(p, 0xDB, size);
    free_lists_[size].push_back(p);
    stats_.in_use_bytes -= size;
    ++stats_.free_calls;
}

ArenaStats PooledArena::stats() const {
    std::lock_guard lk(m_);
    return stats_;
}

std::size_t PooledArena::block_size(void* p) const {
    std::lock_guard lk(m_);
    auto it = live_.find(p);
    return it == live_.end() ? 0 : it->second;
}

bool PooledArena::owns(const void* p) const {
    std::lock_guard lk(m_);
    auto a = reinterpret_cast<std::uintptr_t>(p);
    return std::any_of(slabs_.begin(), slabs_.end(), [a](const Slab& s) {
        auto b = reinterpret_cast<std::uintptr_t>(s.base);
        return a >= b && a < b + s.size;
    });
}

// ---------------------------------------------------------------------------

SystemArena::~SystemArena() {
    for (auto& [p, b] : live_) ::operator delete(p, std::align_val_t{b.align});
}

void* SystemArena::alloc(std::size_t nbytes, std::size_t align) {
    if (!is_pow2(align)) throw ArenaError("arena_alloc: alignment must be a power of two");
    if (nbytes == 0) return empty_block();
    const std::size_t size = round_up(nbytes, kArenaAlign);
    align = std::max(align, kArenaAlign);
    void* p = ::operator new(size, std::align_val_t{align}, std::nothrow);
    if (!p) throw ArenaError("arena_alloc: system allocation of " + std::to_string(size) + " bytes failed");
    std::lock_guard lk(m_);
    live_.emplace(p, Block{size, align});
    ++stats_.alloc_calls;
    stats_.in_use_bytes += size;
    stats_.reserved_bytes += size;
    return p;
}

void SystemArena::free(void* p) {
    if (p == nullptr || p == empty_block()) return;
    Block b;
    {
        std::lock_guard lk(m_);
        auto it = live_.find(p);
        if (it == live_.end()) throw ArenaError("arena_free: double free or foreign pointer");
        b = it->second;
        live_.erase(it);
        ++stats_.free_calls;
        stats_.in_use_bytes -= b.size;
        stats_.reserved_bytes -= b.size;
    }
    ::operator delete(p, std::align_val_t{b.align});
}

ArenaStats SystemArena::stats() const {
    std::lock_guard lk(m_);
    return stats_;
}

// ---------------------------------------------------------------------------

AsyncArena::AsyncArena(std::size_t initial_capacity, std::string name) : pool_(initial_capacity, std::move(name)) {}

void* AsyncArena::alloc(std::size_t nbytes, std::size_t align) {
    collect();
    return pool_.alloc(nbytes, align);
}

void AsyncArena::free(void* p) {
    if (p == nullptr || p == empty_block()) return;
    auto pending = async_tracking::pending_for_release();
    if (pending.empty()) {
        pool_.free(p);
    } else {
        std::lock_guard lk(m_);
        deferred_.push_back({p, std::move(pending)});
    }
    collect();
}

std::size_t AsyncArena::collect() {
    std::vector<void*> ready;
    {
        std::lock_guard lk(m_);
        auto mid = std::stable_partition(deferred_.begin(), deferred_.end(), [](const Deferred& d) {
            return !std::all_of(d.tasks.begin(), d.tasks.end(), [](const CompletionToken& t) { return t.done(); });
        });
        for (auto it = mid; it != deferred_.end(); ++it) {
            for (const auto& t : it->tasks)
                if (!t.done()) ++early_recycles_;
            ready.push_back(it->p);
        }
        deferred_.erase(mid, deferred_.end());
    }
    for (void* p : ready) pool_.free(p);
    return ready.size();
}

ArenaStats AsyncArena::stats() const {
    ArenaStats s = pool_.stats();
    std::lock_guard lk(m_);
    s.deferred_blocks = deferred_.size();
    s.early_recycles = early_recycles_;
    return s;
}

// ---------------------------------------------------------------------------

namespace {

struct GlobalArenas {
    std::mutex m;
    ArenaConfig cfg;
    std::atomic<bool> started{false};
    std::unique_ptr<Arena> deflt;
    std::unique_ptr<AsyncArena> async;
    std::unique_ptr<SystemArena> system;
    std::unique_ptr<PooledArena> comm;

    void start() {
        if (started.load(std::memory_order_acquire)) return;
        std::lock_guard lk(m);
        if (started.load(std::memory_order_relaxed)) return;
        system = std::make_unique<SystemArena>("system");
        if (cfg.kind == "system") {
            deflt = std::make_unique<SystemArena>("default");
        } else {
            deflt = std::make_unique<PooledArena>(cfg.init_size / 2, "default");
        }
        async = std::make_unique<AsyncArena>(0, "async");
        comm = std::make_unique<PooledArena>(0, "comm");
        started.store(true, std::memory_order_release);
    }
};

GlobalArenas& globals() {
    static GlobalArenas g;
    return g;
}

} // namespace

bool configure_arenas(const ArenaConfig& cfg) {
    if (cfg.kind != "pooled" && cfg.kind != "system") throw ArenaError("arena.kind must be pooled or system");
    auto& g = globals();
    std::lock_guard lk(g.m);
    if (g.started.load()) return false;
    g.cfg = cfg;
    return true;
}

Arena* The_Arena() {
    globals().start();
    return globals().deflt.get();
}
AsyncArena* The_Async_Arena() {
    globals().start();
    return globals().async.get();
}
Arena* The_System_Arena() {
    globals().start();
    return globals().system.get();
}
Arena* The_Comm_Arena() {
    globals().start();
    return globals().comm.get();
}

// ---------------------------------------------------------------------------

ArenaBuffer::ArenaBuffer(std::size_t nbytes, Arena* arena)
    : arena_(arena), data_(static_cast<std::byte*>(arena->alloc(nbytes))), size_(nbytes) {}

ArenaBuffer::~ArenaBuffer() { release(); }

ArenaBuffer::ArenaBuffer(ArenaBuffer&& o) noexcept : arena_(o.arena_), data_(o.data_), size_(o.size_) {
    o.arena_ = nullptr;
    o.data_ = nullptr;
    o.size_ = 0;
}

ArenaBuffer& ArenaBuffer::operator=(ArenaBuffer&& o) noexcept {
    if (this != &o) {
        release();
        arena_ = std::exchange(o.arena_, nullptr);
        data_ = std::exchange(o.data_, nullptr);
        size_ = std::exchange(o.size_, 0);
    }
    return *this;
}

void ArenaBuffer::release() noexcept {
    if (arena_ && data_) {
        try {
            arena_->free(data_);
        } catch (...) {
        }
    }
    arena_ = nullptr;
    data_ = nullptr;
    size_ = 0;
}

} // namespace miniamr
