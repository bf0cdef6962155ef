#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "miniamr/Task.hpp"

namespace miniamr {

class ArenaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ArenaStats {
    std::size_t reserved_bytes = 0;
    std::size_t in_use_bytes = 0;
    std::size_t alloc_calls = 0;
    std::size_t free_calls = 0;
    std::size_t slab_growths = 0;
    std::size_t deferred_blocks = 0;
    std::size_t early_recycles = 0;
};

inline constexpr std::size_t kArenaAlign = 64;

//! Allocator interface shared by every storage-owning container.
class Arena {
  public:
    virtual ~Arena() = default;

    //! nbytes == 0 yields empty_block(); align must be a power of two.
    virtual void* alloc(std::size_t nbytes, std::size_t align = kArenaAlign) = 0;
    virtual void free(void* p) = 0;
    virtual ArenaStats stats() const = 0;
    virtual std::string name() const = 0;

    //! Distinguished non-null address for zero-byte allocations.
    static void* empty_block() noexcept;
};

//! Slab-backed pool. Requests are rounded up to 64 bytes and served from
//! per-size free lists (LIFO) before bump-allocating from the current slab.
//! A slab is added when the request does not fit. Thread-safe.
class PooledArena final : public Arena {
  public:
    explicit PooledArena(std::size_t initial_capacity, std::string name = "pooled");
    ~PooledArena() override;
    PooledArena(const PooledArena&) = delete;
    PooledArena& operator=(const PooledArena&) = delete;

    void* alloc(std::size_t nbytes, std::size_t align = kArenaAlign) override;
    void free(void* p) override;
    ArenaStats stats() const override;
    std::string name() const override { return name_; }

    //! Overwrite blocks with 0xDB bytes when they return to the free lists.
    void set_poison_on_free(bool on) noexcept { poison_ = on; }

    std::size_t block_size(void* p) const;
    bool owns(const void* p) const;

  private:
    struct Slab {
        std::byte* base;
        std::size_t size;
        std::size_t used;
    };

    void* bump(std::size_t size, std::size_t align);

    mutable std::mutex m_;
    std::string name_;
    std::vector<Slab> slabs_;
    std::unordered_map<std::size_t, std::vector<void*>> free_lists_;
    std::unordered_map<void*, std::size_t> live_;
    ArenaStats stats_;
    bool poison_ = false;
};

//! Pass-through to the system allocator with the same bookkeeping.
class SystemArena final : public Arena {
  public:
    explicit SystemArena(std::string name = "system") : name_(std::move(name)) {}
    ~SystemArena() override;

    void* alloc(std::size_t nbytes, std::size_t align = kArenaAlign) override;
    void free(void* p) override;
    ArenaStats stats() const override;
    std::string name() const override { return name_; }

  private:
    struct Block {
        std::size_t size;
        std::size_t align;
    };
    mutable std::mutex m_;
    std::string name_;
    std::unordered_map<void*, Block> live_;
    ArenaStats stats_;
};

//! Pool whose releases are deferred until the asynchronous tasks that may
//! still use a block have completed. free() never blocks.
class AsyncArena final : public Arena {
  public:
    explicit AsyncArena(std::size_t initial_capacity, std::string name = "async");

    void* alloc(std::size_t nbytes, std::size_t align = kArenaAlign) override;
    void free(void* p) override;
    ArenaStats stats() const override;
    std::string name() const override { return pool_.name(); }

    //! Recycle every deferred block whose tasks have all completed.
    std::size_t collect();

    void set_poison_on_free(bool on) noexcept { pool_.set_poison_on_free(on); }

  private:
    struct Deferred {
        void* p;
        std::vector<CompletionToken> tasks;
    };

    PooledArena pool_;
    mutable std::mutex m_;
    std::vector<Deferred> deferred_;
    std::size_t early_recycles_ = 0;
};

struct ArenaConfig {
    //! Memory budget; the default arena reserves half of it up front.
    std::size_t init_size = std::size_t(256) << 20;
    //! "pooled" or "system".
    std::string kind = "pooled";
};

//! Reconfigure the global arenas. Only allowed before the first use of any
//! of them; returns false otherwise.
bool configure_arenas(const ArenaConfig& cfg);

Arena* The_Arena();
AsyncArena* The_Async_Arena();
Arena* The_System_Arena();
//! Arena backing communication buffers.
Arena* The_Comm_Arena();

//! Owning byte buffer returned to its arena on destruction.
class ArenaBuffer {
  public:
    ArenaBuffer() = default;
    ArenaBuffer(std::size_t nbytes, Arena* arena);
    ~ArenaBuffer();
    ArenaBuffer(ArenaBuffer&& o) noexcept;
    ArenaBuffer& operator=(ArenaBuffer&& o) noexcept;
    ArenaBuffer(const ArenaBuffer&) = delete;
    ArenaBuffer& operator=(const ArenaBuffer&) = delete;

    std::byte* data() noexcept { return data_; }
    const std::byte* data() const noexcept { return data_; }
    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

  private:
    void release() noexcept;
    Arena* arena_ = nullptr;
    std::byte* data_ = nullptr;
    std::size_t size_ = 0;
};

} // namespace miniamr
