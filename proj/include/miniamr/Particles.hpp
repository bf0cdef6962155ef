#pragma once

#include <compare>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "miniamr/Arena.hpp"
#include "miniamr/BoxArray.hpp"
#include "miniamr/Comm.hpp"
#include "miniamr/Geometry.hpp"
#include "miniamr/Reduce.hpp"

namespace miniamr {

class ParticleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Packed particle identity: bit 63 validity (1 = valid), bits 62..24 the
//! local id, bits 23..0 the originating rank.
class ParticleId {
  public:
    static constexpr int kRankBits = 24;
    static constexpr int kLocalBits = 39;
    static constexpr std::uint64_t kMaxRank = (std::uint64_t(1) << kRankBits) - 1;
    static constexpr std::uint64_t kMaxLocal = (std::uint64_t(1) << kLocalBits) - 1;
    static constexpr std::uint64_t kValidBit = std::uint64_t(1) << 63;

    constexpr ParticleId() noexcept = default;
    constexpr explicit ParticleId(std::uint64_t word) noexcept : w_(word) {}

    static ParticleId make(std::uint64_t rank, std::uint64_t local_id, bool valid = true) {
        if (rank > kMaxRank) throw ParticleError("particle id: rank " + std::to_string(rank) + " exceeds 24 bits");
        if (local_id > kMaxLocal)
            throw ParticleError("particle id: local id " + std::to_string(local_id) + " exceeds 39 bits");
        return ParticleId((valid ? kValidBit : 0) | (local_id << kRankBits) | rank);
    }

    constexpr std::uint64_t word() const noexcept { return w_; }
    constexpr bool is_valid() const noexcept { return (w_ & kValidBit) != 0; }
    constexpr std::uint64_t rank() const noexcept { return w_ & kMaxRank; }
    constexpr std::uint64_t local_id() const noexcept { return (w_ >> kRankBits) & kMaxLocal; }
    constexpr ParticleId invalidated() const noexcept { return ParticleId(w_ & ~kValidBit); }
    constexpr ParticleId validated() const noexcept { return ParticleId(w_ | kValidBit); }

    friend constexpr auto operator<=>(ParticleId, ParticleId) = default;

  private:
    std::uint64_t w_ = 0;
};

//! Growable arena-backed column of trivially copyable values.
template <class T>
class ArenaColumn {
  public:
    explicit ArenaColumn(Arena* arena = The_Arena()) : arena_(arena) {}

    Long size() const noexcept { return n_; }
    T* data() noexcept { return reinterpret_cast<T*>(buf_.data()); }
    const T* data() const noexcept { return reinterpret_cast<const T*>(buf_.data()); }
    T& operator[](Long i) noexcept { return data()[i]; }
    const T& operator[](Long i) const noexcept { return data()[i]; }

    void reserve(Long n) {
        if (n <= cap_) return;
        Long cap = std::max<Long>(n, std::max<Long>(16, 2 * cap_));
        ArenaBuffer nb(std::size_t(cap) * sizeof(T), arena_);
        if (n_ > 0) std::memcpy(nb.data(), buf_.data(), std::size_t(n_) * sizeof(T));
        buf_ = std::move(nb);
        cap_ = cap;
    }
    void resize(Long n, T fill = T{}) {
        reserve(n);
        for (Long i = n_; i < n; ++i) data()[i] = fill;
        n_ = n;
    }
    void push_back(T v) {
        if (n_ == cap_) reserve(n_ + 1);
        data()[n_++] = v;
    }
    void clear() noexcept { n_ = 0; }

  private:
    Arena* arena_;
    ArenaBuffer buf_;
    Long n_ = 0;
    Long cap_ = 0;
};

struct ParticleTileData;

//! Kernel-side handle to one particle's id word.
struct ParticleIdRef {
    std::uint64_t* w;
    bool is_valid() const noexcept { return ParticleId(*w).is_valid(); }
    ParticleId get() const noexcept { return ParticleId(*w); }
    void invalidate() const noexcept { *w = ParticleId(*w).invalidated().word(); }
};

//! Kernel-side handle to one particle of a tile.
struct ParticleRef {
    const ParticleTileData* t;
    Long i;
    Real& pos(int d) const noexcept;
    ParticleIdRef id() const noexcept;
    Real& rdata(int c) const noexcept;
    int& idata(int c) const noexcept;
};

//! Raw column pointers of one tile, valid for the duration of a launch.
struct ParticleTileData {
    Real* pos[SpaceDim] = {};
    std::uint64_t* idcpu = nullptr;
    Real* const* rdata = nullptr;
    int* const* idata = nullptr;
    Long np = 0;
    int nreal = 0;
    int nint = 0;

    ParticleRef operator[](Long i) const noexcept { return {this, i}; }
};

inline Real& ParticleRef::pos(int d) const noexcept { return t->pos[d][i]; }
inline ParticleIdRef ParticleRef::id() const noexcept { return {t->idcpu + i}; }
inline Real& ParticleRef::rdata(int c) const noexcept { return t->rdata[c][i]; }
inline int& ParticleRef::idata(int c) const noexcept { return t->idata[c][i]; }

//! Columnar particle storage for one (level, grid, tile).
class ParticleTile {
  public:
    ParticleTile(int nreal, int nint, Arena* arena = The_Arena());

    Long size() const noexcept { return id_.size(); }
    bool empty() const noexcept { return size() == 0; }
    int num_real() const noexcept { return int(real_.size()); }
    int num_int() const noexcept { return int(int_.size()); }
    Arena* arena() const noexcept { return arena_; }

    Real* pos(int d) noexcept { return pos_[d].data(); }
    const Real* pos(int d) const noexcept { return pos_[d].data(); }
    std::uint64_t* idcpu() noexcept { return id_.data(); }
    const std::uint64_t* idcpu() const noexcept { return id_.data(); }
    Real* real(int c) noexcept { return real_[c].data(); }
    const Real* real(int c) const noexcept { return real_[c].data(); }
    int* int_data(int c) noexcept { return int_[c].data(); }
    const int* int_data(int c) const noexcept { return int_[c].data(); }

    RealVect position(Long i) const noexcept;
    ParticleId id(Long i) const noexcept { return ParticleId(id_[i]); }

    //! Appends one particle; missing trailing component values default to zero.
    void push_back(const RealVect& p, ParticleId id, std::span<const Real> reals = {}, std::span<const int> ints = {});
    //! Appends particle i of another tile with the same column layout.
    void push_back_from(const ParticleTile& o, Long i);
    void resize(Long n);
    void reserve(Long n);
    void clear();

    //! Keeps particles whose keep flag is set, preserving their order.
    void compact(const std::vector<char>& keep);

    void add_real_column();
    void add_int_column();

    ParticleTileData data();

  private:
    Arena* arena_;
    std::vector<ArenaColumn<Real>> pos_;
    ArenaColumn<std::uint64_t> id_;
    std::vector<ArenaColumn<Real>> real_;
    std::vector<ArenaColumn<int>> int_;
    std::vector<Real*> rptr_;
    std::vector<int*> iptr_;
};

//! Mesh description of one level as seen by particles.
struct ParticleLevel {
    Geometry geom;
    BoxArray ba;
    DistributionMapping dm;
};

struct TileKey {
    int level;
    int grid;
    int tile;
    friend auto operator<=>(const TileKey&, const TileKey&) = default;
};

enum class LostPolicy { Remove, Error };
LostPolicy lost_policy_from_string(const std::string& s);

//! Particles bound to (level, grid, tile) of a mesh hierarchy. Each rank holds
//! the particles of the grids it owns; particles added or moved onto grids of
//! other ranks are shipped by redistribute().
class ParticleContainer {
  public:
    ParticleContainer(std::vector<ParticleLevel> layout, Communicator& comm = Communicator::serial(),
                      std::vector<std::string> real_names = {}, std::vector<std::string> int_names = {},
                      const IntVect& tile_size = IntVect(0), Arena* arena = The_Arena());

    const std::vector<ParticleLevel>& layout() const noexcept { return layout_; }
    int finest_level() const noexcept { return int(layout_.size()) - 1; }
    Communicator& comm() const noexcept { return *comm_; }
    Backend& backend() const noexcept { return comm_->backend(); }
    const IntVect& tile_size() const noexcept { return tile_size_; }

    //! Replaces the mesh hierarchy; call redistribute() afterwards.
    void set_layout(std::vector<ParticleLevel> layout);

    //! Registers a runtime component (zero-filled on existing particles).
    //! Collective by contract: every rank registers the same names in order.
    int add_real_component(const std::string& name);
    int add_int_component(const std::string& name);
    int real_index(const std::string& name) const;
    int int_index(const std::string& name) const;
    const std::vector<std::string>& real_names() const noexcept { return real_names_; }
    const std::vector<std::string>& int_names() const noexcept { return int_names_; }

    void set_lost_policy(LostPolicy p) noexcept { lost_policy_ = p; }
    LostPolicy lost_policy() const noexcept { return lost_policy_; }

    //! Adds particles with fresh ids (this rank, next local counter). Named
    //! component columns must be registered and have one value per position;
    //! unnamed components are zero. Throws if a position lies outside a
    //! non-periodic domain.
    void add_particles(std::span<const RealVect> positions, const std::map<std::string, std::vector<Real>>& reals = {},
                       const std::map<std::string, std::vector<int>>& ints = {});

    //! Collective: removes invalid particles, wraps periodic positions and
    //! moves every particle to the tile owning its position. At most one
    //! message per ordered rank pair.
    void redistribute();

    //! (level, grid, tile) owning position p after periodic wrapping (p is
    //! updated in place); nullopt if p is outside the domain or any grid.
    std::optional<TileKey> locate(RealVect& p) const;
    Box tile_region(const TileKey& key) const;
    int owner(const TileKey& key) const { return layout_[key.level].dm[key.grid]; }

    //! Particles held by this rank.
    Long num_local(bool valid_only = true) const;
    //! Collective total over all ranks.
    Long num_global(bool valid_only = true) const;
    //! Particles removed as lost by redistribute() on this rank.
    Long num_lost() const noexcept { return lost_; }
    std::uint64_t next_local_id() const noexcept { return next_id_; }

    ParticleTile& define_tile(const TileKey& key);
    ParticleTile* find_tile(const TileKey& key);
    const ParticleTile* find_tile(const TileKey& key) const;
    std::map<TileKey, ParticleTile>& tiles() noexcept { return tiles_; }
    const std::map<TileKey, ParticleTile>& tiles() const noexcept { return tiles_; }

  private:
    int tile_of(int level, int grid, const IntVect& cell) const;
    std::optional<TileKey> locate_hint(RealVect& p, const TileKey* hint) const;

    std::vector<ParticleLevel> layout_;
    Communicator* comm_;
    std::vector<std::string> real_names_;
    std::vector<std::string> int_names_;
    IntVect tile_size_;
    Arena* arena_;
    LostPolicy lost_policy_ = LostPolicy::Remove;
    std::map<TileKey, ParticleTile> tiles_;
    std::uint64_t next_id_ = 0;
    Long lost_ = 0;
};

//! Iterates the non-empty tiles of one level held by this rank, in key order.
class ParIter {
  public:
    ParIter(ParticleContainer& pc, int level);

    bool isValid() const noexcept { return pos_ < items_.size(); }
    ParIter& operator++() noexcept {
        ++pos_;
        return *this;
    }
    std::size_t length() const noexcept { return items_.size(); }

    const TileKey& key() const { return items_[pos_].first; }
    int level() const { return key().level; }
    int grid() const { return key().grid; }
    int tile_index() const { return key().tile; }
    Box tilebox() const { return pc_->tile_region(key()); }
    ParticleTile& tile() const { return *items_[pos_].second; }
    Long num_particles() const { return tile().size(); }

    Real* real(const std::string& name) const { return tile().real(pc_->real_index(name)); }
    int* int_data(const std::string& name) const { return tile().int_data(pc_->int_index(name)); }
    Real* pos(int d) const { return tile().pos(d); }
    std::uint64_t* idcpu() const { return tile().idcpu(); }

  private:
    ParticleContainer* pc_;
    std::vector<std::pair<TileKey, ParticleTile*>> items_;
    std::size_t pos_ = 0;
};

namespace detail {

struct TileSpan {
    ParticleTileData data;
    Long offset;
};

std::vector<TileSpan> particle_spans(ParticleContainer& pc, int level);

template <class F>
void for_particles(const std::vector<TileSpan>& spans, Long begin, Long end, F&& f) {
    if (begin >= end) return;
    auto it = std::upper_bound(spans.begin(), spans.end(), begin,
                               [](Long v, const TileSpan& s) { return v < s.offset; });
    for (std::size_t t = std::size_t(it - spans.begin()) - 1; t < spans.size() && begin < end; ++t) {
        const auto& s = spans[t];
        const Long stop = std::min(end, s.offset + s.data.np);
        for (Long i = begin - s.offset; i < stop - s.offset; ++i) f(s.data, i);
        begin = stop;
    }
}

} // namespace detail

//! One fused launch over every particle (valid or not) of the given level
//! (-1: all levels): body(const ParticleTileData&, i). Use
//! ptd[i].id().is_valid() to restrict work to valid particles.
template <class F>
void particle_apply(ParticleContainer& pc, int level, F&& body) {
    auto spans = detail::particle_spans(pc, level);
    const Long total = spans.empty() ? 0 : spans.back().offset + spans.back().data.np;
    Backend& be = pc.backend();
    const int nchunks = int(std::min<Long>(be.for_chunks(), std::max<Long>(total, 1)));
    be.launch(nchunks, [&](int c) {
        auto [b, e] = detail::chunk_range(total, nchunks, c);
        detail::for_particles(spans, b, e, body);
    });
}

//! Single-launch mixed reduction over the valid particles held by this rank:
//! f(const ParticleTileData&, i) returns one value per op.
template <class... Ops, class F>
auto particle_reduce(ParticleContainer& pc, int level, TypeList<Ops...>, F&& f) {
    using V = typename detail::as_tuple<std::invoke_result_t<F&, const ParticleTileData&, Long>>::type;
    using R = detail::Reducer<TypeList<Ops...>, V>;
    auto spans = detail::particle_spans(pc, level);
    const Long total = spans.empty() ? 0 : spans.back().offset + spans.back().data.np;
    return detail::reduce_chunks<R>(pc.backend(), total, [&](Long b, Long e, V& acc) {
        detail::for_particles(spans, b, e, [&](const ParticleTileData& p, Long i) {
            if (ParticleId(p.idcpu[i]).is_valid()) R::combine(acc, V(f(p, i)));
        });
    });
}

} // namespace miniamr
