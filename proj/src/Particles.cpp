#include "miniamr/Particles.hpp"

#include <algorithm>
#include <cmath>

#include "miniamr/Exchange.hpp"
#include "miniamr/MultiFab.hpp"

namespace miniamr {

ParticleTile::ParticleTile(int nreal, int nint, Arena* arena) : arena_(arena), id_(arena) {
    for (int d = 0; d < SpaceDim; ++d) pos_.emplace_back(arena);
    for (int c = 0; c < nreal; ++c) real_.emplace_back(arena);
    for (int c = 0; c < nint; ++c) int_.emplace_back(arena);
}

RealVect ParticleTile::position(Long i) const noexcept {
    RealVect p;
    for (int d = 0; d < SpaceDim; ++d) p[d] = pos_[d][i];
    return p;
}

void ParticleTile::push_back(const RealVect& p, ParticleId id, std::span<const Real> reals,
                             std::span<const int> ints) {
    if (reals.size() > real_.size() || ints.size() > int_.size())
        throw ParticleError("ParticleTile::push_back: more component values than columns");
    for (int d = 0; d < SpaceDim; ++d) pos_[d].push_back(p[d]);
    id_.push_back(id.word());
    for (std::size_t c = 0; c < real_.size(); ++c) real_[c].push_back(c < reals.size() ? reals[c] : Real(0));
    for (std::size_t c = 0; c < int_.size(); ++c) int_[c].push_back(c < ints.size() ? ints[c] : 0);
}

void ParticleTile::push_back_from(const ParticleTile& o, Long i) {
    for (int d = 0; d < SpaceDim; ++d) pos_[d].push_back(o.pos_[d][i]);
    id_.push_back(o.id_[i]);
    for (std::size_t c = 0; c < real_.size(); ++c) real_[c].push_back(o.real_[c][i]);
    for (std::size_t c = 0; c < int_.size(); ++c) int_[c].push_back(o.int_[c][i]);
}

void ParticleTile::resize(Long n) {
    for (auto& c : pos_) c.resize(n);
    id_.resize(n);
    for (auto& c : real_) c.resize(n);
    for (auto& c : int_) c.resize(n);
}

void ParticleTile::reserve(Long n) {
    for (auto& c : pos_) c.reserve(n);
    id_.reserve(n);
    for (auto& c : real_) c.reserve(n);
    for (auto& c : int_) c.reserve(n);
}

void ParticleTile::clear() { resize(0); }

namespace {

template <class T>
void compact_column(ArenaColumn<T>& col, const std::vector<char>& keep) {
    Long w = 0;
    for (Long r = 0; r < col.size(); ++r)
        if (keep[r]) col[w++] = col[r];
    col.resize(w);
}

} // namespace

void ParticleTile::compact(const std::vector<char>& keep) {
    for (auto& c : pos_) compact_column(c, keep);
    compact_column(id_, keep);
    for (auto& c : real_) compact_column(c, keep);
    for (auto& c : int_) compact_column(c, keep);
}

void ParticleTile::add_real_column() {
    real_.emplace_back(arena_);
    real_.back().resize(size());
}

void ParticleTile::add_int_column() {
    int_.emplace_back(arena_);
    int_.back().resize(size());
}

ParticleTileData ParticleTile::data() {
    ParticleTileData t;
    for (int d = 0; d < SpaceDim; ++d) t.pos[d] = pos_[d].data();
    t.idcpu = id_.data();
    rptr_.clear();
    for (auto& c : real_) rptr_.push_back(c.data());
    iptr_.clear();
    for (auto& c : int_) iptr_.push_back(c.data());
    t.rdata = rptr_.data();
    t.idata = iptr_.data();
    t.np = size();
    t.nreal = num_real();
    t.nint = num_int();
    return t;
}

// ---------------------------------------------------------------------------

LostPolicy lost_policy_from_string(const std::string& s) {
    if (s == "remove") return LostPolicy::Remove;
    if (s == "error") return LostPolicy::Error;
    throw std::invalid_argument("particles.on_lost must be remove or error, got '" + s + "'");
}

ParticleContainer::ParticleContainer(std::vector<ParticleLevel> layout, Communicator& comm,
                                     std::vector<std::string> real_names, std::vector<std::string> int_names,
                                     const IntVect& tile_size, Arena* arena)
    : comm_(&comm), tile_size_(tile_size.all_gt(0) ? tile_size : default_tile_size()), arena_(arena) {
    set_layout(std::move(layout));
    for (auto& n : real_names) add_real_component(n);
    for (auto& n : int_names) add_int_component(n);
}

void ParticleContainer::set_layout(std::vector<ParticleLevel> layout) {
    if (layout.empty()) throw ParticleError("ParticleContainer: layout needs at least one level");
    for (const auto& l : layout) {
        if (l.ba.size() != l.dm.size()) throw ParticleError("ParticleContainer: BoxArray/DistributionMapping mismatch");
        if (!l.ba.empty() && l.dm.nranks() != comm_->nranks())
            throw ParticleError("ParticleContainer: DistributionMapping rank count mismatch");
    }
    // Keys of the old layout are meaningless in the new one: park every
    // particle in a level -1 staging tile until the next redistribute().
    if (!tiles_.empty()) {
        ParticleTile staged(int(real_names_.size()), int(int_names_.size()), arena_);
        for (auto& [k, t] : tiles_)
            for (Long i = 0; i < t.size(); ++i) staged.push_back_from(t, i);
        tiles_.clear();
        if (!staged.empty()) tiles_.emplace(TileKey{-1, 0, 0}, std::move(staged));
    }
    layout_ = std::move(layout);
}

int ParticleContainer::add_real_component(const std::string& name) {
    if (std::find(real_names_.begin(), real_names_.end(), name) != real_names_.end())
        throw ParticleError("particle component '" + name + "' already registered");
    real_names_.push_back(name);
    for (auto& [k, t] : tiles_) t.add_real_column();
    return int(real_names_.size()) - 1;
}

int ParticleContainer::add_int_component(const std::string& name) {
    if (std::find(int_names_.begin(), int_names_.end(), name) != int_names_.end())
        throw ParticleError("particle component '" + name + "' already registered");
    int_names_.push_back(name);
    for (auto& [k, t] : tiles_) t.add_int_column();
    return int(int_names_.size()) - 1;
}

int ParticleContainer::real_index(const std::string& name) const {
    auto it = std::find(real_names_.begin(), real_names_.end(), name);
    if (it == real_names_.end()) throw ParticleError("unknown particle real component '" + name + "'");
    return int(it - real_names_.begin());
}

int ParticleContainer::int_index(const std::string& name) const {
    auto it = std::find(int_names_.begin(), int_names_.end(), name);
    if (it == int_names_.end()) throw ParticleError("unknown particle int component '" + name + "'");
    return int(it - int_names_.begin());
}

int ParticleContainer::tile_of(int level, int grid, const IntVect& cell) const {
    const Box& b = layout_[level].ba[grid];
    int index = 0;
    int stride = 1;
    for (int d = 0; d < SpaceDim; ++d) {
        const int ntiles = (b.length(d) + tile_size_[d] - 1) / tile_size_[d];
        index += ((cell[d] - b.lo(d)) / tile_size_[d]) * stride;
        stride *= ntiles;
    }
    return index;
}

Box ParticleContainer::tile_region(const TileKey& key) const {
    const Box& b = layout_[key.level].ba[key.grid];
    IntVect lo, hi;
    int rem = key.tile;
    for (int d = 0; d < SpaceDim; ++d) {
        const int ntiles = (b.length(d) + tile_size_[d] - 1) / tile_size_[d];
        const int t = rem % ntiles;
        rem /= ntiles;
        lo[d] = b.lo(d) + t * tile_size_[d];
        hi[d] = std::min(lo[d] + tile_size_[d] - 1, b.hi(d));
    }
    return Box(lo, hi);
}

namespace {

//! Wraps p into the domain along periodic axes; false if p lies outside a
//! non-periodic extent.
bool wrap_position(const Geometry& g, RealVect& p) {
    for (int d = 0; d < SpaceDim; ++d) {
        const Real lo = g.prob_lo(d), hi = g.prob_hi(d);
        if (g.is_periodic(d)) {
            const Real len = hi - lo;
            if (p[d] < lo || p[d] >= hi) {
                Real x = std::fmod(p[d] - lo, len);
                if (x < 0) x += len;
                p[d] = lo + x;
                if (p[d] >= hi) p[d] = lo;
            }
        } else if (!(p[d] >= lo && p[d] < hi)) {
            return false;
        }
    }
    return true;
}

IntVect cell_of(const Geometry& g, const RealVect& p) {
    IntVect iv;
    for (int d = 0; d < SpaceDim; ++d) {
        iv[d] = g.cell_index(d, p[d]);
        // Rounding can put a position just below prob_hi into the next cell.
        iv[d] = std::clamp(iv[d], g.domain().lo(d), g.domain().hi(d));
    }
    return iv;
}

} // namespace

std::optional<TileKey> ParticleContainer::locate_hint(RealVect& p, const TileKey* hint) const {
    if (!wrap_position(layout_[0].geom, p)) return std::nullopt;
    for (int lev = finest_level(); lev >= 0; --lev) {
        const auto& l = layout_[lev];
        if (l.ba.empty()) continue;
        const IntVect iv = cell_of(l.geom, p);
        int grid = -1;
        if (hint && hint->level == lev && l.ba[hint->grid].contains(iv)) grid = hint->grid;
        else grid = l.ba.find(iv);
        if (grid >= 0) return TileKey{lev, grid, tile_of(lev, grid, iv)};
    }
    return std::nullopt;
}

std::optional<TileKey> ParticleContainer::locate(RealVect& p) const { return locate_hint(p, nullptr); }

ParticleTile& ParticleContainer::define_tile(const TileKey& key) {
    auto it = tiles_.find(key);
    if (it == tiles_.end())
        it = tiles_.emplace(key, ParticleTile(int(real_names_.size()), int(int_names_.size()), arena_)).first;
    return it->second;
}

ParticleTile* ParticleContainer::find_tile(const TileKey& key) {
    auto it = tiles_.find(key);
    return it == tiles_.end() ? nullptr : &it->second;
}

const ParticleTile* ParticleContainer::find_tile(const TileKey& key) const {
    auto it = tiles_.find(key);
    return it == tiles_.end() ? nullptr : &it->second;
}

void ParticleContainer::add_particles(std::span<const RealVect> positions,
                                      const std::map<std::string, std::vector<Real>>& reals,
                                      const std::map<std::string, std::vector<int>>& ints) {
    const std::size_t n = positions.size();
    std::vector<const std::vector<Real>*> rcols(real_names_.size(), nullptr);
    std::vector<const std::vector<int>*> icols(int_names_.size(), nullptr);
    for (const auto& [name, col] : reals) {
        if (col.size() != n) throw ParticleError("add_particles: column '" + name + "' has the wrong length");
        rcols[real_index(name)] = &col;
    }
    for (const auto& [name, col] : ints) {
        if (col.size() != n) throw ParticleError("add_particles: column '" + name + "' has the wrong length");
        icols[int_index(name)] = &col;
    }
    // Validate everything before mutating the container.
    std::vector<TileKey> keys(n);
    std::vector<RealVect> wrapped(positions.begin(), positions.end());
    for (std::size_t p = 0; p < n; ++p) {
        auto key = locate(wrapped[p]);
        if (!key) throw ParticleError("add_particles: particle " + std::to_string(p) + " lies outside the domain");
        keys[p] = *key;
    }
    if (next_id_ + n > ParticleId::kMaxLocal + 1) throw ParticleError("add_particles: local id space exhausted");
    std::vector<Real> rv(real_names_.size());
    std::vector<int> iv(int_names_.size());
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t c = 0; c < rv.size(); ++c) rv[c] = rcols[c] ? (*rcols[c])[p] : Real(0);
        for (std::size_t c = 0; c < iv.size(); ++c) iv[c] = icols[c] ? (*icols[c])[p] : 0;
        define_tile(keys[p]).push_back(wrapped[p], ParticleId::make(std::uint64_t(comm_->rank()), next_id_++), rv, iv);
    }
}

Long ParticleContainer::num_local(bool valid_only) const {
    Long n = 0;
    for (const auto& [k, t] : tiles_) {
        if (!valid_only) {
            n += t.size();
            continue;
        }
        const std::uint64_t* id = t.idcpu();
        for (Long i = 0; i < t.size(); ++i) n += ParticleId(id[i]).is_valid() ? 1 : 0;
    }
    return n;
}

Long ParticleContainer::num_global(bool valid_only) const {
    return std::get<0>(global_reduce(*comm_, TypeList<ReduceOpSum>{}, std::make_tuple(num_local(valid_only))));
}

namespace {

template <class T>
void put(std::byte*& p, const T* src, Long n) {
    std::memcpy(p, src, std::size_t(n) * sizeof(T));
    p += std::size_t(n) * sizeof(T);
}

template <class T>
void get(const std::byte*& p, T* dst, Long n) {
    std::memcpy(dst, p, std::size_t(n) * sizeof(T));
    p += std::size_t(n) * sizeof(T);
}

std::size_t packed_bytes(Long n, int nreal, int nint) {
    return sizeof(Long) + std::size_t(n) * (SpaceDim * sizeof(Real) + sizeof(std::uint64_t) + nreal * sizeof(Real) +
                                            nint * sizeof(int));
}

ArenaBuffer pack_tile(ParticleTile& t) {
    const Long n = t.size();
    ArenaBuffer buf(packed_bytes(n, t.num_real(), t.num_int()), The_Comm_Arena());
    std::byte* p = buf.data();
    put(p, &n, 1);
    for (int d = 0; d < SpaceDim; ++d) put(p, t.pos(d), n);
    put(p, t.idcpu(), n);
    for (int c = 0; c < t.num_real(); ++c) put(p, t.real(c), n);
    for (int c = 0; c < t.num_int(); ++c) put(p, t.int_data(c), n);
    return buf;
}

void unpack_tile(const ArenaBuffer& buf, ParticleTile& t) {
    const std::byte* p = buf.data();
    Long n = 0;
    get(p, &n, 1);
    if (buf.size() != packed_bytes(n, t.num_real(), t.num_int()))
        throw CommError("redistribute: particle message has an unexpected size");
    t.resize(n);
    for (int d = 0; d < SpaceDim; ++d) get(p, t.pos(d), n);
    get(p, t.idcpu(), n);
    for (int c = 0; c < t.num_real(); ++c) get(p, t.real(c), n);
    for (int c = 0; c < t.num_int(); ++c) get(p, t.int_data(c), n);
}

} // namespace

void ParticleContainer::redistribute() {
    const int me = comm_->rank();
    const int nranks = comm_->nranks();
    const int nreal = int(real_names_.size());
    const int nint = int(int_names_.size());

    std::vector<ParticleTile> outgoing;
    outgoing.reserve(nranks);
    for (int r = 0; r < nranks; ++r) outgoing.emplace_back(nreal, nint, arena_);
    std::map<TileKey, ParticleTile> moved;
    Long lost_here = 0;

    for (auto& [key, tile] : tiles_) {
        std::vector<char> keep(std::size_t(tile.size()), 0);
        std::uint64_t* id = tile.idcpu();
        for (Long i = 0; i < tile.size(); ++i) {
            if (!ParticleId(id[i]).is_valid()) continue;
            RealVect p = tile.position(i);
            auto dest = locate_hint(p, &key);
            if (!dest) {
                if (lost_policy_ == LostPolicy::Error)
                    throw ParticleError("redistribute: particle " + std::to_string(ParticleId(id[i]).local_id()) +
                                        " from rank " + std::to_string(ParticleId(id[i]).rank()) +
                                        " left the domain");
                ++lost_here;
                continue;
            }
            for (int d = 0; d < SpaceDim; ++d) tile.pos(d)[i] = p[d];
            const int rank = owner(*dest);
            if (*dest == key && rank == me) {
                keep[i] = 1;
                continue;
            }
            if (rank == me) {
                auto it = moved.find(*dest);
                if (it == moved.end()) it = moved.emplace(*dest, ParticleTile(nreal, nint, arena_)).first;
                it->second.push_back_from(tile, i);
            } else {
                outgoing[rank].push_back_from(tile, i);
            }
        }
        tile.compact(keep);
    }
    lost_ += lost_here;

    for (auto& [key, t] : moved) {
        ParticleTile& dst = define_tile(key);
        for (Long i = 0; i < t.size(); ++i) dst.push_back_from(t, i);
    }

    if (nranks > 1) {
        // Exchange counts first so that only non-empty buffers travel.
        std::vector<Long> counts(nranks);
        for (int r = 0; r < nranks; ++r) counts[r] = outgoing[r].size();
        std::vector<std::byte> msg(nranks * sizeof(Long));
        std::memcpy(msg.data(), counts.data(), msg.size());
        auto all = comm_->allgather(std::move(msg));
        for (int r = 0; r < nranks; ++r)
            if (r != me && counts[r] > 0) comm_->send(r, pack_tile(outgoing[r]));
        for (int r = 0; r < nranks; ++r) {
            if (r == me) continue;
            Long incoming = 0;
            std::memcpy(&incoming, all[r].data() + me * sizeof(Long), sizeof(Long));
            if (incoming == 0) continue;
            ParticleTile in(nreal, nint, arena_);
            unpack_tile(comm_->recv(r), in);
            for (Long i = 0; i < in.size(); ++i) {
                RealVect p = in.position(i);
                auto dest = locate(p);
                if (!dest || owner(*dest) != me)
                    throw CommError("redistribute: received a particle this rank does not own");
                define_tile(*dest).push_back_from(in, i);
            }
        }
    }

    std::erase_if(tiles_, [](const auto& kv) { return kv.second.empty(); });
}

// ---------------------------------------------------------------------------

ParIter::ParIter(ParticleContainer& pc, int level) : pc_(&pc) {
    for (auto& [k, t] : pc.tiles())
        if (k.level == level && !t.empty()) items_.emplace_back(k, &t);
}

namespace detail {

std::vector<TileSpan> particle_spans(ParticleContainer& pc, int level) {
    std::vector<TileSpan> spans;
    Long off = 0;
    for (auto& [k, t] : pc.tiles()) {
        if (t.empty() || (level >= 0 && k.level != level)) continue;
        spans.push_back({t.data(), off});
        off += t.size();
    }
    return spans;
}

} // namespace detail

} // namespace miniamr
