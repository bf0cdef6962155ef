#include "miniamr/Amr.hpp"

#include <cstring>
#include <functional>
#include <map>
#include <mutex>
#include <tuple>

namespace miniamr {

TagField::TagField(const BoxArray& ba, const DistributionMapping& dm, Communicator& comm)
    : ba_(ba), dm_(dm), comm_(&comm) {
    if (ba.size() != dm.size()) throw AmrError("TagField: BoxArray/DistributionMapping mismatch");
    for (std::size_t i = 0; i < ba.size(); ++i) {
        if (dm[i] != comm.rank()) continue;
        index_.push_back(int(i));
        tags_.emplace_back(std::size_t(ba[i].num_pts()), std::uint8_t(0));
    }
}

void TagField::set(int li, const IntVect& iv, bool on) {
    const Box& b = ba_[index_[li]];
    if (!b.contains(iv)) throw AmrError("TagField::set: cell outside the fab");
    tags_[li][b.index(iv)] = on ? 1 : 0;
}

bool TagField::get(int li, const IntVect& iv) const {
    const Box& b = ba_[index_[li]];
    return b.contains(iv) && tags_[li][b.index(iv)] != 0;
}

void TagField::clear() {
    for (auto& t : tags_) std::fill(t.begin(), t.end(), std::uint8_t(0));
}

// ---------------------------------------------------------------------------

AmrMesh::AmrMesh(const Geometry& level0, const AmrConfig& cfg, int nranks) : cfg_(cfg), nranks_(nranks) {
    if (cfg.max_level < 0) throw AmrError("amr.max_level must be >= 0");
    if (cfg.ref_ratio < 1) throw AmrError("amr.ref_ratio must be >= 1");
    if (cfg.max_level > 0) {
        if (cfg.blocking_factor < cfg.ref_ratio || cfg.blocking_factor % cfg.ref_ratio != 0)
            throw AmrError("amr.blocking_factor must be a positive multiple of amr.ref_ratio");
        if (cfg.max_grid_size < cfg.blocking_factor || cfg.max_grid_size % cfg.blocking_factor != 0)
            throw AmrError("amr.max_grid_size must be a positive multiple of amr.blocking_factor");
    }
    if (cfg.max_grid_size < 1) throw AmrError("amr.max_grid_size must be >= 1");
    geom_.push_back(level0);
    for (int l = 1; l <= cfg.max_level; ++l) geom_.push_back(geom_.back().refine(cfg.ref_ratio));
}

void AmrMesh::make_base_level() {
    BoxArray ba = BoxArray::from_domain(geom_[0].domain(), IntVect(cfg_.max_grid_size));
    set_level(0, ba, DistributionMapping::round_robin(ba.size(), nranks_));
}

void AmrMesh::set_level(int lev, const BoxArray& ba, const DistributionMapping& dm) {
    if (lev < 0 || lev > cfg_.max_level) throw AmrError("set_level: level " + std::to_string(lev) + " out of range");
    if (lev > finest_ + 1) throw AmrError("set_level: level " + std::to_string(lev) + " skips a level");
    if (ba.empty()) {
        if (lev == 0) throw AmrError("set_level: level 0 needs grids");
        finest_ = lev - 1;
        ba_.resize(std::size_t(lev));
        dm_.resize(std::size_t(lev));
        return;
    }
    if (ba.size() != dm.size()) throw AmrError("set_level: BoxArray/DistributionMapping mismatch");
    for (const Box& b : ba.boxes())
        if (!geom_[lev].domain().contains(b)) throw AmrError("set_level: box " + b.str() + " outside the domain");
    ba_.resize(std::size_t(lev) + 1);
    dm_.resize(std::size_t(lev) + 1);
    ba_[lev] = ba;
    dm_[lev] = dm;
    finest_ = lev;
    // Finer levels are stale once this one changes.
    if (lev > 0 && !properly_nested(lev)) throw AmrError("set_level: level " + std::to_string(lev) + " is not properly nested");
}

bool AmrMesh::properly_nested(int lev) const {
    if (lev <= 0) return true;
    if (lev > finest_) throw AmrError("properly_nested: level " + std::to_string(lev) + " is not defined");
    const Box& cdom = geom_[lev - 1].domain();
    for (const Box& b : ba_[lev].boxes()) {
        const Box need = intersect(grow(coarsen(b, cfg_.ref_ratio), 1), cdom);
        if (!ba_[lev - 1].covers(need)) return false;
    }
    return true;
}

std::vector<ParticleLevel> AmrMesh::particle_layout() const {
    std::vector<ParticleLevel> out;
    for (int l = 0; l <= finest_; ++l) out.push_back({geom_[l], ba_[l], dm_[l]});
    return out;
}

BoxArray AmrMesh::regrid(int lev, const TagField& tags) const {
    if (lev < 0 || lev >= cfg_.max_level) throw AmrError("regrid: level " + std::to_string(lev) + " has no finer level");
    if (lev > finest_) throw AmrError("regrid: level " + std::to_string(lev) + " is not defined");
    const Box& dom = geom_[lev].domain();
    for (const Box& b : tags.box_array().boxes())
        if (!dom.contains(b)) throw AmrError("regrid: tags outside the level domain at " + b.str());

    const int r = cfg_.ref_ratio;
    const int cb = cfg_.blocking_factor / r;
    IntVect nchunk;
    for (int d = 0; d < SpaceDim; ++d) {
        if (dom.length(d) % cb != 0)
            throw AmrError("regrid: domain extent is not a multiple of blocking_factor / ref_ratio");
        nchunk[d] = dom.length(d) / cb;
    }
    const Box chunk_space(IntVect(0), nchunk - IntVect(1));

    // Tagged chunks of this rank, then of all ranks.
    std::vector<std::uint8_t> mine(std::size_t(chunk_space.num_pts()), 0);
    for (int li = 0; li < tags.local_size(); ++li) {
        const Box& b = tags.box_array()[tags.global_index(li)];
        const std::uint8_t* t = tags.data(li);
        for (Long o = 0; o < b.num_pts(); ++o) {
            if (!t[o]) continue;
            IntVect c = b.at_offset(o) - dom.lo();
            for (int d = 0; d < SpaceDim; ++d) c[d] = floor_div(c[d], cb);
            mine[chunk_space.index(c)] = 1;
        }
    }
    std::vector<std::byte> msg(mine.size());
    std::memcpy(msg.data(), mine.data(), mine.size());
    auto all = tags.comm().nranks() > 1 ? tags.comm().allgather(std::move(msg))
                                        : std::vector<std::vector<std::byte>>{std::move(msg)};
    std::vector<std::uint8_t> tagged(mine.size(), 0);
    for (const auto& m : all)
        for (std::size_t i = 0; i < tagged.size(); ++i) tagged[i] |= std::uint8_t(m[i]);

    auto chunk_box = [&](const IntVect& c, const IntVect& ext) {
        const IntVect lo = dom.lo() + c * cb;
        return Box(lo, lo + ext * cb - IntVect(1));
    };
    if (lev > 0) {
        for (Long o = 0; o < chunk_space.num_pts(); ++o) {
            if (!tagged[o]) continue;
            const Box need = intersect(grow(chunk_box(chunk_space.at_offset(o), IntVect(1)), 1), dom);
            if (!ba_[lev].covers(need)) tagged[o] = 0;
        }
    }

    // Greedy merge: extend along x, then whole rows along y, then slabs along z.
    std::vector<std::uint8_t> used(tagged.size(), 0);
    auto free_at = [&](const IntVect& c) {
        const Long o = chunk_space.index(c);
        return tagged[o] && !used[o];
    };
    std::vector<Box> fine;
    for (Long o = 0; o < chunk_space.num_pts(); ++o) {
        if (!tagged[o] || used[o]) continue;
        const IntVect c0 = chunk_space.at_offset(o);
        IntVect ext(1);
        for (int d = 0; d < SpaceDim; ++d) {
            for (;;) {
                if (c0[d] + ext[d] >= nchunk[d]) break;
                IntVect slab_lo = c0;
                slab_lo[d] = c0[d] + ext[d];
                IntVect slab_hi = c0 + ext - IntVect(1);
                slab_hi[d] = slab_lo[d];
                const Box slab(slab_lo, slab_hi);
                bool ok = true;
                for (Long s = 0; s < slab.num_pts() && ok; ++s) ok = free_at(slab.at_offset(s));
                if (!ok) break;
                ++ext[d];
            }
        }
        const Box rect(c0, c0 + ext - IntVect(1));
        for (Long s = 0; s < rect.num_pts(); ++s) used[chunk_space.index(rect.at_offset(s))] = 1;
        for (const Box& piece : chop(refine(chunk_box(c0, ext), r), IntVect(cfg_.max_grid_size))) fine.push_back(piece);
    }
    return BoxArray(std::move(fine));
}

// ---------------------------------------------------------------------------

namespace {

//! Derived BoxArrays are memoized so that repeated level operations reuse
//! their communication plans.
template <class Key>
BoxArray memo_box_array(const Key& key, const std::function<std::vector<Box>()>& build) {
    static std::mutex m;
    static std::map<Key, BoxArray> cache;
    std::lock_guard lk(m);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, BoxArray(build(), false)).first;
    return it->second;
}

Box clip_nonperiodic(const Box& b, const Geometry& g) {
    IntVect lo = b.lo(), hi = b.hi();
    for (int d = 0; d < SpaceDim; ++d) {
        if (g.is_periodic(d)) continue;
        lo[d] = std::max(lo[d], g.domain().lo(d));
        hi[d] = std::min(hi[d], g.domain().hi(d));
    }
    return Box(lo, hi);
}

std::array<int, 3> ratio3(int r) {
    std::array<int, 3> a{1, 1, 1};
    for (int d = 0; d < SpaceDim; ++d) a[d] = r;
    return a;
}

} // namespace

void average_down(const MultiFab& fine, MultiFab& coarse, int ratio, int scomp, int ncomp) {
    if (ratio < 1) throw AmrError("average_down: ratio must be >= 1");
    fine.check_comps(scomp, ncomp, "average_down fine");
    coarse.check_comps(scomp, ncomp, "average_down coarse");
    for (const Box& b : fine.box_array().boxes())
        if (refine(coarsen(b, ratio), ratio) != b)
            throw AmrError("average_down: fine box " + b.str() + " is not a multiple of ratio " + std::to_string(ratio));
    if (fine.geometry() && coarse.geometry() &&
        fine.geometry()->domain() != refine(coarse.geometry()->domain(), ratio))
        throw AmrError("average_down: ratio does not match the level geometries");

    const BoxArray cba = memo_box_array(std::make_tuple(fine.box_array().id(), ratio), [&] {
        return fine.box_array().coarsen(ratio).boxes();
    });
    MultiFab tmp(cba, fine.distribution_map(), ncomp, 0, std::nullopt, fine.comm());
    auto t = tmp.arrays();
    auto f = fine.const_arrays();
    const auto rr = ratio3(ratio);
    const Real inv = Real(1) / Real(rr[0] * rr[1] * rr[2]);
    parallel_for(fine.backend(), tmp, [=](int li, int i, int j, int k) {
        for (int n = 0; n < ncomp; ++n) {
            Real s = 0;
            for (int kk = 0; kk < rr[2]; ++kk)
                for (int jj = 0; jj < rr[1]; ++jj)
                    for (int ii = 0; ii < rr[0]; ++ii)
                        s += f[li](i * rr[0] + ii, j * rr[1] + jj, k * rr[2] + kk, scomp + n);
            t[li](i, j, k, n) = s * inv;
        }
    });
    parallel_copy(coarse, tmp, 0, scomp, ncomp);
}

void interp_from_coarse(MultiFab& fine, const MultiFab& coarse, const Geometry& cgeom, int ratio, InterpScheme scheme,
                        const IntVect& fill_ngrow, bool ghosts_only, int scomp, int ncomp) {
    if (ratio < 1) throw AmrError("interp: ratio must be >= 1");
    fine.check_comps(scomp, ncomp, "interp fine");
    coarse.check_comps(scomp, ncomp, "interp coarse");
    if (!fill_ngrow.all_le(fine.ngrow())) throw AmrError("interp: fill width exceeds the fine MultiFab's ghost width");
    const Geometry fgeom = cgeom.refine(ratio);
    const bool linear = scheme == InterpScheme::Linear;
    const auto& fba = fine.box_array();

    std::vector<Box> regions;
    for (const Box& b : fba.boxes()) regions.push_back(clip_nonperiodic(grow(b, fill_ngrow), fgeom));
    std::array<int, SpaceDim> width{}, periodic{};
    for (int d = 0; d < SpaceDim; ++d) {
        width[d] = fill_ngrow[d];
        periodic[d] = int(cgeom.is_periodic(d));
    }
    const BoxArray cba = memo_box_array(
        std::make_tuple(fba.id(), ratio, int(linear), width, periodic, cgeom.domain().str()),
        [&] {
            std::vector<Box> out;
            for (const Box& r : regions) out.push_back(clip_nonperiodic(grow(coarsen(r, ratio), linear ? 1 : 0), cgeom));
            return out;
        });

    // Every coarse cell the stencil reads must come from coarse valid data.
    const auto shifts = periodic_shifts(cgeom);
    for (std::size_t b = 0; b < cba.size(); ++b) {
        if (fine.distribution_map()[b] != fine.comm().rank()) continue;
        const Box& need = cba[b];
        Long covered = 0;
        for (const IntVect& s : shifts) {
            const Box piece = intersect(shift(need, s), cgeom.domain());
            if (!piece.ok()) continue;
            if (!coarse.box_array().covers(piece))
                throw AmrError("interp: coarse data does not cover " + piece.str() + " needed by fine box " +
                               fba[b].str());
            covered += piece.num_pts();
        }
        if (covered != need.num_pts())
            throw AmrError("interp: fine box " + fba[b].str() + " needs coarse cells outside the domain");
    }

    MultiFab tmp(cba, fine.distribution_map(), ncomp, 0, std::nullopt, fine.comm());
    parallel_copy(tmp, coarse, scomp, 0, ncomp, IntVect(0), IntVect(0), cgeom);

    std::vector<Box> boxes;
    for (int li = 0; li < fine.local_size(); ++li) boxes.push_back(regions[fine.global_index(li)]);
    std::vector<Box> valid = fine.local_boxes();
    auto fv = fine.arrays();
    auto cv = tmp.const_arrays();
    const auto rr = ratio3(ratio);
    parallel_for(fine.backend(), std::span<const Box>(boxes), [&](int li, int i, int j, int k) {
        const int ijk[3] = {i, j, k};
        if (ghosts_only) {
            bool inside = true;
            for (int d = 0; d < SpaceDim; ++d) inside = inside && ijk[d] >= valid[li].lo(d) && ijk[d] <= valid[li].hi(d);
            if (inside) return;
        }
        const auto& c = cv[li];
        int I[3];
        Real x[3];
        for (int d = 0; d < 3; ++d) {
            I[d] = floor_div(ijk[d], rr[d]);
            x[d] = (Real(ijk[d] - I[d] * rr[d]) + Real(0.5)) / Real(rr[d]) - Real(0.5);
        }
        for (int n = 0; n < ncomp; ++n) {
            const Real c0 = c(I[0], I[1], I[2], n);
            Real v = c0;
            if (linear) {
                for (int d = 0; d < SpaceDim; ++d) {
                    int lo[3] = {I[0], I[1], I[2]}, hi[3] = {I[0], I[1], I[2]};
                    --lo[d];
                    ++hi[d];
                    const bool has_lo = c.contains(lo[0], lo[1], lo[2]);
                    const bool has_hi = c.contains(hi[0], hi[1], hi[2]);
                    Real slope = 0;
                    if (has_lo && has_hi) slope = Real(0.5) * (c(hi[0], hi[1], hi[2], n) - c(lo[0], lo[1], lo[2], n));
                    else if (has_hi) slope = c(hi[0], hi[1], hi[2], n) - c0;
                    else if (has_lo) slope = c0 - c(lo[0], lo[1], lo[2], n);
                    v += slope * x[d];
                }
            }
            fv[li](i, j, k, scomp + n) = v;
        }
    });
}

void fill_patch(MultiFab& fine, const MultiFab& coarse, const Geometry& fine_geom, const Geometry& coarse_geom,
                int ratio, InterpScheme scheme, int scomp, int ncomp) {
    if (fine_geom.domain() != refine(coarse_geom.domain(), ratio))
        throw AmrError("fill_patch: ratio does not match the level geometries");
    interp_from_coarse(fine, coarse, coarse_geom, ratio, scheme, fine.ngrow(), true, scomp, ncomp);
    fill_boundary(fine, fine_geom, scomp, ncomp);
}

} // namespace miniamr
