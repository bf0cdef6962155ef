#include "miniamr/CommPlan.hpp"

#include <algorithm>
#include <atomic>
#include <tuple>

#include "miniamr/Comm.hpp"

namespace miniamr {

namespace {

std::uint64_t next_plan_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

bool segment_less(const CopySegment& a, const CopySegment& b) {
    if (a.dst != b.dst) return a.dst < b.dst;
    if (a.dst_region.lo() != b.dst_region.lo()) return a.dst_region.lo() < b.dst_region.lo();
    if (a.src != b.src) return a.src < b.src;
    return a.shift < b.shift;
}

void classify(CommPlan& plan, CopySegment seg, int src_owner, int dst_owner, int me) {
    if (src_owner == me && dst_owner == me) plan.local.push_back(seg);
    else if (src_owner == me) plan.sends[dst_owner].push_back(seg);
    else if (dst_owner == me) plan.recvs[src_owner].push_back(seg);
}

void finalize(CommPlan& plan) {
    std::sort(plan.local.begin(), plan.local.end(), segment_less);
    auto layout = [](std::map<int, std::vector<CopySegment>>& lists, std::map<int, Long>& cells) {
        for (auto& [peer, segs] : lists) {
            std::sort(segs.begin(), segs.end(), segment_less);
            Long off = 0;
            for (auto& s : segs) {
                s.offset = off;
                off += s.dst_region.num_pts();
            }
            cells[peer] = off;
        }
    };
    layout(plan.sends, plan.send_cells);
    layout(plan.recvs, plan.recv_cells);
    plan.id = next_plan_id();
}

void check_supported(IndexType t) {
    if (t.mixed()) throw CommError("communication of face/edge-centered data is not supported");
}

std::vector<IntVect> shifts_for(const std::optional<Geometry>& geom) {
    if (!geom) return {IntVect(0)};
    return periodic_shifts(*geom);
}

} // namespace

std::size_t CommPlan::num_segments() const {
    std::size_t n = local.size();
    for (const auto& [p, s] : sends) n += s.size();
    for (const auto& [p, s] : recvs) n += s.size();
    return n;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const CommPlan> PlanCache::get_or_build(const PlanKey& key, const std::function<CommPlan()>& build) {
    {
        std::lock_guard lk(m_);
        if (auto it = plans_.find(key); it != plans_.end()) {
            ++hits_;
            return it->second;
        }
    }
    auto plan = std::make_shared<const CommPlan>(build());
    std::lock_guard lk(m_);
    auto [it, inserted] = plans_.emplace(key, plan);
    if (inserted) ++builds_;
    else ++hits_;
    return it->second;
}

std::uint64_t PlanCache::builds() const {
    std::lock_guard lk(m_);
    return builds_;
}
std::uint64_t PlanCache::hits() const {
    std::lock_guard lk(m_);
    return hits_;
}
std::size_t PlanCache::size() const {
    std::lock_guard lk(m_);
    return plans_.size();
}
void PlanCache::clear() {
    std::lock_guard lk(m_);
    plans_.clear();
}

// ---------------------------------------------------------------------------

std::vector<Box> box_diff(const Box& a, const Box& b) {
    std::vector<Box> out;
    if (a.empty()) return out;
    Box isect = intersect(a, b);
    if (isect.empty()) {
        out.push_back(a);
        return out;
    }
    Box rest = a;
    for (int d = 0; d < SpaceDim; ++d) {
        if (rest.lo(d) < isect.lo(d)) {
            IntVect hi = rest.hi();
            hi[d] = isect.lo(d) - 1;
            out.emplace_back(rest.lo(), hi, a.ixtype());
            IntVect lo = rest.lo();
            lo[d] = isect.lo(d);
            rest = Box(lo, rest.hi(), a.ixtype());
        }
        if (rest.hi(d) > isect.hi(d)) {
            IntVect lo = rest.lo();
            lo[d] = isect.hi(d) + 1;
            out.emplace_back(lo, rest.hi(), a.ixtype());
            IntVect hi = rest.hi();
            hi[d] = isect.hi(d);
            rest = Box(rest.lo(), hi, a.ixtype());
        }
    }
    return out;
}

CommPlan build_fill_boundary_plan(const BoxArray& ba, const DistributionMapping& dm, const IntVect& ngrow,
                                  const std::optional<Geometry>& geom, int my_rank) {
    check_supported(ba.ixtype());
    CommPlan plan;
    if (ngrow == IntVect(0)) {
        finalize(plan);
        return plan;
    }
    for (std::size_t i = 0; i < ba.size(); ++i)
        for (int d = 0; d < SpaceDim; ++d) {
            const int extent = ba.ixtype().node_centered(d) ? ba[i].length(d) - 1 : ba[i].length(d);
            if (ngrow[d] > extent)
                throw CommError("fill_boundary: ngrow " + std::to_string(ngrow[d]) + " exceeds the extent of box " +
                                ba[i].str());
        }
    const auto shifts = shifts_for(geom);
    const bool nodal = ba.ixtype().all_node() && !ba.ixtype().all_cell();
    for (std::size_t j = 0; j < ba.size(); ++j) {
        const Box grown = grow(ba[j], ngrow);
        for (std::size_t i = 0; i < ba.size(); ++i) {
            if (dm[i] != my_rank && dm[j] != my_rank) continue;
            for (const auto& s : shifts) {
                if (i == j && s == IntVect(0)) continue;
                const Box img = shift(ba[i], s);
                if (!img.intersects(grown)) continue;
                for (const Box& piece : box_diff(intersect(grown, img), ba[j]))
                    classify(plan, {int(i), int(j), piece, s}, dm[i], dm[j], my_rank);
            }
        }
    }
    plan.overlapping = nodal;
    finalize(plan);
    return plan;
}

CommPlan build_copy_plan(const CopyLayout& L, const std::optional<Geometry>& geom, int my_rank) {
    check_supported(L.src_ba->ixtype());
    if (L.src_ba->ixtype() != L.dst_ba->ixtype()) throw CommError("parallel_copy: mismatched index types");
    CommPlan plan;
    const auto shifts = shifts_for(geom);
    const auto& sba = *L.src_ba;
    const auto& dba = *L.dst_ba;
    for (std::size_t j = 0; j < dba.size(); ++j) {
        const Box target = grow(dba[j], L.dst_ngrow);
        for (std::size_t i = 0; i < sba.size(); ++i) {
            const int so = (*L.src_dm)[i];
            const int dO = (*L.dst_dm)[j];
            if (so != my_rank && dO != my_rank) continue;
            const Box src = grow(sba[i], L.src_ngrow);
            for (const auto& s : shifts) {
                const Box ov = intersect(target, shift(src, s));
                if (ov.ok()) classify(plan, {int(i), int(j), ov, s}, so, dO, my_rank);
            }
        }
    }
    plan.overlapping = L.src_ngrow != IntVect(0) || !L.src_ba->ixtype().all_cell();
    finalize(plan);
    return plan;
}

// ---------------------------------------------------------------------------

AffineIndexMap::AffineIndexMap() : offset_(0) {
    for (int d = 0; d < SpaceDim; ++d) {
        perm_[d] = d;
        sign_[d] = 1;
    }
}

AffineIndexMap::AffineIndexMap(const std::array<int, SpaceDim>& perm, const std::array<int, SpaceDim>& sign,
                               const IntVect& offset)
    : perm_(perm), sign_(sign), offset_(offset) {
    std::array<bool, SpaceDim> seen{};
    for (int d = 0; d < SpaceDim; ++d) {
        if (perm[d] < 0 || perm[d] >= SpaceDim || seen[perm[d]]) throw CommError("AffineIndexMap: invalid permutation");
        seen[perm[d]] = true;
        if (sign[d] != 1 && sign[d] != -1) throw CommError("AffineIndexMap: signs must be +1 or -1");
    }
}

IntVect AffineIndexMap::operator()(const IntVect& dst) const {
    IntVect s;
    for (int d = 0; d < SpaceDim; ++d) s[d] = sign_[d] * dst[perm_[d]] + offset_[d];
    return s;
}

Box AffineIndexMap::image(const Box& dst) const {
    if (dst.empty()) return Box(IntVect(0), IntVect(-1), dst.ixtype());
    const IntVect a = (*this)(dst.lo());
    const IntVect b = (*this)(dst.hi());
    return Box(min(a, b), max(a, b), dst.ixtype());
}

AffineIndexMap AffineIndexMap::inverse() const {
    // dst[perm[d]] = sign[d] * (src[d] - offset[d])
    std::array<int, SpaceDim> perm{}, sign{};
    IntVect off;
    for (int d = 0; d < SpaceDim; ++d) {
        const int t = perm_[d];
        perm[t] = d;
        sign[t] = sign_[d];
        off[t] = -sign_[d] * offset_[d];
    }
    return AffineIndexMap(perm, sign, off);
}

Box AffineIndexMap::preimage(const Box& src) const { return inverse().image(src); }

CommPlan build_mapped_plan(const CopyLayout& L, const IndexMapping& map, int my_rank) {
    check_supported(L.src_ba->ixtype());
    if (L.src_ba->ixtype() != L.dst_ba->ixtype()) throw CommError("index_mapped_copy: mismatched index types");
    CommPlan plan;
    const auto& sba = *L.src_ba;
    const auto& dba = *L.dst_ba;
    for (std::size_t j = 0; j < dba.size(); ++j) {
        const Box target = grow(dba[j], L.dst_ngrow);
        const Box img = map.image(target);
        if (!sba.covers(img))
            throw CommError("index_mapped_copy: image " + img.str() + " of " + target.str() +
                            " is not covered by the source BoxArray");
        for (std::size_t i = 0; i < sba.size(); ++i) {
            const int so = (*L.src_dm)[i];
            const int dO = (*L.dst_dm)[j];
            if (so != my_rank && dO != my_rank) continue;
            const Box ov = intersect(img, sba[i]);
            if (ov.empty()) continue;
            const Box sub = intersect(map.preimage(ov), target);
            if (sub.ok()) classify(plan, {int(i), int(j), sub, IntVect(0)}, so, dO, my_rank);
        }
    }
    finalize(plan);
    return plan;
}

} // namespace miniamr
