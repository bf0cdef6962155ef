#include "miniamr/Exchange.hpp"

#include <algorithm>

namespace miniamr {

namespace {

struct SegmentRef {
    FabView<const Real> src;
    FabView<Real> dst;
    Real* buf;
    Box region;
    IntVect shift;
    Long npts;
};

template <class F>
void launch_segments(Backend& be, const std::vector<SegmentRef>& segs, bool serial, F&& f) {
    if (segs.empty()) return;
    std::vector<Box> boxes;
    boxes.reserve(segs.size());
    for (const auto& s : segs) boxes.push_back(s.region);
    if (!serial) {
        parallel_for(be, std::span<const Box>(boxes), f);
        return;
    }
    // Overlapping destinations: keep a deterministic last-writer order.
    detail::BoxIndexer ix{std::span<const Box>(boxes)};
    be.launch(1, [&](int) { ix.for_each(0, ix.total(), f); });
}

inline Long linear(const Box& region, int i, int j, int k) {
    const auto lo = region.lo().dim3();
    const auto len = region.length().dim3(1);
    return Long(i - lo[0]) + Long(len[0]) * (Long(j - lo[1]) + Long(len[1]) * (k - lo[2]));
}

inline std::array<int, 3> source_cell(const IndexMapping* map, const IntVect& shift, int i, int j, int k) {
    if (map) {
        IntVect d;
        const int ijk[3] = {i, j, k};
        for (int a = 0; a < SpaceDim; ++a) d[a] = ijk[a];
        return (*map)(d).dim3();
    }
    const auto s = shift.dim3();
    return {i - s[0], j - s[1], k - s[2]};
}

} // namespace

void execute_plan(const CommPlan& plan, MultiFab& dst, const MultiFab& src, int scomp, int dcomp, int ncomp,
                  CopyOp op, const IndexMapping* map) {
    src.check_comps(scomp, ncomp, "copy source");
    dst.check_comps(dcomp, ncomp, "copy destination");
    Communicator& comm = dst.comm();
    Backend& be = comm.backend();
    const bool serial = plan.overlapping || op == CopyOp::Add;

    // Pack every outgoing segment in one launch.
    std::map<int, ArenaBuffer> out;
    std::vector<SegmentRef> pack;
    for (const auto& [peer, segs] : plan.sends) {
        auto& buf = out.emplace(peer, ArenaBuffer(std::size_t(plan.send_cells.at(peer) * ncomp) * sizeof(Real),
                                                  The_Comm_Arena()))
                        .first->second;
        Real* base = reinterpret_cast<Real*>(buf.data());
        for (const auto& s : segs)
            pack.push_back({src.global_const_array(s.src), {}, base + s.offset * ncomp, s.dst_region, s.shift,
                            s.dst_region.num_pts()});
    }
    if (!pack.empty()) {
        launch_segments(be, pack, false, [&](int b, int i, int j, int k) {
            const auto& s = pack[b];
            const auto c = source_cell(map, s.shift, i, j, k);
            const Long l = linear(s.region, i, j, k);
            for (int n = 0; n < ncomp; ++n) s.buf[l + n * s.npts] = s.src(c[0], c[1], c[2], scomp + n);
        });
    }
    for (auto& [peer, buf] : out) comm.send(peer, std::move(buf));

    // Local copies.
    if (!plan.local.empty()) {
        std::vector<SegmentRef> local;
        local.reserve(plan.local.size());
        for (const auto& s : plan.local)
            local.push_back({src.global_const_array(s.src), dst.global_array(s.dst), nullptr, s.dst_region, s.shift,
                             s.dst_region.num_pts()});
        launch_segments(be, local, serial, [&](int b, int i, int j, int k) {
            const auto& s = local[b];
            const auto c = source_cell(map, s.shift, i, j, k);
            for (int n = 0; n < ncomp; ++n) {
                const Real v = s.src(c[0], c[1], c[2], scomp + n);
                if (op == CopyOp::Add) s.dst(i, j, k, dcomp + n) += v;
                else s.dst(i, j, k, dcomp + n) = v;
            }
        });
    }

    // Receive one buffer per peer, then unpack everything in one launch.
    std::map<int, ArenaBuffer> in;
    for (const auto& [peer, segs] : plan.recvs) {
        ArenaBuffer buf = comm.recv(peer);
        const std::size_t expect = std::size_t(plan.recv_cells.at(peer) * ncomp) * sizeof(Real);
        if (buf.size() != expect)
            throw CommError("copy: message from rank " + std::to_string(peer) + " has " + std::to_string(buf.size()) +
                            " bytes, expected " + std::to_string(expect));
        in.emplace(peer, std::move(buf));
    }
    if (!in.empty()) {
        std::vector<SegmentRef> unpack;
        for (const auto& [peer, segs] : plan.recvs) {
            Real* base = reinterpret_cast<Real*>(in.at(peer).data());
            for (const auto& s : segs)
                unpack.push_back({{}, dst.global_array(s.dst), base + s.offset * ncomp, s.dst_region, s.shift,
                                  s.dst_region.num_pts()});
        }
        launch_segments(be, unpack, serial, [&](int b, int i, int j, int k) {
            const auto& s = unpack[b];
            const Long l = linear(s.region, i, j, k);
            for (int n = 0; n < ncomp; ++n) {
                const Real v = s.buf[l + n * s.npts];
                if (op == CopyOp::Add) s.dst(i, j, k, dcomp + n) += v;
                else s.dst(i, j, k, dcomp + n) = v;
            }
        });
    }
}

namespace {

std::array<int, SpaceDim> arr(const IntVect& v) {
    std::array<int, SpaceDim> a{};
    for (int d = 0; d < SpaceDim; ++d) a[d] = v[d];
    return a;
}

std::array<int, SpaceDim> period_of(const std::optional<Geometry>& g) {
    return g ? arr(g->period()) : std::array<int, SpaceDim>{};
}

} // namespace

std::shared_ptr<const CommPlan> fill_boundary_plan(const MultiFab& mf, const std::optional<Geometry>& geom) {
    const auto& ba = mf.box_array();
    const auto& dm = mf.distribution_map();
    PlanKey key{PlanKind::FillBoundary, ba.id(), dm.id(), ba.id(), dm.id(), arr(mf.ngrow()), arr(mf.ngrow()),
                arr(ba.ixtype().flags()), period_of(geom)};
    const int me = mf.comm().rank();
    return mf.comm().plans().get_or_build(key, [&] { return build_fill_boundary_plan(ba, dm, mf.ngrow(), geom, me); });
}

void fill_boundary(MultiFab& mf, const std::optional<Geometry>& geom, int scomp, int ncomp) {
    auto plan = fill_boundary_plan(mf, geom);
    execute_plan(*plan, mf, mf, scomp, scomp, ncomp);
}

std::shared_ptr<const CommPlan> parallel_copy_plan(const MultiFab& dst, const MultiFab& src, const IntVect& src_ngrow,
                                                   const IntVect& dst_ngrow, const std::optional<Geometry>& geom) {
    if (&dst.comm() != &src.comm()) throw CommError("parallel_copy: MultiFabs live on different communicators");
    if (!src_ngrow.all_le(src.ngrow()) || !dst_ngrow.all_le(dst.ngrow()))
        throw CommError("parallel_copy: requested ghost width exceeds the MultiFab's ngrow");
    const auto& sba = src.box_array();
    const auto& dba = dst.box_array();
    if (sba.ixtype() != dba.ixtype()) throw CommError("parallel_copy: mismatched index types");
    PlanKey key{PlanKind::ParallelCopy,     sba.id(),           src.distribution_map().id(), dba.id(),
                dst.distribution_map().id(), arr(src_ngrow), arr(dst_ngrow),                arr(sba.ixtype().flags()),
                period_of(geom)};
    CopyLayout layout{&sba, &src.distribution_map(), src_ngrow, &dba, &dst.distribution_map(), dst_ngrow};
    const int me = dst.comm().rank();
    return dst.comm().plans().get_or_build(key, [&] { return build_copy_plan(layout, geom, me); });
}

void parallel_copy(MultiFab& dst, const MultiFab& src, int scomp, int dcomp, int ncomp, const IntVect& src_ngrow,
                   const IntVect& dst_ngrow, const std::optional<Geometry>& geom, CopyOp op) {
    src.check_comps(scomp, ncomp, "parallel_copy source");
    dst.check_comps(dcomp, ncomp, "parallel_copy destination");
    auto plan = parallel_copy_plan(dst, src, src_ngrow, dst_ngrow, geom);
    execute_plan(*plan, dst, src, scomp, dcomp, ncomp, op);
}

void index_mapped_copy(MultiFab& dst, const MultiFab& src, int scomp, int dcomp, int ncomp, const IndexMapping& map,
                       const IntVect& dst_ngrow) {
    if (&dst.comm() != &src.comm()) throw CommError("index_mapped_copy: MultiFabs live on different communicators");
    src.check_comps(scomp, ncomp, "index_mapped_copy source");
    dst.check_comps(dcomp, ncomp, "index_mapped_copy destination");
    CopyLayout layout{&src.box_array(), &src.distribution_map(), IntVect(0),
                      &dst.box_array(), &dst.distribution_map(), dst_ngrow};
    const CommPlan plan = build_mapped_plan(layout, map, dst.comm().rank());
    execute_plan(plan, dst, src, scomp, dcomp, ncomp, CopyOp::Copy, &map);
}

std::vector<double> global_reduce(Communicator& comm, const std::vector<ReduceOpKind>& ops,
                                  const std::vector<double>& local) {
    if (ops.size() != local.size()) throw CommError("global_reduce: one value per op required");
    std::vector<std::byte> msg;
    msg.push_back(std::byte(ops.size() & 0xff));
    for (auto op : ops) msg.push_back(std::byte(int(op)));
    const std::size_t header = msg.size();
    const auto* p = reinterpret_cast<const std::byte*>(local.data());
    msg.insert(msg.end(), p, p + local.size() * sizeof(double));
    auto all = comm.allgather(msg);
    for (const auto& m : all)
        if (m.size() != msg.size() || !std::equal(m.begin(), m.begin() + header, msg.begin()))
            throw CommError("global_reduce: reduction op lists differ across ranks");
    std::vector<double> result(ops.size());
    for (std::size_t k = 0; k < ops.size(); ++k) {
        switch (ops[k]) {
        case ReduceOpKind::Sum: result[k] = ReduceOpSum::identity<double>(); break;
        case ReduceOpKind::Min: result[k] = ReduceOpMin::identity<double>(); break;
        case ReduceOpKind::Max: result[k] = ReduceOpMax::identity<double>(); break;
        }
    }
    for (const auto& m : all) {
        for (std::size_t k = 0; k < ops.size(); ++k) {
            double v;
            std::memcpy(&v, m.data() + header + k * sizeof(double), sizeof(double));
            switch (ops[k]) {
            case ReduceOpKind::Sum: result[k] = ReduceOpSum::combine(result[k], v); break;
            case ReduceOpKind::Min: result[k] = ReduceOpMin::combine(result[k], v); break;
            case ReduceOpKind::Max: result[k] = ReduceOpMax::combine(result[k], v); break;
            }
        }
    }
    return result;
}

} // namespace miniamr
