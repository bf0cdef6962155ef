#include "miniamr/MultiFab.hpp"

#include <mutex>
#include <string>

namespace miniamr {

MultiFab::MultiFab(const BoxArray& ba, const DistributionMapping& dm, int ncomp, const IntVect& ngrow,
                   std::optional<Geometry> geom, Communicator& comm, Arena* arena)
    : ba_(ba), dm_(dm), ncomp_(ncomp), ngrow_(ngrow), geom_(std::move(geom)), comm_(&comm), arena_(arena) {
    if (ba.empty()) throw std::invalid_argument("MultiFab: empty BoxArray");
    if (ba.size() != dm.size())
        throw std::invalid_argument("MultiFab: BoxArray has " + std::to_string(ba.size()) +
                                    " boxes but DistributionMapping has " + std::to_string(dm.size()));
    if (dm.nranks() != comm.nranks()) throw std::invalid_argument("MultiFab: DistributionMapping rank count mismatch");
    if (ncomp < 1) throw std::invalid_argument("MultiFab: ncomp must be >= 1");
    for (int d = 0; d < SpaceDim; ++d)
        if (ngrow[d] < 0) throw std::invalid_argument("MultiFab: negative ngrow");
    local_of_.assign(ba.size(), -1);
    for (std::size_t i = 0; i < ba.size(); ++i) {
        if (dm[i] != comm.rank()) continue;
        local_of_[i] = int(fabs_.size());
        index_.push_back(int(i));
        fabs_.emplace_back(grow(ba[i], ngrow), ncomp, arena);
    }
}

FabView<Real> MultiFab::global_array(int gi) {
    if (gi < 0 || gi >= int(ba_.size()) || local_of_[gi] < 0)
        throw std::out_of_range("MultiFab: fab " + std::to_string(gi) + " is not owned by rank " +
                                std::to_string(comm_->rank()));
    return fabs_[local_of_[gi]].array();
}

FabView<const Real> MultiFab::global_const_array(int gi) const {
    return const_cast<MultiFab*>(this)->global_array(gi);
}

std::vector<FabView<Real>> MultiFab::arrays() {
    std::vector<FabView<Real>> v;
    v.reserve(fabs_.size());
    for (auto& f : fabs_) v.push_back(f.array());
    return v;
}

std::vector<FabView<const Real>> MultiFab::const_arrays() const {
    std::vector<FabView<const Real>> v;
    v.reserve(fabs_.size());
    for (const auto& f : fabs_) v.push_back(f.const_array());
    return v;
}

std::vector<Box> MultiFab::local_boxes(const IntVect& g) const {
    std::vector<Box> out;
    out.reserve(index_.size());
    for (int gi : index_) out.push_back(grow(ba_[gi], g));
    return out;
}

void MultiFab::check_comps(int scomp, int nc, const char* where) const {
    if (scomp < 0 || nc < 0 || scomp + nc > ncomp_)
        throw std::out_of_range(std::string(where) + ": component range [" + std::to_string(scomp) + ", " +
                                std::to_string(scomp + nc) + ") out of [0, " + std::to_string(ncomp_) + ")");
}

void MultiFab::setval(Real v, int scomp, int nc, const IntVect& ng) {
    check_comps(scomp, nc, "MultiFab::setval");
    auto a = arrays();
    parallel_for(backend(), *this, min(ng, ngrow_), [&](int b, int i, int j, int k) {
        for (int n = scomp; n < scomp + nc; ++n) a[b](i, j, k, n) = v;
    });
}

// ---------------------------------------------------------------------------

namespace {

IntVect initial_tile_size() {
    IntVect t(8);
    t[0] = 1024000;
    return t;
}

std::mutex g_tile_mutex;
IntVect g_tile_size = initial_tile_size();

} // namespace

IntVect default_tile_size() {
    std::lock_guard lk(g_tile_mutex);
    return g_tile_size;
}

void set_default_tile_size(const IntVect& ts) {
    if (!ts.all_gt(0)) throw std::invalid_argument("tile size components must be >= 1");
    std::lock_guard lk(g_tile_mutex);
    g_tile_size = ts;
}

std::vector<Box> tile_box(const Box& bx, const IntVect& tile_size) {
    if (!tile_size.all_gt(0)) throw std::invalid_argument("tile size components must be >= 1");
    return chop(bx, tile_size);
}

std::vector<TileItem> mfiter_tiles(const MultiFab& mf, const IntVect& tile_size, bool include_ghost) {
    std::vector<TileItem> out;
    for (int li = 0; li < mf.local_size(); ++li) {
        const Box bx = include_ghost ? mf.fabbox(li) : mf.validbox(li);
        for (const Box& t : tile_box(bx, tile_size)) out.push_back({li, mf.global_index(li), t});
    }
    return out;
}

MFIter::MFIter(const MultiFab& mf, bool tiling, bool include_ghost) : mf_(&mf) {
    if (tiling) {
        items_ = mfiter_tiles(mf, default_tile_size(), include_ghost);
    } else {
        for (int li = 0; li < mf.local_size(); ++li)
            items_.push_back({li, mf.global_index(li), include_ghost ? mf.fabbox(li) : mf.validbox(li)});
    }
}

MFIter::MFIter(const MultiFab& mf, const IntVect& tile_size, bool include_ghost)
    : mf_(&mf), items_(mfiter_tiles(mf, tile_size, include_ghost)) {}

} // namespace miniamr
