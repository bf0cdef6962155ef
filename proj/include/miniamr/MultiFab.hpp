#pragma once

#include <optional>
#include <span>
#include <vector>

#include "miniamr/BoxArray.hpp"
#include "miniamr/Comm.hpp"
#include "miniamr/Fab.hpp"
#include "miniamr/Geometry.hpp"
#include "miniamr/ParallelFor.hpp"
#include "miniamr/Reduce.hpp"

namespace miniamr {

//! Distributed collection of Fabs: one per BoxArray entry owned by this
//! rank, each allocated over grow(validbox, ngrow).
class MultiFab {
  public:
    MultiFab() = default;
    MultiFab(const BoxArray& ba, const DistributionMapping& dm, int ncomp, const IntVect& ngrow,
             std::optional<Geometry> geom = std::nullopt, Communicator& comm = Communicator::serial(),
             Arena* arena = The_Arena());
    MultiFab(const BoxArray& ba, const DistributionMapping& dm, int ncomp, int ngrow,
             std::optional<Geometry> geom = std::nullopt, Communicator& comm = Communicator::serial(),
             Arena* arena = The_Arena())
        : MultiFab(ba, dm, ncomp, IntVect(ngrow), std::move(geom), comm, arena) {}

    MultiFab(MultiFab&&) noexcept = default;
    MultiFab& operator=(MultiFab&&) noexcept = default;

    const BoxArray& box_array() const noexcept { return ba_; }
    const DistributionMapping& distribution_map() const noexcept { return dm_; }
    int ncomp() const noexcept { return ncomp_; }
    const IntVect& ngrow() const noexcept { return ngrow_; }
    const std::optional<Geometry>& geometry() const noexcept { return geom_; }
    Communicator& comm() const noexcept { return *comm_; }
    Backend& backend() const noexcept { return comm_->backend(); }
    Arena* arena() const noexcept { return arena_; }

    //! Number of locally owned fabs.
    int local_size() const noexcept { return int(fabs_.size()); }
    int global_index(int li) const { return index_[li]; }
    //! Local index of global box gi, or -1 if owned elsewhere.
    int local_index(int gi) const { return local_of_[gi]; }
    bool is_local(int gi) const { return local_of_[gi] >= 0; }

    Fab& fab(int li) { return fabs_[li]; }
    const Fab& fab(int li) const { return fabs_[li]; }
    const Box& validbox(int li) const { return ba_[index_[li]]; }
    const Box& fabbox(int li) const { return fabs_[li].box(); }

    FabView<Real> array(int li) { return fabs_[li].array(); }
    FabView<const Real> const_array(int li) const { return fabs_[li].const_array(); }
    //! View of global box gi; throws if gi is not owned by this rank.
    FabView<Real> global_array(int gi);
    FabView<const Real> global_const_array(int gi) const;
    std::vector<FabView<Real>> arrays();
    std::vector<FabView<const Real>> const_arrays() const;

    //! Valid boxes of the local fabs, optionally grown.
    std::vector<Box> local_boxes(const IntVect& grow = IntVect(0)) const;

    //! Sets components [scomp, scomp+nc) on valid + min(ng, ngrow) cells in one launch.
    void setval(Real v, int scomp, int nc, const IntVect& ng);
    void setval(Real v) { setval(v, 0, ncomp_, ngrow_); }

    //! Throws unless [scomp, scomp+nc) lies within [0, ncomp).
    void check_comps(int scomp, int nc, const char* where) const;

  private:
    BoxArray ba_;
    DistributionMapping dm_;
    int ncomp_ = 0;
    IntVect ngrow_{};
    std::optional<Geometry> geom_;
    Communicator* comm_ = nullptr;
    Arena* arena_ = nullptr;
    std::vector<Fab> fabs_;
    std::vector<int> index_;
    std::vector<int> local_of_;
};

//! Fused launch over the valid cells of every local fab: f(li, i, j, k).
template <class F>
void parallel_for(Backend& be, const MultiFab& mf, F&& f) {
    const auto boxes = mf.local_boxes();
    parallel_for(be, std::span<const Box>(boxes), std::forward<F>(f));
}

//! Fused launch over valid + ng cells of every local fab.
template <class F>
void parallel_for(Backend& be, const MultiFab& mf, const IntVect& ng, F&& f) {
    const auto boxes = mf.local_boxes(ng);
    parallel_for(be, std::span<const Box>(boxes), std::forward<F>(f));
}

//! Single-launch mixed reduction over the valid cells of every local fab.
template <class... Ops, class F>
auto parallel_reduce(Backend& be, TypeList<Ops...> ops, const MultiFab& mf, F&& f) {
    const auto boxes = mf.local_boxes();
    return parallel_reduce(be, ops, std::span<const Box>(boxes), std::forward<F>(f));
}

//! Splits bx into tiles of at most tile_size cells per axis (remainder last).
std::vector<Box> tile_box(const Box& bx, const IntVect& tile_size);

IntVect default_tile_size();
void set_default_tile_size(const IntVect& ts);

struct TileItem {
    int local_index;
    int global_index;
    Box tilebox;
};

//! Tiles of every local fab, in local-fab then Fortran tile order.
std::vector<TileItem> mfiter_tiles(const MultiFab& mf, const IntVect& tile_size, bool include_ghost = false);

//! Iterator over local fabs, optionally subdivided into tiles.
class MFIter {
  public:
    explicit MFIter(const MultiFab& mf, bool tiling = false, bool include_ghost = false);
    MFIter(const MultiFab& mf, const IntVect& tile_size, bool include_ghost = false);

    bool isValid() const noexcept { return pos_ < items_.size(); }
    MFIter& operator++() noexcept {
        ++pos_;
        return *this;
    }

    const Box& tilebox() const { return items_[pos_].tilebox; }
    const Box& validbox() const { return mf_->validbox(items_[pos_].local_index); }
    const Box& fabbox() const { return mf_->fabbox(items_[pos_].local_index); }
    int index() const { return items_[pos_].global_index; }
    int local_index() const { return items_[pos_].local_index; }
    std::size_t length() const noexcept { return items_.size(); }

  private:
    const MultiFab* mf_;
    std::vector<TileItem> items_;
    std::size_t pos_ = 0;
};

} // namespace miniamr
