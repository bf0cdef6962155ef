#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "miniamr/Exchange.hpp"
#include "miniamr/MultiFab.hpp"
#include "miniamr/Particles.hpp"

namespace miniamr {

class AmrError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct AmrConfig {
    int max_level = 1;
    int ref_ratio = 2;
    //! Fine-level boxes are multiples of this many cells per axis.
    int blocking_factor = 8;
    int max_grid_size = 32;
};

//! One byte per valid cell of a level: 1 = tagged.
class TagField {
  public:
    TagField(const BoxArray& ba, const DistributionMapping& dm, Communicator& comm = Communicator::serial());

    const BoxArray& box_array() const noexcept { return ba_; }
    const DistributionMapping& distribution_map() const noexcept { return dm_; }
    Communicator& comm() const noexcept { return *comm_; }
    int local_size() const noexcept { return int(index_.size()); }
    int global_index(int li) const { return index_[li]; }

    std::uint8_t* data(int li) noexcept { return tags_[li].data(); }
    const std::uint8_t* data(int li) const noexcept { return tags_[li].data(); }

    //! Tags cell iv of local fab li.
    void set(int li, const IntVect& iv, bool on = true);
    bool get(int li, const IntVect& iv) const;
    void clear();

    //! Tags every valid cell where pred(view, i, j, k) holds, in one launch.
    template <class Pred>
    void tag_where(const MultiFab& mf, Pred&& pred);

  private:
    BoxArray ba_;
    DistributionMapping dm_;
    Communicator* comm_;
    std::vector<int> index_;
    std::vector<std::vector<std::uint8_t>> tags_;
};

//! Mesh hierarchy: geometry, grids and distribution per level.
class AmrMesh {
  public:
    AmrMesh(const Geometry& level0, const AmrConfig& cfg, int nranks = 1);

    const AmrConfig& config() const noexcept { return cfg_; }
    int max_level() const noexcept { return cfg_.max_level; }
    int finest_level() const noexcept { return finest_; }
    int ref_ratio() const noexcept { return cfg_.ref_ratio; }
    int nranks() const noexcept { return nranks_; }
    const Geometry& geom(int lev) const { return geom_.at(lev); }
    const BoxArray& box_array(int lev) const { return ba_.at(lev); }
    const DistributionMapping& distribution_map(int lev) const { return dm_.at(lev); }

    //! Level 0 covers the domain, chopped to max_grid_size, distributed round robin.
    void make_base_level();

    //! Installs grids for level lev (a level above finest must be lev == finest+1).
    //! An empty BoxArray removes lev and every finer level.
    void set_level(int lev, const BoxArray& ba, const DistributionMapping& dm);
    void set_level(int lev, const BoxArray& ba) {
        set_level(lev, ba, DistributionMapping::round_robin(ba.size(), nranks_));
    }

    //! Grids for level lev+1 covering every tagged cell of level lev, built
    //! from blocking-factor chunks: tagged chunks are merged greedily into
    //! rectangles, refined and chopped to max_grid_size. Chunks that would
    //! violate proper nesting are dropped. Collective over the tag field's
    //! communicator.
    BoxArray regrid(int lev, const TagField& tags) const;

    //! True if every box of lev, coarsened and grown by one cell (clipped to
    //! the domain), lies in the grids of lev-1.
    bool properly_nested(int lev) const;

    std::vector<ParticleLevel> particle_layout() const;

  private:
    AmrConfig cfg_;
    int nranks_;
    int finest_ = -1;
    std::vector<Geometry> geom_;
    std::vector<BoxArray> ba_;
    std::vector<DistributionMapping> dm_;
};

enum class InterpScheme { PiecewiseConstant, Linear };

//! Covered coarse cells become the mean of their ratio^SpaceDim children;
//! uncovered coarse cells are unchanged.
void average_down(const MultiFab& fine, MultiFab& coarse, int ratio, int scomp, int ncomp);
inline void average_down(const MultiFab& fine, MultiFab& coarse, int ratio) {
    average_down(fine, coarse, ratio, 0, fine.ncomp());
}

//! Fills cells of grow(valid, fill_ngrow) of every fine fab (clipped to the
//! domain along non-periodic axes) from coarse data. ghosts_only leaves valid
//! cells alone. LINEAR uses unlimited centered slopes, one-sided at
//! non-periodic domain edges. Throws when coarse valid data (through periodic
//! images) does not cover the cells the stencil needs.
void interp_from_coarse(MultiFab& fine, const MultiFab& coarse, const Geometry& coarse_geom, int ratio,
                        InterpScheme scheme, const IntVect& fill_ngrow, bool ghosts_only, int scomp, int ncomp);

//! Ghost cells of fine: interpolated from coarse, then overwritten by
//! same-level valid data (including periodic images). Valid cells untouched.
void fill_patch(MultiFab& fine, const MultiFab& coarse, const Geometry& fine_geom, const Geometry& coarse_geom,
                int ratio, InterpScheme scheme, int scomp, int ncomp);
inline void fill_patch(MultiFab& fine, const MultiFab& coarse, const Geometry& fine_geom, const Geometry& coarse_geom,
                       int ratio, InterpScheme scheme) {
    fill_patch(fine, coarse, fine_geom, coarse_geom, ratio, scheme, 0, fine.ncomp());
}

// ---------------------------------------------------------------------------

template <class Pred>
void TagField::tag_where(const MultiFab& mf, Pred&& pred) {
    if (mf.box_array().id() != ba_.id() || mf.distribution_map().id() != dm_.id())
        throw AmrError("TagField::tag_where: MultiFab layout differs from the tag field's");
    auto views = mf.const_arrays();
    std::vector<std::uint8_t*> out;
    std::vector<Box> boxes;
    for (int li = 0; li < local_size(); ++li) {
        out.push_back(tags_[li].data());
        boxes.push_back(ba_[index_[li]]);
    }
    parallel_for(mf.backend(), std::span<const Box>(boxes), [&](int li, int i, int j, int k) {
        IntVect iv;
        const int ijk[3] = {i, j, k};
        for (int d = 0; d < SpaceDim; ++d) iv[d] = ijk[d];
        if (pred(views[li], i, j, k)) out[li][boxes[li].index(iv)] = 1;
    });
}

} // namespace miniamr
