#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "miniamr/Box.hpp"

namespace miniamr {

//! Immutable, shared list of pairwise-disjoint boxes of one index type.
//! Copies share storage and identity (id()).
class BoxArray {
  public:
    BoxArray();
    explicit BoxArray(std::vector<Box> boxes, bool check_disjoint = true);

    //! domain chopped into pieces of at most max_grid_size cells per axis.
    static BoxArray from_domain(const Box& domain, const IntVect& max_grid_size);

    std::size_t size() const noexcept { return d_->boxes.size(); }
    bool empty() const noexcept { return d_->boxes.empty(); }
    const Box& operator[](std::size_t i) const { return d_->boxes[i]; }
    const std::vector<Box>& boxes() const noexcept { return d_->boxes; }
    std::uint64_t id() const noexcept { return d_->id; }
    IndexType ixtype() const noexcept { return d_->ixtype; }
    Long num_pts() const noexcept;
    Box minimal_box() const;

    //! Indices of boxes intersecting b.
    std::vector<int> intersecting(const Box& b) const;
    //! Index of the box containing p, or -1.
    int find(const IntVect& p) const;
    //! True if every cell of b lies in some box.
    bool covers(const Box& b) const;

    BoxArray coarsen(int ratio) const;
    BoxArray refine(int ratio) const;

  private:
    struct Data {
        std::vector<Box> boxes;
        std::uint64_t id;
        IndexType ixtype;
    };
    std::shared_ptr<const Data> d_;
};

//! Owner rank of every BoxArray entry. Copies share identity.
class DistributionMapping {
  public:
    DistributionMapping();
    DistributionMapping(std::vector<int> ranks, int nranks);

    static DistributionMapping round_robin(std::size_t nboxes, int nranks);
    static DistributionMapping all_on(std::size_t nboxes, int rank, int nranks);

    std::size_t size() const noexcept { return d_->ranks.size(); }
    int operator[](std::size_t i) const { return d_->ranks[i]; }
    const std::vector<int>& ranks() const noexcept { return d_->ranks; }
    int nranks() const noexcept { return d_->nranks; }
    std::uint64_t id() const noexcept { return d_->id; }

  private:
    struct Data {
        std::vector<int> ranks;
        int nranks;
        std::uint64_t id;
    };
    std::shared_ptr<const Data> d_;
};

} // namespace miniamr
