#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "miniamr/BoxArray.hpp"
#include "miniamr/Geometry.hpp"

namespace miniamr {

enum class PlanKind : int { FillBoundary = 0, ParallelCopy = 1, IndexMapped = 2 };

//! Identity of a reusable communication pattern.
struct PlanKey {
    PlanKind kind;
    std::uint64_t src_ba;
    std::uint64_t src_dm;
    std::uint64_t dst_ba;
    std::uint64_t dst_dm;
    std::array<int, SpaceDim> src_ngrow;
    std::array<int, SpaceDim> dst_ngrow;
    std::array<int, SpaceDim> ixtype;
    std::array<int, SpaceDim> period;

    friend auto operator<=>(const PlanKey&, const PlanKey&) = default;
};

//! One rectangular piece of a copy. Destination cells are dst_region in the
//! destination index space; the source cell of d is d - shift (or the
//! mapping's image for index-mapped copies). offset is the piece's position,
//! in cells, inside the peer buffer it travels in.
struct CopySegment {
    int src;
    int dst;
    Box dst_region;
    IntVect shift;
    Long offset = 0;
};

//! Aggregated copy schedule for one rank: local copies, and per peer rank
//! one packed buffer of segments sorted by (receiving fab, region lo).
struct CommPlan {
    std::uint64_t id = 0;
    std::vector<CopySegment> local;
    std::map<int, std::vector<CopySegment>> sends;
    std::map<int, std::vector<CopySegment>> recvs;
    std::map<int, Long> send_cells;
    std::map<int, Long> recv_cells;
    //! Destination cells may be written by more than one segment.
    bool overlapping = false;

    std::size_t num_segments() const;
};

//! Rank-local cache of plans keyed by PlanKey.
class PlanCache {
  public:
    std::shared_ptr<const CommPlan> get_or_build(const PlanKey& key, const std::function<CommPlan()>& build);
    std::uint64_t builds() const;
    std::uint64_t hits() const;
    std::size_t size() const;
    void clear();

  private:
    mutable std::mutex m_;
    std::map<PlanKey, std::shared_ptr<const CommPlan>> plans_;
    std::uint64_t builds_ = 0;
    std::uint64_t hits_ = 0;
};

//! Cells of a that are not in b, as at most 2*SpaceDim disjoint boxes.
std::vector<Box> box_diff(const Box& a, const Box& b);

struct CopyLayout {
    const BoxArray* src_ba;
    const DistributionMapping* src_dm;
    IntVect src_ngrow;
    const BoxArray* dst_ba;
    const DistributionMapping* dst_dm;
    IntVect dst_ngrow;
};

//! Ghost-cell plan: every cell of grow(dst_j, ngrow) outside dst_j that some
//! periodic image of a valid box covers.
CommPlan build_fill_boundary_plan(const BoxArray& ba, const DistributionMapping& dm, const IntVect& ngrow,
                                  const std::optional<Geometry>& geom, int my_rank);

//! Distribution-to-distribution plan: cells of grow(dst_j, dst_ngrow) covered
//! by grow(src_i, src_ngrow), optionally through periodic images.
CommPlan build_copy_plan(const CopyLayout& layout, const std::optional<Geometry>& geom, int my_rank);

//! Integer index mapping from destination cells to source cells.
class IndexMapping {
  public:
    virtual ~IndexMapping() = default;
    virtual IntVect operator()(const IntVect& dst) const = 0;
    //! Bounding box of the images of the cells of dst.
    virtual Box image(const Box& dst) const = 0;
    //! Destination cells whose image lies in src.
    virtual Box preimage(const Box& src) const = 0;
};

//! src[d] = sign[d] * dst[perm[d]] + offset[d]: axis permutations,
//! reflections and translations (rotations by multiples of 90 degrees).
class AffineIndexMap final : public IndexMapping {
  public:
    AffineIndexMap();
    AffineIndexMap(const std::array<int, SpaceDim>& perm, const std::array<int, SpaceDim>& sign, const IntVect& offset);

    static AffineIndexMap identity() { return AffineIndexMap(); }

    IntVect operator()(const IntVect& dst) const override;
    Box image(const Box& dst) const override;
    Box preimage(const Box& src) const override;
    AffineIndexMap inverse() const;

  private:
    std::array<int, SpaceDim> perm_;
    std::array<int, SpaceDim> sign_;
    IntVect offset_;
};

CommPlan build_mapped_plan(const CopyLayout& layout, const IndexMapping& map, int my_rank);

} // namespace miniamr
