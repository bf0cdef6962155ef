#pragma once

#include <ostream>

#include "miniamr/IntVect.hpp"

namespace miniamr {

//! Per-axis centering: CELL (0) or NODE (1). Face and edge centerings are mixed flags.
class IndexType {
  public:
    enum class Center : int { Cell = 0, Node = 1 };

    constexpr IndexType() noexcept = default;
    constexpr explicit IndexType(const IntVect& flags) noexcept : flags_(flags) {}

    static constexpr IndexType cell() noexcept { return IndexType{}; }
    static constexpr IndexType node() noexcept { return IndexType{IntVect(1)}; }
    static constexpr IndexType face(int dir) noexcept { return IndexType{IntVect::basis(dir)}; }

    constexpr bool node_centered(int d) const noexcept { return flags_[d] != 0; }
    constexpr bool cell_centered(int d) const noexcept { return flags_[d] == 0; }
    constexpr bool all_cell() const noexcept { return flags_ == IntVect(0); }
    constexpr bool all_node() const noexcept { return flags_ == IntVect(1); }
    constexpr bool mixed() const noexcept { return !all_cell() && !all_node(); }
    constexpr const IntVect& flags() const noexcept { return flags_; }

    friend constexpr bool operator==(const IndexType&, const IndexType&) = default;

    friend std::ostream& operator<<(std::ostream& os, const IndexType& t) { return os << t.flags_; }

  private:
    IntVect flags_{};
};

} // namespace miniamr
