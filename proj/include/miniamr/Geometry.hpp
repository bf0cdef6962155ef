#pragma once

#include <array>
#include <utility>
#include <vector>

#include "miniamr/Box.hpp"

namespace miniamr {

using RealVect = std::array<Real, SpaceDim>;

//! Problem geometry for one level: index domain, physical extent and periodicity.
class Geometry {
  public:
    Geometry() = default;
    Geometry(const Box& domain, const RealVect& prob_lo, const RealVect& prob_hi,
             const std::array<bool, SpaceDim>& periodic);

    const Box& domain() const noexcept { return domain_; }
    const RealVect& prob_lo() const noexcept { return prob_lo_; }
    const RealVect& prob_hi() const noexcept { return prob_hi_; }
    Real prob_lo(int d) const noexcept { return prob_lo_[d]; }
    Real prob_hi(int d) const noexcept { return prob_hi_[d]; }
    const RealVect& cell_size() const noexcept { return dx_; }
    Real cell_size(int d) const noexcept { return dx_[d]; }
    bool is_periodic(int d) const noexcept { return periodic_[d]; }
    bool any_periodic() const noexcept;
    const std::array<bool, SpaceDim>& periodicity() const noexcept { return periodic_; }

    //! Domain extent on periodic axes, zero elsewhere.
    IntVect period() const noexcept;

    //! Physical coordinate of the center of cell iv.
    Real cell_center(int d, int i) const noexcept { return prob_lo_[d] + (Real(i) + Real(0.5)) * dx_[d]; }

    //! Cell containing physical coordinate x along d (no wrapping, no clamping).
    int cell_index(int d, Real x) const noexcept;

    Geometry refine(int ratio) const;

  private:
    Box domain_;
    RealVect prob_lo_{};
    RealVect prob_hi_{};
    RealVect dx_{};
    std::array<bool, SpaceDim> periodic_{};
};

struct PeriodicImage {
    Box box;
    IntVect shift;
    friend bool operator==(const PeriodicImage&, const PeriodicImage&) = default;
};

//! Translates of b by multiples of the domain extent along periodic axes
//! (shift factors -1, 0, +1) that intersect the domain. Non-periodic axes
//! contribute only the zero shift.
std::vector<PeriodicImage> periodic_shift_images(const Box& b, const Geometry& g);

//! All shift vectors with factors in {-1,0,1} along periodic axes, zero shift first.
std::vector<IntVect> periodic_shifts(const Geometry& g);

} // namespace miniamr
