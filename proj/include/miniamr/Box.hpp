#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "miniamr/IndexType.hpp"

namespace miniamr {

//! Rectangular region of an integer index space with per-axis centering.
//! Bounds are inclusive and may be negative. The default box is the
//! canonical empty box lo = (0...), hi = (-1...).
class Box {
  public:
    constexpr Box() noexcept : lo_(0), hi_(-1) {}
    constexpr Box(const IntVect& lo, const IntVect& hi, IndexType t = IndexType::cell()) noexcept
        : lo_(lo), hi_(hi), type_(t) {}

    constexpr const IntVect& lo() const noexcept { return lo_; }
    constexpr const IntVect& hi() const noexcept { return hi_; }
    constexpr int lo(int d) const noexcept { return lo_[d]; }
    constexpr int hi(int d) const noexcept { return hi_[d]; }
    constexpr IndexType ixtype() const noexcept { return type_; }

    constexpr bool empty() const noexcept {
        for (int d = 0; d < SpaceDim; ++d)
            if (hi_[d] < lo_[d]) return true;
        return false;
    }
    constexpr bool ok() const noexcept { return !empty(); }

    constexpr IntVect length() const noexcept {
        IntVect r;
        for (int d = 0; d < SpaceDim; ++d) r[d] = empty() ? 0 : hi_[d] - lo_[d] + 1;
        return r;
    }
    constexpr int length(int d) const noexcept { return empty() ? 0 : hi_[d] - lo_[d] + 1; }

    constexpr Long num_pts() const noexcept {
        if (empty()) return 0;
        Long n = 1;
        for (int d = 0; d < SpaceDim; ++d) n *= Long(hi_[d] - lo_[d] + 1);
        return n;
    }

    constexpr bool contains(const IntVect& p) const noexcept { return lo_.all_le(p) && p.all_le(hi_); }
    constexpr bool contains(const Box& b) const noexcept {
        return b.empty() || (!empty() && lo_.all_le(b.lo_) && b.hi_.all_le(hi_));
    }
    constexpr bool intersects(const Box& b) const noexcept {
        if (empty() || b.empty()) return false;
        for (int d = 0; d < SpaceDim; ++d)
            if (b.hi_[d] < lo_[d] || hi_[d] < b.lo_[d]) return false;
        return true;
    }

    //! Fortran-order offset of p relative to lo (x fastest).
    constexpr Long index(const IntVect& p) const noexcept {
        Long off = 0;
        Long stride = 1;
        for (int d = 0; d < SpaceDim; ++d) {
            off += Long(p[d] - lo_[d]) * stride;
            stride *= Long(hi_[d] - lo_[d] + 1);
        }
        return off;
    }
    //! Inverse of index().
    constexpr IntVect at_offset(Long off) const noexcept {
        IntVect p;
        for (int d = 0; d < SpaceDim; ++d) {
            Long len = hi_[d] - lo_[d] + 1;
            p[d] = lo_[d] + int(off % len);
            off /= len;
        }
        return p;
    }

    constexpr Box& grow(int n) noexcept { return grow(IntVect(n)); }
    constexpr Box& grow(const IntVect& n) noexcept {
        lo_ -= n;
        hi_ += n;
        return *this;
    }
    constexpr Box& grow(int dir, int n) noexcept {
        lo_[dir] -= n;
        hi_[dir] += n;
        return *this;
    }
    constexpr Box& shift(const IntVect& s) noexcept {
        lo_ += s;
        hi_ += s;
        return *this;
    }
    constexpr Box& shift(int dir, int s) noexcept {
        lo_[dir] += s;
        hi_[dir] += s;
        return *this;
    }

    //! All empty boxes of one index type compare equal.
    friend constexpr bool operator==(const Box& a, const Box& b) noexcept {
        if (a.type_ != b.type_) return false;
        if (a.empty() || b.empty()) return a.empty() && b.empty();
        return a.lo_ == b.lo_ && a.hi_ == b.hi_;
    }

    //! Renders as "(lo)(hi)(ixtype)".
    std::string str() const;
    friend std::ostream& operator<<(std::ostream& os, const Box& b);

  private:
    IntVect lo_;
    IntVect hi_;
    IndexType type_{};
};

class BoxError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Componentwise [max(lo), min(hi)]; canonical empty box when disjoint.
Box intersect(const Box& a, const Box& b);
inline Box operator&(const Box& a, const Box& b) { return intersect(a, b); }

inline Box grow(Box b, int n) { return b.grow(n); }
inline Box grow(Box b, const IntVect& n) { return b.grow(n); }
inline Box shift(Box b, const IntVect& s) { return b.shift(s); }
inline Long num_pts(const Box& b) { return b.num_pts(); }

Box refine(const Box& b, int ratio);
Box coarsen(const Box& b, int ratio);
Box convert(const Box& b, IndexType t);

//! Chops b into pieces of extent max_size along each axis, starting at lo;
//! the last piece per axis holds the remainder. Returned in Fortran order.
std::vector<Box> chop(const Box& b, const IntVect& max_size);

} // namespace miniamr
