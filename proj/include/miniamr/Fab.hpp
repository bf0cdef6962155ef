#pragma once

#include <cassert>
#include <limits>
#include <memory>
#include <stdexcept>

#include "miniamr/Arena.hpp"
#include "miniamr/Box.hpp"

namespace miniamr {

//! Non-owning accessor over Fortran-ordered multi-component storage, indexed
//! with the global (i, j, k) of the owning box. FabView<const Real> is the
//! read-only flavor. Unused axes in lower-dimensional builds take index 0.
template <class T>
struct FabView {
    T* p = nullptr;
    int lo[3] = {0, 0, 0};
    int hi[3] = {-1, -1, -1};
    Long jstride = 0;
    Long kstride = 0;
    Long nstride = 0;
    int ncomp = 0;

    FabView() = default;
    FabView(T* data, const Box& bx, int nc) : p(data), ncomp(nc) {
        const auto l = bx.lo().dim3();
        const auto h = bx.hi().dim3();
        for (int d = 0; d < 3; ++d) {
            lo[d] = l[d];
            hi[d] = h[d];
        }
        jstride = Long(hi[0] - lo[0] + 1);
        kstride = jstride * (hi[1] - lo[1] + 1);
        nstride = kstride * (hi[2] - lo[2] + 1);
    }

    template <class U>
        requires(std::is_same_v<const U, T> && !std::is_same_v<U, T>)
    FabView(const FabView<U>& o) noexcept
        : p(o.p), lo{o.lo[0], o.lo[1], o.lo[2]}, hi{o.hi[0], o.hi[1], o.hi[2]}, jstride(o.jstride),
          kstride(o.kstride), nstride(o.nstride), ncomp(o.ncomp) {}

    bool contains(int i, int j, int k) const noexcept {
        return i >= lo[0] && i <= hi[0] && j >= lo[1] && j <= hi[1] && k >= lo[2] && k <= hi[2];
    }

    Long offset(int i, int j, int k, int n = 0) const noexcept {
        return Long(i - lo[0]) + Long(j - lo[1]) * jstride + Long(k - lo[2]) * kstride + Long(n) * nstride;
    }

    T& operator()(int i, int j, int k, int n = 0) const noexcept {
#ifdef MINIAMR_DEBUG
        assert(contains(i, j, k) && n >= 0 && n < ncomp);
#endif
        return p[offset(i, j, k, n)];
    }

    T* ptr(int i, int j, int k, int n = 0) const noexcept { return p + offset(i, j, k, n); }

    Box box() const {
        IntVect l, h;
        for (int d = 0; d < SpaceDim; ++d) {
            l[d] = lo[d];
            h[d] = hi[d];
        }
        return Box(l, h);
    }
};

template <class T>
using ConstFabView = FabView<const T>;

//! Owned multi-component array over a box. Storage comes from an arena and
//! is returned to it on destruction. Move-only.
class Fab {
  public:
    Fab() = default;
    Fab(const Box& box, int ncomp, Arena* arena = The_Arena());
    ~Fab();
    Fab(Fab&& o) noexcept;
    Fab& operator=(Fab&& o) noexcept;
    Fab(const Fab&) = delete;
    Fab& operator=(const Fab&) = delete;

    const Box& box() const noexcept { return box_; }
    int ncomp() const noexcept { return ncomp_; }
    Long size() const noexcept { return box_.num_pts() * ncomp_; }
    Arena* arena() const noexcept { return arena_; }
    Real* data() noexcept { return data_; }
    const Real* data() const noexcept { return data_; }
    Real* data(int comp) noexcept { return data_ + Long(comp) * box_.num_pts(); }
    const Real* data(int comp) const noexcept { return data_ + Long(comp) * box_.num_pts(); }

    FabView<Real> array() noexcept { return {data_, box_, ncomp_}; }
    FabView<const Real> array() const noexcept { return {data_, box_, ncomp_}; }
    FabView<const Real> const_array() const noexcept { return {data_, box_, ncomp_}; }

    //! Sets components [scomp, scomp+nc) over region; region must lie in box().
    void setval(Real v, const Box& region, int scomp, int nc);
    void setval(Real v) { setval(v, box_, 0, ncomp_); }

    //! Fill new storage with signaling NaNs (defaults to on in MINIAMR_DEBUG builds).
    static void set_debug_fill(bool on) noexcept;
    static bool debug_fill() noexcept;

  private:
    void release() noexcept;

    Box box_;
    int ncomp_ = 0;
    Real* data_ = nullptr;
    Arena* arena_ = nullptr;
};

} // namespace miniamr
