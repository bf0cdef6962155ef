#pragma once

#include <algorithm>
#include <array>
#include <ostream>

#include "miniamr/Config.hpp"

namespace miniamr {

//! Integer vector in SpaceDim dimensions.
class IntVect {
  public:
    constexpr IntVect() noexcept : v_{} {}
    constexpr explicit IntVect(int s) noexcept { v_.fill(s); }

    template <class... Ts>
        requires(sizeof...(Ts) == SpaceDim && SpaceDim > 1)
    constexpr IntVect(Ts... vs) noexcept : v_{static_cast<int>(vs)...} {}

    static constexpr IntVect zero() noexcept { return IntVect(0); }
    static constexpr IntVect unit() noexcept { return IntVect(1); }
    static constexpr IntVect basis(int dir) noexcept {
        IntVect r;
        r.v_[dir] = 1;
        return r;
    }

    constexpr int& operator[](int d) noexcept { return v_[d]; }
    constexpr int operator[](int d) const noexcept { return v_[d]; }

    //! Components padded to three with zeros, for (i,j,k) style loops.
    constexpr std::array<int, 3> dim3(int pad = 0) const noexcept {
        std::array<int, 3> r{pad, pad, pad};
        for (int d = 0; d < SpaceDim; ++d) r[d] = v_[d];
        return r;
    }

    constexpr IntVect& operator+=(const IntVect& o) noexcept {
        for (int d = 0; d < SpaceDim; ++d) v_[d] += o.v_[d];
        return *this;
    }
    constexpr IntVect& operator-=(const IntVect& o) noexcept {
        for (int d = 0; d < SpaceDim; ++d) v_[d] -= o.v_[d];
        return *this;
    }
    constexpr IntVect& operator*=(int s) noexcept {
        for (auto& x : v_) x *= s;
        return *this;
    }

    friend constexpr IntVect operator+(IntVect a, const IntVect& b) noexcept { return a += b; }
    friend constexpr IntVect operator-(IntVect a, const IntVect& b) noexcept { return a -= b; }
    friend constexpr IntVect operator-(IntVect a) noexcept {
        for (auto& x : a.v_) x = -x;
        return a;
    }
    friend constexpr IntVect operator*(IntVect a, int s) noexcept { return a *= s; }
    friend constexpr IntVect operator*(int s, IntVect a) noexcept { return a *= s; }
    friend constexpr IntVect operator*(IntVect a, const IntVect& b) noexcept {
        for (int d = 0; d < SpaceDim; ++d) a.v_[d] *= b.v_[d];
        return a;
    }
    friend constexpr bool operator==(const IntVect&, const IntVect&) = default;

    constexpr bool all_le(const IntVect& o) const noexcept {
        for (int d = 0; d < SpaceDim; ++d)
            if (v_[d] > o.v_[d]) return false;
        return true;
    }
    constexpr bool all_ge(const IntVect& o) const noexcept { return o.all_le(*this); }
    constexpr bool all_gt(int s) const noexcept {
        for (int x : v_)
            if (x <= s) return false;
        return true;
    }
    constexpr int min() const noexcept { return *std::min_element(v_.begin(), v_.end()); }
    constexpr int max() const noexcept { return *std::max_element(v_.begin(), v_.end()); }

    friend constexpr IntVect min(IntVect a, const IntVect& b) noexcept {
        for (int d = 0; d < SpaceDim; ++d) a.v_[d] = std::min(a.v_[d], b.v_[d]);
        return a;
    }
    friend constexpr IntVect max(IntVect a, const IntVect& b) noexcept {
        for (int d = 0; d < SpaceDim; ++d) a.v_[d] = std::max(a.v_[d], b.v_[d]);
        return a;
    }

    //! Lexicographic ordering with the last axis most significant.
    friend constexpr bool operator<(const IntVect& a, const IntVect& b) noexcept {
        for (int d = SpaceDim - 1; d >= 0; --d) {
            if (a.v_[d] != b.v_[d]) return a.v_[d] < b.v_[d];
        }
        return false;
    }

    friend std::ostream& operator<<(std::ostream& os, const IntVect& iv) {
        os << '(';
        for (int d = 0; d < SpaceDim; ++d) os << (d ? "," : "") << iv.v_[d];
        return os << ')';
    }

  private:
    std::array<int, SpaceDim> v_;
};

//! Floor division, correct for negative numerators.
constexpr int floor_div(int a, int b) noexcept {
    int q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

} // namespace miniamr
