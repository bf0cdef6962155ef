#pragma once

#include <random>

#include "miniamr/Box.hpp"

namespace miniamr::test {

//! Box spanning [lo, hi] on axis 0 and the single index 0 on other axes.
inline Box line(int lo, int hi) {
    IntVect l(0), h(0);
    l[0] = lo;
    h[0] = hi;
    return Box(l, h);
}

//! Box spanning [lo0, hi0] x [lo1, hi1] and index 0 on the remaining axis.
inline Box rect(int lo0, int lo1, int hi0, int hi1) {
    IntVect l(0), h(0);
    l[0] = lo0;
    h[0] = hi0;
    if constexpr (SpaceDim > 1) {
        l[1] = lo1;
        h[1] = hi1;
    }
    return Box(l, h);
}

inline Box cube(int lo, int hi) { return Box(IntVect(lo), IntVect(hi)); }

inline IntVect axis0(int n) {
    IntVect v(0);
    v[0] = n;
    return v;
}

inline Box random_box(std::mt19937& rng, int range, int maxlen) {
    std::uniform_int_distribution<int> pos(-range, range), len(1, maxlen);
    IntVect lo, hi;
    for (int d = 0; d < SpaceDim; ++d) {
        lo[d] = pos(rng);
        hi[d] = lo[d] + len(rng) - 1;
    }
    return Box(lo, hi);
}

} // namespace miniamr::test
