#include "miniamr/Box.hpp"

#include <sstream>

namespace miniamr {

std::string Box::str() const {
    std::ostringstream os;
    os << *this;
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Box& b) {
    return os << b.lo_ << b.hi_ << b.type_;
}

Box intersect(const Box& a, const Box& b) {
    if (a.ixtype() != b.ixtype()) throw BoxError("intersect: mismatched index types");
    Box r(max(a.lo(), b.lo()), min(a.hi(), b.hi()), a.ixtype());
    if (a.empty() || b.empty() || r.empty()) return Box(IntVect(0), IntVect(-1), a.ixtype());
    return r;
}

Box refine(const Box& b, int ratio) {
    if (ratio < 1) throw BoxError("refine: ratio must be >= 1");
    if (!b.ixtype().all_cell()) throw BoxError("refine: only cell-centered boxes are supported");
    if (b.empty()) return b;
    return Box(b.lo() * ratio, b.hi() * ratio + IntVect(ratio - 1), b.ixtype());
}

Box coarsen(const Box& b, int ratio) {
    if (ratio < 1) throw BoxError("coarsen: ratio must be >= 1");
    if (!b.ixtype().all_cell()) throw BoxError("coarsen: only cell-centered boxes are supported");
    if (b.empty()) return b;
    IntVect lo, hi;
    for (int d = 0; d < SpaceDim; ++d) {
        lo[d] = floor_div(b.lo(d), ratio);
        hi[d] = floor_div(b.hi(d), ratio);
    }
    return Box(lo, hi, b.ixtype());
}

Box convert(const Box& b, IndexType t) {
    IntVect hi = b.hi();
    for (int d = 0; d < SpaceDim; ++d) {
        if (b.ixtype().cell_centered(d) && t.node_centered(d)) hi[d] += 1;
        if (b.ixtype().node_centered(d) && t.cell_centered(d)) hi[d] -= 1;
    }
    return Box(b.lo(), hi, t);
}

std::vector<Box> chop(const Box& b, const IntVect& max_size) {
    std::vector<Box> out;
    if (b.empty()) return out;
    std::array<std::vector<std::pair<int, int>>, SpaceDim> cuts;
    for (int d = 0; d < SpaceDim; ++d) {
        if (max_size[d] < 1) throw BoxError("chop: max_size must be >= 1");
        for (int lo = b.lo(d); lo <= b.hi(d); lo += max_size[d])
            cuts[d].emplace_back(lo, std::min(lo + max_size[d] - 1, b.hi(d)));
    }
    std::array<std::size_t, SpaceDim> n{};
    std::size_t total = 1;
    for (int d = 0; d < SpaceDim; ++d) {
        n[d] = cuts[d].size();
        total *= n[d];
    }
    out.reserve(total);
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t rem = t;
        IntVect lo, hi;
        for (int d = 0; d < SpaceDim; ++d) {
            auto c = cuts[d][rem % n[d]];
            rem /= n[d];
            lo[d] = c.first;
            hi[d] = c.second;
        }
        out.emplace_back(lo, hi, b.ixtype());
    }
    return out;
}

} // namespace miniamr
