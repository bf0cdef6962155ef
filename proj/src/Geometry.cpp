#include "miniamr/Geometry.hpp"

#include <cmath>

namespace miniamr {

Geometry::Geometry(const Box& domain, const RealVect& prob_lo, const RealVect& prob_hi,
                   const std::array<bool, SpaceDim>& periodic)
    : domain_(domain), prob_lo_(prob_lo), prob_hi_(prob_hi), periodic_(periodic) {
    if (domain.empty() || !domain.ixtype().all_cell())
        throw BoxError("Geometry: domain must be a non-empty cell-centered box");
    for (int d = 0; d < SpaceDim; ++d) {
        dx_[d] = (prob_hi[d] - prob_lo[d]) / Real(domain.length(d));
        if (!(dx_[d] > 0)) throw BoxError("Geometry: prob_hi must exceed prob_lo on every axis");
    }
}

bool Geometry::any_periodic() const noexcept {
    for (bool p : periodic_)
        if (p) return true;
    return false;
}

IntVect Geometry::period() const noexcept {
    IntVect p;
    for (int d = 0; d < SpaceDim; ++d) p[d] = periodic_[d] ? domain_.length(d) : 0;
    return p;
}

int Geometry::cell_index(int d, Real x) const noexcept {
    return domain_.lo(d) + int(std::floor((x - prob_lo_[d]) / dx_[d]));
}

Geometry Geometry::refine(int ratio) const {
    return Geometry(miniamr::refine(domain_, ratio), prob_lo_, prob_hi_, periodic_);
}

std::vector<IntVect> periodic_shifts(const Geometry& g) {
    std::vector<IntVect> out{IntVect(0)};
    const IntVect period = g.period();
    int n = 1;
    for (int d = 0; d < SpaceDim; ++d) n *= 3;
    for (int t = 0; t < n; ++t) {
        IntVect s;
        int rem = t;
        bool ok = true;
        for (int d = 0; d < SpaceDim; ++d) {
            int f = rem % 3 - 1;
            rem /= 3;
            if (f != 0 && !g.is_periodic(d)) ok = false;
            s[d] = f * period[d];
        }
        if (ok && s != IntVect(0)) out.push_back(s);
    }
    return out;
}

std::vector<PeriodicImage> periodic_shift_images(const Box& b, const Geometry& g) {
    std::vector<PeriodicImage> out;
    const Box dom = convert(g.domain(), b.ixtype());
    auto shifts = periodic_shifts(g);
    std::sort(shifts.begin(), shifts.end());
    for (const auto& s : shifts) {
        Box img = shift(b, s);
        if (img.intersects(dom)) out.push_back({img, s});
    }
    return out;
}

} // namespace miniamr
