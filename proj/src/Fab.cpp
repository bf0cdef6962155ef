#include "miniamr/Fab.hpp"

#include <atomic>

namespace miniamr {

namespace {
#ifdef MINIAMR_DEBUG
std::atomic<bool> g_debug_fill{true};
#else
std::atomic<bool> g_debug_fill{false};
#endif
} // namespace

void Fab::set_debug_fill(bool on) noexcept { g_debug_fill.store(on); }
bool Fab::debug_fill() noexcept { return g_debug_fill.load(); }

Fab::Fab(const Box& box, int ncomp, Arena* arena) : box_(box), ncomp_(ncomp), arena_(arena) {
    if (box.empty()) throw std::invalid_argument("Fab: box must be non-empty");
    if (ncomp < 1) throw std::invalid_argument("Fab: ncomp must be >= 1");
    if (!arena) throw std::invalid_argument("Fab: null arena");
    data_ = static_cast<Real*>(arena->alloc(std::size_t(size()) * sizeof(Real)));
    if (debug_fill()) {
        const Real snan = std::numeric_limits<Real>::signaling_NaN();
        for (Long n = 0; n < size(); ++n) data_[n] = snan;
    }
}

Fab::~Fab() { release(); }

Fab::Fab(Fab&& o) noexcept
    : box_(o.box_), ncomp_(o.ncomp_), data_(std::exchange(o.data_, nullptr)), arena_(std::exchange(o.arena_, nullptr)) {
    o.ncomp_ = 0;
    o.box_ = Box();
}

Fab& Fab::operator=(Fab&& o) noexcept {
    if (this != &o) {
        release();
        box_ = std::exchange(o.box_, Box());
        ncomp_ = std::exchange(o.ncomp_, 0);
        data_ = std::exchange(o.data_, nullptr);
        arena_ = std::exchange(o.arena_, nullptr);
    }
    return *this;
}

void Fab::release() noexcept {
    if (data_ && arena_) {
        try {
            arena_->free(data_);
        } catch (...) {
        }
    }
    data_ = nullptr;
}

void Fab::setval(Real v, const Box& region, int scomp, int nc) {
    if (region.empty()) return;
    if (!box_.contains(region)) throw std::out_of_range("Fab::setval: region " + region.str() + " outside " + box_.str());
    if (scomp < 0 || nc < 0 || scomp + nc > ncomp_) throw std::out_of_range("Fab::setval: component range");
    auto a = array();
    const auto lo = region.lo().dim3();
    const auto hi = region.hi().dim3();
    for (int n = scomp; n < scomp + nc; ++n)
        for (int k = lo[2]; k <= hi[2]; ++k)
            for (int j = lo[1]; j <= hi[1]; ++j)
                for (int i = lo[0]; i <= hi[0]; ++i) a(i, j, k, n) = v;
}

} // namespace miniamr
