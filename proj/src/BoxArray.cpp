#include "miniamr/BoxArray.hpp"

#include <atomic>
#include <stdexcept>

namespace miniamr {

namespace {
std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}
} // namespace

BoxArray::BoxArray() : d_(std::make_shared<Data>(Data{{}, next_id(), IndexType::cell()})) {}

BoxArray::BoxArray(std::vector<Box> boxes, bool check_disjoint) {
    IndexType t = boxes.empty() ? IndexType::cell() : boxes.front().ixtype();
    for (const auto& b : boxes) {
        if (b.empty()) throw BoxError("BoxArray: empty box");
        if (b.ixtype() != t) throw BoxError("BoxArray: mixed index types");
    }
    if (check_disjoint) {
        for (std::size_t a = 0; a < boxes.size(); ++a)
            for (std::size_t b = a + 1; b < boxes.size(); ++b)
                if (convert(boxes[a], IndexType::cell()).intersects(convert(boxes[b], IndexType::cell())))
                    throw BoxError("BoxArray: boxes " + boxes[a].str() + " and " + boxes[b].str() + " overlap");
    }
    d_ = std::make_shared<Data>(Data{std::move(boxes), next_id(), t});
}

BoxArray BoxArray::from_domain(const Box& domain, const IntVect& max_grid_size) {
    return BoxArray(chop(domain, max_grid_size), false);
}

Long BoxArray::num_pts() const noexcept {
    Long n = 0;
    for (const auto& b : d_->boxes) n += b.num_pts();
    return n;
}

Box BoxArray::minimal_box() const {
    if (empty()) return Box();
    Box r = d_->boxes.front();
    IntVect lo = r.lo(), hi = r.hi();
    for (const auto& b : d_->boxes) {
        lo = min(lo, b.lo());
        hi = max(hi, b.hi());
    }
    return Box(lo, hi, ixtype());
}

std::vector<int> BoxArray::intersecting(const Box& b) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < size(); ++i)
        if (d_->boxes[i].intersects(b)) out.push_back(int(i));
    return out;
}

int BoxArray::find(const IntVect& p) const {
    for (std::size_t i = 0; i < size(); ++i)
        if (d_->boxes[i].contains(p)) return int(i);
    return -1;
}

bool BoxArray::covers(const Box& b) const {
    if (b.empty()) return true;
    Long n = 0;
    for (const auto& x : d_->boxes) n += intersect(x, b).num_pts();
    return n == b.num_pts();
}

BoxArray BoxArray::coarsen(int ratio) const {
    std::vector<Box> out;
    out.reserve(size());
    for (const auto& b : d_->boxes) out.push_back(miniamr::coarsen(b, ratio));
    return BoxArray(std::move(out), false);
}

BoxArray BoxArray::refine(int ratio) const {
    std::vector<Box> out;
    out.reserve(size());
    for (const auto& b : d_->boxes) out.push_back(miniamr::refine(b, ratio));
    return BoxArray(std::move(out), false);
}

// ---------------------------------------------------------------------------

DistributionMapping::DistributionMapping() : d_(std::make_shared<Data>(Data{{}, 1, next_id()})) {}

DistributionMapping::DistributionMapping(std::vector<int> ranks, int nranks) {
    if (nranks < 1) throw std::invalid_argument("DistributionMapping: nranks must be >= 1");
    for (int r : ranks)
        if (r < 0 || r >= nranks) throw std::invalid_argument("DistributionMapping: rank id out of range");
    d_ = std::make_shared<Data>(Data{std::move(ranks), nranks, next_id()});
}

DistributionMapping DistributionMapping::round_robin(std::size_t nboxes, int nranks) {
    std::vector<int> r(nboxes);
    for (std::size_t i = 0; i < nboxes; ++i) r[i] = int(i % std::size_t(nranks));
    return DistributionMapping(std::move(r), nranks);
}

DistributionMapping DistributionMapping::all_on(std::size_t nboxes, int rank, int nranks) {
    return DistributionMapping(std::vector<int>(nboxes, rank), nranks);
}

} // namespace miniamr
