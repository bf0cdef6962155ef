#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "miniamr/Backend.hpp"
#include "miniamr/Box.hpp"

namespace miniamr {

namespace detail {

//! Flattens a list of boxes into one index space [0, total).
class BoxIndexer {
  public:
    explicit BoxIndexer(std::span<const Box> boxes) : boxes_(boxes), offsets_(boxes.size() + 1, 0) {
        for (std::size_t b = 0; b < boxes.size(); ++b) offsets_[b + 1] = offsets_[b] + boxes[b].num_pts();
    }

    Long total() const noexcept { return offsets_.back(); }
    std::size_t size() const noexcept { return boxes_.size(); }

    int box_of(Long pos) const noexcept {
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), pos);
        return int(it - offsets_.begin()) - 1;
    }

    //! Calls f(b, i, j, k) for every flattened index in [begin, end).
    template <class F>
    void for_each(Long begin, Long end, F&& f) const {
        if (begin >= end) return;
        for (int b = box_of(begin); begin < end && b < int(boxes_.size()); ++b) {
            const Long bstart = offsets_[b];
            const Long bstop = std::min(end, offsets_[b + 1]);
            if (bstop <= begin) continue;
            const Box& bx = boxes_[b];
            const auto lo = bx.lo().dim3();
            const auto len = bx.length().dim3(1);
            Long o = begin - bstart;
            const Long oend = bstop - bstart;
            int ii = int(o % len[0]);
            int jj = int((o / len[0]) % len[1]);
            int kk = int(o / (Long(len[0]) * len[1]));
            while (o < oend) {
                const int run = int(std::min<Long>(len[0] - ii, oend - o));
                const int j = lo[1] + jj;
                const int k = lo[2] + kk;
                const int i0 = lo[0] + ii;
                for (int i = i0; i < i0 + run; ++i) f(b, i, j, k);
                o += run;
                ii = 0;
                if (++jj == len[1]) {
                    jj = 0;
                    ++kk;
                }
            }
            begin = bstop;
        }
    }

  private:
    std::span<const Box> boxes_;
    std::vector<Long> offsets_;
};

inline std::pair<Long, Long> chunk_range(Long total, int nchunks, int c) {
    const Long base = total / nchunks;
    const Long rem = total % nchunks;
    const Long begin = c * base + std::min<Long>(c, rem);
    return {begin, begin + base + (c < rem ? 1 : 0)};
}

} // namespace detail

//! f(i) for i in [0, n).
template <class F>
void parallel_for(Backend& be, Long n, F&& f) {
    const int nchunks = int(std::min<Long>(be.for_chunks(), std::max<Long>(n, 1)));
    be.launch(nchunks, [&](int c) {
        auto [b, e] = detail::chunk_range(n, nchunks, c);
        for (Long i = b; i < e; ++i) f(i);
    });
}

//! f(box_index, i, j, k) for every cell of every box, in a single launch.
template <class F>
void parallel_for(Backend& be, std::span<const Box> boxes, F&& f) {
    detail::BoxIndexer ix(boxes);
    const Long total = ix.total();
    const int nchunks = int(std::min<Long>(be.for_chunks(), std::max<Long>(total, 1)));
    be.launch(nchunks, [&](int c) {
        auto [b, e] = detail::chunk_range(total, nchunks, c);
        ix.for_each(b, e, f);
    });
}

//! f(i, j, k) for every cell of bx.
template <class F>
void parallel_for(Backend& be, const Box& bx, F&& f) {
    parallel_for(be, std::span<const Box>(&bx, 1), [&](int, int i, int j, int k) { f(i, j, k); });
}

//! f(i, j, k, n) for every cell of bx and component n in [0, ncomp).
template <class F>
void parallel_for(Backend& be, const Box& bx, int ncomp, F&& f) {
    detail::BoxIndexer ix(std::span<const Box>(&bx, 1));
    const Long npts = ix.total();
    const Long total = npts * ncomp;
    const int nchunks = int(std::min<Long>(be.for_chunks(), std::max<Long>(total, 1)));
    be.launch(nchunks, [&](int c) {
        auto [b, e] = detail::chunk_range(total, nchunks, c);
        while (b < e) {
            const int n = int(b / npts);
            const Long stop = std::min(e, Long(n + 1) * npts);
            ix.for_each(b - n * npts, stop - n * npts, [&](int, int i, int j, int k) { f(i, j, k, n); });
            b = stop;
        }
    });
}

} // namespace miniamr
