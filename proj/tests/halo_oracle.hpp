#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "miniamr/Exchange.hpp"
#include "test_util.hpp"

namespace miniamr::test {

struct HaloConfig {
    Box domain;
    std::vector<Box> boxes;
    std::vector<int> ranks;
    int nranks = 1;
    IntVect ngrow;
    std::array<bool, SpaceDim> periodic{};

    Geometry geom() const {
        RealVect lo{}, hi{};
        for (int d = 0; d < SpaceDim; ++d) hi[d] = 1;
        return Geometry(domain, lo, hi, periodic);
    }
};

//! Value stored in valid cell iv of the global array.
inline Real cell_value(const IntVect& iv, int comp) {
    std::uint64_t h = 1469598103934665603ull + std::uint64_t(comp) * 1099511628211ull;
    for (int d = 0; d < SpaceDim; ++d) h = (h ^ std::uint64_t(std::int64_t(iv[d]) + 1000)) * 1099511628211ull;
    return Real(h % 1000003) * Real(0.25);
}

inline constexpr Real kUntouched = Real(-12345.5);

//! Random split of a box into pieces: repeatedly bisects the largest piece.
inline std::vector<Box> random_split(std::mt19937& rng, const Box& domain, int npieces, int min_extent) {
    std::vector<Box> pieces{domain};
    for (int tries = 0; int(pieces.size()) < npieces && tries < 200; ++tries) {
        std::size_t k = rng() % pieces.size();
        Box b = pieces[k];
        int d = int(rng() % SpaceDim);
        int len = b.length(d);
        if (len < 2 * min_extent) continue;
        int cut = b.lo(d) + min_extent + int(rng() % std::uint32_t(len - 2 * min_extent + 1));
        IntVect hi1 = b.hi(), lo2 = b.lo();
        hi1[d] = cut - 1;
        lo2[d] = cut;
        pieces[k] = Box(b.lo(), hi1);
        pieces.push_back(Box(lo2, b.hi()));
    }
    return pieces;
}

inline HaloConfig random_halo_config(std::mt19937& rng, int max_ranks, int max_boxes, int max_extent) {
    HaloConfig c;
    std::uniform_int_distribution<int> ng(1, 2), ext(4, max_extent), nr(1, max_ranks), nb(1, max_boxes);
    const int g = ng(rng);
    IntVect hi;
    for (int d = 0; d < SpaceDim; ++d) hi[d] = ext(rng) - 1;
    c.domain = Box(IntVect(0), hi);
    c.ngrow = IntVect(g);
    c.boxes = random_split(rng, c.domain, nb(rng), g);
    // Occasionally drop a box so some ghosts have no source at all.
    if (c.boxes.size() > 2 && rng() % 4 == 0) c.boxes.erase(c.boxes.begin() + long(rng() % c.boxes.size()));
    c.nranks = nr(rng);
    for (std::size_t b = 0; b < c.boxes.size(); ++b) c.ranks.push_back(int(rng() % std::uint32_t(c.nranks)));
    for (int d = 0; d < SpaceDim; ++d) c.periodic[d] = rng() % 2 == 0;
    return c;
}

//! Expected value of cell iv in the ghost region of a fab after fill_boundary:
//! wrap iv into the domain along periodic axes, then look it up in the valid
//! boxes. Returns kUntouched when nothing covers it.
inline Real expected_ghost(const HaloConfig& c, const IntVect& iv, int comp) {
    IntVect w = iv;
    for (int d = 0; d < SpaceDim; ++d) {
        const int n = c.domain.length(d);
        if (c.periodic[d]) w[d] = ((w[d] - c.domain.lo(d)) % n + n) % n + c.domain.lo(d);
    }
    for (const Box& b : c.boxes)
        if (b.contains(w)) return cell_value(w, comp);
    return kUntouched;
}

struct HaloResult {
    bool values_ok = true;
    bool valid_preserved = true;
    bool aggregation_ok = true;
    bool cache_ok = true;
    std::string detail;
};

//! Runs fill_boundary twice on every rank and checks both calls against the
//! global-array oracle, message counts per call and plan-cache behaviour.
inline HaloResult run_halo_case(const HaloConfig& c, Backend& be, int ncomp = 2) {
    Runtime rt(c.nranks, be);
    BoxArray ba(c.boxes);
    DistributionMapping dm(c.ranks, c.nranks);
    const Geometry geom = c.geom();
    std::vector<MessageStats> per_call(2);
    auto results = rt.run([&](Communicator& comm) {
        HaloResult r;
        MultiFab mf(ba, dm, ncomp, c.ngrow, geom, comm);
        for (int li = 0; li < mf.local_size(); ++li) {
            auto a = mf.array(li);
            const Box vb = mf.validbox(li);
            const Box fb = mf.fabbox(li);
            for (Long o = 0; o < fb.num_pts(); ++o) {
                IntVect iv = fb.at_offset(o);
                auto p = iv.dim3();
                for (int n = 0; n < ncomp; ++n) a(p[0], p[1], p[2], n) = vb.contains(iv) ? cell_value(iv, n) : kUntouched;
            }
        }
        for (int call = 0; call < 2; ++call) {
            comm.barrier();
            MessageStats before = comm.bus().stats();
            comm.barrier();
            fill_boundary(mf);
            comm.barrier();
            if (comm.rank() == 0) per_call[call] = comm.bus().stats() - before;
            comm.barrier();
            for (int li = 0; li < mf.local_size(); ++li) {
                auto a = mf.const_array(li);
                const Box vb = mf.validbox(li);
                const Box fb = mf.fabbox(li);
                for (Long o = 0; o < fb.num_pts(); ++o) {
                    IntVect iv = fb.at_offset(o);
                    auto p = iv.dim3();
                    for (int n = 0; n < ncomp; ++n) {
                        const Real got = a(p[0], p[1], p[2], n);
                        if (vb.contains(iv)) {
                            if (got != cell_value(iv, n)) r.valid_preserved = false;
                        } else if (got != expected_ghost(c, iv, n)) {
                            if (r.values_ok) r.detail = "fab " + std::to_string(mf.global_index(li)) + " cell " + Box(iv, iv).str();
                            r.values_ok = false;
                        }
                    }
                }
            }
        }
        r.cache_ok = comm.plans().builds() == 1;
        return r;
    });
    HaloResult all;
    for (auto& r : results) {
        all.values_ok = all.values_ok && r.values_ok;
        all.valid_preserved = all.valid_preserved && r.valid_preserved;
        all.cache_ok = all.cache_ok && r.cache_ok;
        if (all.detail.empty()) all.detail = r.detail;
    }
    for (auto& s : per_call) all.aggregation_ok = all.aggregation_ok && s.max_per_pair() <= 1;
    return all;
}

} // namespace miniamr::test
