#include "doctest.h"

#include <cmath>
#include <random>

#include "miniamr/Amr.hpp"
#include "test_util.hpp"

using namespace miniamr;
using namespace miniamr::test;

namespace {

Geometry unit_geom(int n, bool periodic) {
    RealVect lo{}, hi{};
    hi.fill(1);
    std::array<bool, SpaceDim> per{};
    per.fill(periodic);
    return Geometry(cube(0, n - 1), lo, hi, per);
}

IntVect iv3(int i, int j, int k) {
    IntVect v;
    const int a[3] = {i, j, k};
    for (int d = 0; d < SpaceDim; ++d) v[d] = a[d];
    return v;
}

Real coarse_value(const IntVect& c, int n) {
    Real s = 0.37 * n;
    for (int d = 0; d < SpaceDim; ++d) s += std::sin(0.41 * c[d] * (d + 1) + 0.2 * n) + 0.013 * c[d] * c[d];
    return s;
}

Real fine_value(const IntVect& c, int n) { return 1000 + c[0] + 100 * (c[SpaceDim - 1] % 7) + 0.5 * n; }

template <class F>
void fill_by_cell(MultiFab& mf, F f, bool with_ghosts) {
    for (int li = 0; li < mf.local_size(); ++li) {
        auto a = mf.array(li);
        const Box b = with_ghosts ? mf.fabbox(li) : mf.validbox(li);
        for (Long o = 0; o < b.num_pts(); ++o) {
            const IntVect c = b.at_offset(o);
            const auto d = c.dim3();
            for (int n = 0; n < mf.ncomp(); ++n) a(d[0], d[1], d[2], n) = f(c, n);
        }
    }
}

IntVect wrap(IntVect c, const Geometry& g) {
    for (int d = 0; d < SpaceDim; ++d)
        if (g.is_periodic(d)) c[d] = g.domain().lo(d) + (c[d] - g.domain().lo(d)) - g.domain().length(d) * floor_div(c[d] - g.domain().lo(d), g.domain().length(d));
    return c;
}

//! Interpolated value at fine cell f, computed directly from coarse_value.
Real interp_oracle(const IntVect& f, int n, int r, InterpScheme scheme, const Geometry& cg) {
    IntVect I;
    for (int d = 0; d < SpaceDim; ++d) I[d] = floor_div(f[d], r);
    const Real c0 = coarse_value(wrap(I, cg), n);
    if (scheme == InterpScheme::PiecewiseConstant) return c0;
    Real v = c0;
    for (int d = 0; d < SpaceDim; ++d) {
        IntVect lo = I, hi = I;
        --lo[d];
        ++hi[d];
        const bool has_lo = cg.is_periodic(d) || lo[d] >= cg.domain().lo(d);
        const bool has_hi = cg.is_periodic(d) || hi[d] <= cg.domain().hi(d);
        Real slope = 0;
        if (has_lo && has_hi) slope = 0.5 * (coarse_value(wrap(hi, cg), n) - coarse_value(wrap(lo, cg), n));
        else if (has_hi) slope = coarse_value(wrap(hi, cg), n) - c0;
        else if (has_lo) slope = c0 - coarse_value(wrap(lo, cg), n);
        const Real x = (Real(f[d] - I[d] * r) + 0.5) / r - 0.5;
        v += slope * x;
    }
    return v;
}

BoxArray random_fine_grids(std::mt19937& rng, const AmrMesh& mesh, double density) {
    TagField tags(mesh.box_array(0), mesh.distribution_map(0));
    std::bernoulli_distribution coin(density);
    for (int li = 0; li < tags.local_size(); ++li) {
        const Box& b = tags.box_array()[tags.global_index(li)];
        for (Long o = 0; o < b.num_pts(); ++o)
            if (coin(rng)) tags.data(li)[o] = 1;
    }
    return mesh.regrid(0, tags);
}

} // namespace

TEST_CASE("regrid: no tags, one tag, all tags") {
    AmrConfig cfg;
    cfg.max_level = 1;
    cfg.ref_ratio = 2;
    cfg.blocking_factor = 8;
    cfg.max_grid_size = 16;
    AmrMesh mesh(unit_geom(32, true), cfg);
    mesh.make_base_level();
    TagField tags(mesh.box_array(0), mesh.distribution_map(0));
    CHECK(mesh.regrid(0, tags).empty());

    const IntVect cell = iv3(5, 9, 13);
    const int gi = int(mesh.box_array(0).find(cell));
    int li = -1;
    for (int l = 0; l < tags.local_size(); ++l)
        if (tags.global_index(l) == gi) li = l;
    REQUIRE(li >= 0);
    tags.set(li, cell);
    BoxArray one = mesh.regrid(0, tags);
    REQUIRE(one.size() == 1);
    // The chunk of 4 coarse cells holding the tag, refined.
    IntVect lo, hi;
    for (int d = 0; d < SpaceDim; ++d) {
        lo[d] = (cell[d] / 4) * 8;
        hi[d] = lo[d] + 7;
    }
    CHECK(one[0] == Box(lo, hi));

    for (int l = 0; l < tags.local_size(); ++l) {
        const Box& b = tags.box_array()[tags.global_index(l)];
        std::fill(tags.data(l), tags.data(l) + b.num_pts(), std::uint8_t(1));
    }
    BoxArray all = mesh.regrid(0, tags);
    CHECK(all.covers(mesh.geom(1).domain()));
    Long npts = 0;
    for (const Box& b : all.boxes()) {
        npts += b.num_pts();
        for (int d = 0; d < SpaceDim; ++d) CHECK(b.length(d) <= 16);
    }
    CHECK(npts == mesh.geom(1).domain().num_pts());
}

TEST_CASE("regrid: random tags are covered by blocking-factor chunks that all hold tags") {
    std::mt19937 rng(42);
    AmrConfig cfg;
    cfg.max_level = 1;
    cfg.ref_ratio = 2;
    cfg.blocking_factor = 4;
    cfg.max_grid_size = 8;
    for (int trial = 0; trial < 20; ++trial) {
        AmrMesh mesh(unit_geom(16, trial % 2 == 0), cfg);
        mesh.make_base_level();
        TagField tags(mesh.box_array(0), mesh.distribution_map(0));
        std::bernoulli_distribution coin(0.002 * (trial + 1));
        for (int li = 0; li < tags.local_size(); ++li) {
            const Box& b = tags.box_array()[tags.global_index(li)];
            for (Long o = 0; o < b.num_pts(); ++o)
                if (coin(rng)) tags.data(li)[o] = 1;
        }
        BoxArray fine = mesh.regrid(0, tags);
        Long npts = 0;
        for (const Box& b : fine.boxes()) npts += b.num_pts();
        Long union_pts = 0;
        for (std::size_t i = 0; i < fine.size(); ++i) union_pts += fine[i].num_pts();
        CHECK(npts == union_pts);
        for (const Box& b : fine.boxes()) {
            for (int d = 0; d < SpaceDim; ++d) {
                CHECK(b.lo(d) % 4 == 0);
                CHECK(b.length(d) % 4 == 0);
                CHECK(b.length(d) <= 8);
            }
        }
        for (int li = 0; li < tags.local_size(); ++li) {
            const Box& b = tags.box_array()[tags.global_index(li)];
            for (Long o = 0; o < b.num_pts(); ++o) {
                if (!tags.data(li)[o]) continue;
                CHECK(fine.covers(refine(Box(b.at_offset(o), b.at_offset(o)), 2)));
            }
        }
        // Every chunk of every fine box contains a tagged coarse cell.
        for (const Box& b : fine.boxes()) {
            for (const Box& chunk : chop(coarsen(b, 2), IntVect(2))) {
                bool any = false;
                for (Long o = 0; o < chunk.num_pts() && !any; ++o) {
                    const IntVect c = chunk.at_offset(o);
                    const int gi = int(mesh.box_array(0).find(c));
                    for (int li = 0; li < tags.local_size(); ++li)
                        if (tags.global_index(li) == gi) any = tags.get(li, c);
                }
                CHECK(any);
            }
        }
        mesh.set_level(1, fine);
        CHECK(mesh.properly_nested(1));
    }
}

TEST_CASE("regrid: three levels stay properly nested") {
    AmrConfig cfg;
    cfg.max_level = 2;
    cfg.ref_ratio = 2;
    cfg.blocking_factor = 4;
    cfg.max_grid_size = 8;
    AmrMesh mesh(unit_geom(16, false), cfg);
    mesh.make_base_level();
    TagField t0(mesh.box_array(0), mesh.distribution_map(0));
    const Box block = cube(4, 7);
    for (int li = 0; li < t0.local_size(); ++li)
        for (Long o = 0; o < block.num_pts(); ++o)
            if (t0.box_array()[t0.global_index(li)].contains(block.at_offset(o))) t0.set(li, block.at_offset(o));
    mesh.set_level(1, mesh.regrid(0, t0));
    REQUIRE(mesh.finest_level() == 1);

    // Tag every level-1 cell: chunks touching the level-1 boundary must drop out.
    TagField t1(mesh.box_array(1), mesh.distribution_map(1));
    for (int li = 0; li < t1.local_size(); ++li) {
        const Box& b = t1.box_array()[t1.global_index(li)];
        std::fill(t1.data(li), t1.data(li) + b.num_pts(), std::uint8_t(1));
    }
    BoxArray l2 = mesh.regrid(1, t1);
    REQUIRE(!l2.empty());
    mesh.set_level(2, l2);
    CHECK(mesh.properly_nested(2));
    CHECK(mesh.properly_nested(1));
    // A single level-1 block of 4 chunks per axis, minus one chunk at each side.
    Long n2 = 0;
    for (const Box& b : l2.boxes()) n2 += b.num_pts();
    Long expect = 1;
    for (int d = 0; d < SpaceDim; ++d) expect *= 2 * 4 * 2 - 2 * 4 * 2 / 2;
    CHECK(n2 == expect);

    mesh.set_level(1, BoxArray());
    CHECK(mesh.finest_level() == 0);
    CHECK_THROWS_AS(mesh.set_level(2, l2), AmrError);
}

TEST_CASE("regrid agrees across rank counts") {
    std::mt19937 rng(7);
    AmrConfig cfg;
    cfg.max_level = 1;
    cfg.ref_ratio = 2;
    cfg.blocking_factor = 4;
    cfg.max_grid_size = 8;
    AmrMesh serial_mesh(unit_geom(16, true), cfg);
    serial_mesh.make_base_level();
    std::vector<IntVect> tagged;
    std::uniform_int_distribution<int> pos(0, 15);
    for (int n = 0; n < 12; ++n) tagged.push_back(iv3(pos(rng), pos(rng), pos(rng)));

    auto tag_cells = [&](TagField& t) {
        for (int li = 0; li < t.local_size(); ++li)
            for (const auto& c : tagged)
                if (t.box_array()[t.global_index(li)].contains(c)) t.set(li, c);
    };
    TagField st(serial_mesh.box_array(0), serial_mesh.distribution_map(0));
    tag_cells(st);
    const BoxArray expect = serial_mesh.regrid(0, st);

    Backend be;
    auto got = runtime_spawn(3, [&](Communicator& comm) {
        AmrMesh mesh(unit_geom(16, true), cfg, 3);
        mesh.make_base_level();
        TagField t(mesh.box_array(0), mesh.distribution_map(0), comm);
        tag_cells(t);
        return mesh.regrid(0, t).boxes();
    }, be);
    for (const auto& g : got) CHECK(g == expect.boxes());
}

TEST_CASE("tag_where marks cells in one launch") {
    AmrConfig cfg;
    AmrMesh mesh(unit_geom(16, true), cfg);
    mesh.make_base_level();
    MultiFab mf(mesh.box_array(0), mesh.distribution_map(0), 1, 0);
    fill_by_cell(mf, [](const IntVect& c, int) { return Real(c[0]); }, false);
    TagField t(mesh.box_array(0), mesh.distribution_map(0));
    const Long before = mf.backend().launch_count();
    t.tag_where(mf, [](const auto& v, int i, int j, int k) { return v(i, j, k, 0) > 12.5; });
    CHECK(mf.backend().launch_count() - before == 1);
    for (int li = 0; li < t.local_size(); ++li) {
        const Box& b = t.box_array()[t.global_index(li)];
        for (Long o = 0; o < b.num_pts(); ++o) CHECK(t.get(li, b.at_offset(o)) == (b.at_offset(o)[0] > 12));
    }
}

TEST_CASE("average_down") {
    const BoxArray cba = BoxArray::from_domain(cube(0, 7), IntVect(4));
    std::vector<Box> fb{cube(4, 11)};
    const BoxArray fba(fb);
    MultiFab coarse(cba, DistributionMapping::round_robin(cba.size(), 1), 2, 0);
    MultiFab fine(fba, DistributionMapping::round_robin(1, 1), 2, 1);

    SUBCASE("constant stays constant, uncovered unchanged") {
        coarse.setval(-7);
        fine.setval(3.25);
        average_down(fine, coarse, 2);
        for (int li = 0; li < coarse.local_size(); ++li) {
            const Box& b = coarse.validbox(li);
            auto a = coarse.const_array(li);
            for (Long o = 0; o < b.num_pts(); ++o) {
                const auto c = b.at_offset(o);
                const auto d = c.dim3();
                const bool covered = cube(2, 5).contains(c);
                for (int n = 0; n < 2; ++n) CHECK(a(d[0], d[1], d[2], n) == (covered ? 3.25 : -7.0));
            }
        }
    }
    SUBCASE("alternating 1 and 3 average to 2") {
        fill_by_cell(fine, [](const IntVect& c, int) { return c[0] % 2 == 0 ? 1.0 : 3.0; }, true);
        average_down(fine, coarse, 2, 1, 1);
        auto a = coarse.const_array(0);
        for (int li = 0; li < coarse.local_size(); ++li) {
            a = coarse.const_array(li);
            const Box b = intersect(coarse.validbox(li), cube(2, 5));
            for (Long o = 0; o < b.num_pts(); ++o) {
                const auto d = b.at_offset(o).dim3();
                CHECK(a(d[0], d[1], d[2], 1) == 2.0);
            }
        }
    }
    SUBCASE("sum is conserved") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<Real> u(-1, 1);
        fill_by_cell(fine, [&](const IntVect&, int) { return u(rng); }, true);
        coarse.setval(0);
        average_down(fine, coarse, 2);
        for (int n = 0; n < 2; ++n) {
            Real fs = 0, cs = 0;
            auto f = fine.const_array(0);
            for (Long o = 0; o < fine.validbox(0).num_pts(); ++o) {
                const auto d = fine.validbox(0).at_offset(o).dim3();
                fs += f(d[0], d[1], d[2], n);
            }
            for (int li = 0; li < coarse.local_size(); ++li) {
                auto a = coarse.const_array(li);
                for (Long o = 0; o < coarse.validbox(li).num_pts(); ++o) {
                    const auto d = coarse.validbox(li).at_offset(o).dim3();
                    cs += a(d[0], d[1], d[2], n);
                }
            }
            CHECK(std::abs(cs * (1 << SpaceDim) - fs) <= 1e-12 * std::max<Real>(1, std::abs(fs)) * 64);
        }
    }
    SUBCASE("misaligned fine box") {
        std::vector<Box> odd{cube(3, 10)};
        MultiFab bad(BoxArray(odd), DistributionMapping::round_robin(1, 1), 2, 0);
        CHECK_THROWS_AS(average_down(bad, coarse, 2), AmrError);
    }
}

TEST_CASE("interpolation reproduces oracles") {
    for (bool periodic : {true, false}) {
        const Geometry cg = unit_geom(8, periodic);
        const BoxArray cba = BoxArray::from_domain(cg.domain(), IntVect(4));
        MultiFab coarse(cba, DistributionMapping::round_robin(cba.size(), 1), 2, 0);
        fill_by_cell(coarse, coarse_value, false);
        std::vector<Box> fb{cube(0, 7), Box(iv3(8, 0, 0), iv3(15, 7, 7)), cube(10, 15)};
        const BoxArray fba(fb);
        MultiFab fine(fba, DistributionMapping::round_robin(fba.size(), 1), 2, 1);
        for (auto scheme : {InterpScheme::PiecewiseConstant, InterpScheme::Linear}) {
            fine.setval(-99);
            interp_from_coarse(fine, coarse, cg, 2, scheme, IntVect(0), false, 0, 2);
            for (int li = 0; li < fine.local_size(); ++li) {
                auto a = fine.const_array(li);
                const Box& b = fine.validbox(li);
                for (Long o = 0; o < b.num_pts(); ++o) {
                    const IntVect c = b.at_offset(o);
                    const auto d = c.dim3();
                    for (int n = 0; n < 2; ++n)
                        CHECK(a(d[0], d[1], d[2], n) == doctest::Approx(interp_oracle(c, n, 2, scheme, cg)).epsilon(1e-13));
                }
            }
            // Averaging the interpolated data returns the coarse data.
            MultiFab back(cba, coarse.distribution_map(), 2, 0);
            back.setval(0);
            average_down(fine, back, 2);
            for (int li = 0; li < back.local_size(); ++li) {
                auto a = back.const_array(li);
                const Box covered = intersect(back.validbox(li), cube(0, 7));
                for (Long o = 0; o < covered.num_pts(); ++o) {
                    const IntVect c = covered.at_offset(o);
                    if (!fba.coarsen(2).covers(Box(c, c))) continue;
                    const auto d = c.dim3();
                    for (int n = 0; n < 2; ++n) CHECK(std::abs(a(d[0], d[1], d[2], n) - coarse_value(c, n)) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("linear interpolation is exact for linear data") {
    const Geometry cg = unit_geom(8, false);
    const BoxArray cba = BoxArray::from_domain(cg.domain(), IntVect(8));
    MultiFab coarse(cba, DistributionMapping::round_robin(1, 1), 1, 0);
    // Coarse cell centers sit at fine coordinate 2I + 0.5.
    auto linear_fine = [](Real x, Real y, Real z) { return 1.5 + 0.25 * x - 0.75 * y + 2.0 * z; };
    fill_by_cell(coarse, [&](const IntVect& c, int) {
        const auto d = c.dim3();
        return linear_fine(2 * d[0] + 0.5, SpaceDim > 1 ? 2 * d[1] + 0.5 : 0, SpaceDim > 2 ? 2 * d[2] + 0.5 : 0);
    }, false);
    std::vector<Box> fb{cube(0, 15)};
    MultiFab fine(BoxArray(fb), DistributionMapping::round_robin(1, 1), 1, 0);
    interp_from_coarse(fine, coarse, cg, 2, InterpScheme::Linear, IntVect(0), false, 0, 1);
    auto a = fine.const_array(0);
    for (Long o = 0; o < fine.validbox(0).num_pts(); ++o) {
        const auto d = fine.validbox(0).at_offset(o).dim3();
        const Real want = linear_fine(d[0], SpaceDim > 1 ? d[1] : 0, SpaceDim > 2 ? d[2] : 0);
        CHECK(std::abs(a(d[0], d[1], d[2], 0) - want) <= 1e-12);
    }
}

TEST_CASE("fill_patch matches a global oracle on random hierarchies") {
    std::mt19937 rng(2024);
    AmrConfig cfg;
    cfg.max_level = 1;
    cfg.ref_ratio = 2;
    cfg.blocking_factor = 4;
    cfg.max_grid_size = 8;
    int cases = 0;
    for (int trial = 0; trial < 16; ++trial) {
        const bool periodic = trial % 2 == 0;
        const auto scheme = trial % 4 < 2 ? InterpScheme::PiecewiseConstant : InterpScheme::Linear;
        const int nranks = 1 + trial % 3;
        AmrMesh layout(unit_geom(16, periodic), cfg, nranks);
        layout.make_base_level();
        // trial 15 refines everything; others refine a random subset.
        BoxArray fba = random_fine_grids(rng, layout, trial == 15 ? 1.0 : 0.004);
        if (fba.empty()) continue;
        ++cases;
        const Geometry cg = layout.geom(0), fg = layout.geom(1);
        Backend be;
        runtime_spawn(nranks, [&](Communicator& comm) {
            MultiFab coarse(layout.box_array(0), layout.distribution_map(0), 2, 0, cg, comm);
            fill_by_cell(coarse, coarse_value, false);
            const auto fdm = DistributionMapping::round_robin(fba.size(), nranks);
            MultiFab fine(fba, fdm, 2, 2, fg, comm);
            fine.setval(-1e30);
            fill_by_cell(fine, fine_value, false);
            fill_patch(fine, coarse, fg, cg, 2, scheme);
            for (int li = 0; li < fine.local_size(); ++li) {
                auto a = fine.const_array(li);
                const Box& fab = fine.fabbox(li);
                for (Long o = 0; o < fab.num_pts(); ++o) {
                    const IntVect c = fab.at_offset(o);
                    const auto d = c.dim3();
                    const IntVect w = wrap(c, fg);
                    const bool in_domain = fg.domain().contains(w);
                    for (int n = 0; n < 2; ++n) {
                        Real want;
                        if (!in_domain) want = -1e30;
                        else if (fba.covers(Box(w, w))) want = fine_value(w, n);
                        else want = interp_oracle(c, n, 2, scheme, cg);
                        const Real got = a(d[0], d[1], d[2], n);
                        if (std::abs(got - want) > 1e-12 * std::max<Real>(1, std::abs(want))) {
                            FAIL_CHECK("cell " << Box(c, c).str() << " comp " << n << " got " << got << " want " << want);
                            return;
                        }
                    }
                }
            }
        }, be);
    }
    CHECK(cases >= 10);
}

TEST_CASE("fill_patch rejects uncovered coarse data") {
    const Geometry cg = unit_geom(16, false);
    std::vector<Box> partial{cube(0, 7)};
    MultiFab coarse(BoxArray(partial), DistributionMapping::round_robin(1, 1), 1, 0);
    coarse.setval(1);
    std::vector<Box> fb{cube(8, 15)};
    MultiFab fine(BoxArray(fb), DistributionMapping::round_robin(1, 1), 1, 1);
    CHECK_THROWS_AS(fill_patch(fine, coarse, cg.refine(2), cg, 2, InterpScheme::PiecewiseConstant), AmrError);
    CHECK_THROWS_AS(fill_patch(fine, coarse, cg.refine(4), cg, 2, InterpScheme::PiecewiseConstant), AmrError);
}

TEST_CASE("mesh configuration errors") {
    AmrConfig cfg;
    cfg.blocking_factor = 3;
    CHECK_THROWS_AS(AmrMesh(unit_geom(16, true), cfg), AmrError);
    cfg = AmrConfig{};
    cfg.max_grid_size = 12;
    CHECK_THROWS_AS(AmrMesh(unit_geom(16, true), cfg), AmrError);
    cfg = AmrConfig{};
    AmrMesh mesh(unit_geom(16, true), cfg);
    mesh.make_base_level();
    std::vector<Box> outside{cube(40, 47)};
    CHECK_THROWS_AS(mesh.set_level(1, BoxArray(outside)), AmrError);
    std::vector<Box> wrong_level{cube(0, 7)};
    CHECK_THROWS_AS(mesh.set_level(2, BoxArray(wrong_level)), AmrError);
}
