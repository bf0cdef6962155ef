#include "doctest.h"

#include <random>

#include "halo_oracle.hpp"
#include "miniamr/Exchange.hpp"

using namespace miniamr;
using namespace miniamr::test;

namespace {

Geometry periodic_line(int n, bool periodic) {
    RealVect lo{}, hi{};
    hi.fill(1);
    std::array<bool, SpaceDim> per{};
    per[0] = periodic;
    return Geometry(line(0, n - 1), lo, hi, per);
}

} // namespace

TEST_CASE("runtime basics") {
    Backend be;
    auto one = runtime_spawn(1, [](Communicator& c) { return c.rank() + 10; }, be);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 10);

    Runtime rt(2, be);
    rt.run([](Communicator& c) {
        if (c.rank() == 0) {
            ArenaBuffer b(8, The_Comm_Arena());
            c.send(1, std::move(b));
            c.recv(1);
        } else {
            c.recv(0);
            c.send(0, ArenaBuffer(16, The_Comm_Arena()));
        }
    });
    auto s = rt.stats();
    CHECK(s.count(0, 1) == 1);
    CHECK(s.count(1, 0) == 1);
    CHECK(s.nbytes(1, 0) == 16);
    CHECK(s.total_messages() == 2);
}

TEST_CASE("runtime failure names the rank") {
    Backend be;
    try {
        runtime_spawn(3, [](Communicator& c) {
            if (c.rank() == 2) throw std::runtime_error("boom");
            c.barrier();
        }, be);
        FAIL("expected a RankError");
    } catch (const RankError& e) {
        CHECK(e.rank() == 2);
        CHECK(std::string(e.what()).find("boom") != std::string::npos);
    }
}

TEST_CASE("runtime determinism") {
    Backend be(Backend::Kind::CpuParallel, 4);
    auto program = [](Communicator& c) {
        std::mt19937 rng(42 + c.rank());
        double acc = 0;
        for (int round = 0; round < 20; ++round) {
            const int peer = (c.rank() + 1) % c.nranks();
            const int from = (c.rank() + c.nranks() - 1) % c.nranks();
            ArenaBuffer b(sizeof(double), The_Comm_Arena());
            double v = std::uniform_real_distribution<double>(0, 1)(rng) + acc;
            std::memcpy(b.data(), &v, sizeof v);
            c.send(peer, std::move(b));
            ArenaBuffer in = c.recv(from);
            double w;
            std::memcpy(&w, in.data(), sizeof w);
            acc = acc * 0.5 + w;
            c.barrier();
        }
        return acc;
    };
    auto a = runtime_spawn(4, program, be);
    auto b = runtime_spawn(4, program, be);
    CHECK(a == b);
}

TEST_CASE("fill_boundary plan on a periodic line") {
    BoxArray ba(std::vector<Box>{line(0, 3), line(4, 7)});
    Geometry g = periodic_line(8, true);
    MultiFab mf(ba, DistributionMapping::all_on(2, 0, 1), 1, axis0(1), g);
    auto plan = fill_boundary_plan(mf, g);
    // Oracle: overlaps of each grown box with the images of the other boxes.
    std::size_t expect = 0;
    for (std::size_t j = 0; j < ba.size(); ++j)
        for (std::size_t i = 0; i < ba.size(); ++i)
            for (const auto& s : periodic_shifts(g)) {
                Box img = shift(ba[i], s);
                for (const Box& piece : box_diff(grow(ba[j], axis0(1)), ba[j]))
                    if (intersect(piece, img).ok()) ++expect;
            }
    CHECK(expect == 4);
    CHECK(plan->num_segments() == expect);
    CHECK(plan->local.size() == 4);
    CHECK(plan->sends.empty());

    auto again = fill_boundary_plan(mf, g);
    CHECK(again.get() == plan.get());
    CHECK(mf.comm().plans().builds() >= 1);

    MultiFab nog(ba, DistributionMapping::all_on(2, 0, 1), 1, 0, g);
    CHECK(fill_boundary_plan(nog, g)->num_segments() == 0);
}

TEST_CASE("fill_boundary on a periodic line") {
    Bus bus(1);
    Backend be;
    Communicator comm(0, bus, be);
    BoxArray ba(std::vector<Box>{line(0, 3), line(4, 7)});
    Geometry g = periodic_line(8, true);
    MultiFab mf(ba, DistributionMapping::all_on(2, 0, 1), 1, axis0(1), g, comm);
    mf.setval(-1);
    for (int li = 0; li < 2; ++li) {
        auto a = mf.array(li);
        for (int i = mf.validbox(li).lo(0); i <= mf.validbox(li).hi(0); ++i) a(i, 0, 0) = i;
    }
    fill_boundary(mf);
    auto f0 = mf.const_array(0);
    auto f1 = mf.const_array(1);
    CHECK(f0(-1, 0, 0) == 7);
    CHECK(f0(4, 0, 0) == 4);
    CHECK(f1(3, 0, 0) == 3);
    CHECK(f1(8, 0, 0) == 0);
    fill_boundary(mf);
    CHECK(comm.plans().builds() == 1);
    CHECK(comm.plans().hits() == 1);

    // Non-periodic: physical-boundary ghosts stay untouched.
    Communicator comm2(0, bus, be);
    MultiFab np(ba, DistributionMapping::all_on(2, 0, 1), 1, axis0(1), periodic_line(8, false), comm2);
    np.setval(-1);
    np.setval(5, 0, 1, IntVect(0));
    fill_boundary(np);
    CHECK(np.const_array(0)(-1, 0, 0) == -1);
    CHECK(np.const_array(0)(4, 0, 0) == 5);
}

TEST_CASE("fill_boundary rejects unsupported layouts") {
    Bus bus(1);
    Backend be;
    Communicator comm(0, bus, be);
    if constexpr (SpaceDim > 1) {
        BoxArray face(std::vector<Box>{convert(cube(0, 3), IndexType::face(0))});
        MultiFab mf(face, DistributionMapping::all_on(1, 0, 1), 1, 1, std::nullopt, comm);
        CHECK_THROWS_AS(fill_boundary(mf), CommError);
    }
    BoxArray thin(std::vector<Box>{line(0, 0), line(1, 7)});
    MultiFab t(thin, DistributionMapping::all_on(2, 0, 1), 1, axis0(2), std::nullopt, comm);
    CHECK_THROWS_AS(fill_boundary(t), CommError);
}

TEST_CASE("fill_boundary matches the global array oracle") {
    Backend be(Backend::Kind::CpuParallel, 4);
    std::mt19937 rng(777);
    for (int t = 0; t < 60; ++t) {
        HaloConfig c = random_halo_config(rng, 4, 16, 12);
        auto r = run_halo_case(c, be);
        INFO("case " << t << " " << r.detail);
        CHECK(r.values_ok);
        CHECK(r.valid_preserved);
        CHECK(r.aggregation_ok);
        CHECK(r.cache_ok);
    }
}

TEST_CASE("nodal fill_boundary") {
    Bus bus(1);
    Backend be;
    Communicator comm(0, bus, be);
    BoxArray ba(std::vector<Box>{convert(line(0, 3), IndexType::node()), convert(line(4, 7), IndexType::node())});
    MultiFab mf(ba, DistributionMapping::all_on(2, 0, 1), 1, axis0(1), std::nullopt, comm);
    mf.setval(-1);
    for (int li = 0; li < 2; ++li) {
        auto a = mf.array(li);
        const Box vb = mf.validbox(li);
        for (Long o = 0; o < vb.num_pts(); ++o) {
            auto p = vb.at_offset(o).dim3();
            a(p[0], p[1], p[2]) = p[0] + 0.5;
        }
    }
    fill_boundary(mf);
    CHECK(mf.const_array(0)(5, 0, 0) == 5.5);
    CHECK(mf.const_array(1)(3, 0, 0) == 3.5);
    CHECK(mf.const_array(0)(4, 0, 0) == 4.5);
}

TEST_CASE("parallel_copy") {
    Backend be(Backend::Kind::CpuParallel, 2);
    Box domain = cube(0, 15);
    BoxArray src_ba = BoxArray::from_domain(domain, IntVect(16));
    BoxArray dst_ba = BoxArray::from_domain(domain, IntVect(8));
    Runtime rt(4, be);
    MessageStats before = rt.stats();
    auto ok = rt.run([&](Communicator& c) {
        MultiFab src(src_ba, DistributionMapping::all_on(src_ba.size(), 0, 4), 1, 0, std::nullopt, c);
        MultiFab dst(dst_ba, DistributionMapping::round_robin(dst_ba.size(), 4), 1, 0, std::nullopt, c);
        dst.setval(-1);
        for (int li = 0; li < src.local_size(); ++li) {
            auto a = src.array(li);
            parallel_for(be, src.validbox(li), [=](int i, int j, int k) { a(i, j, k) = i + 100 * j + 10000 * k; });
        }
        parallel_copy(dst, src);
        bool good = true;
        for (int li = 0; li < dst.local_size(); ++li) {
            auto a = dst.const_array(li);
            const Box vb = dst.validbox(li);
            for (Long o = 0; o < vb.num_pts(); ++o) {
                auto p = vb.at_offset(o).dim3();
                good = good && a(p[0], p[1], p[2]) == p[0] + 100 * p[1] + 10000 * p[2];
            }
        }
        return good;
    });
    for (bool g : ok) CHECK(g);
    auto s = rt.stats() - before;
    CHECK(s.total_messages() == 3);
    for (int r = 1; r < 4; ++r) CHECK(s.count(0, r) == 1);

    // Same layout: purely local.
    Runtime rt2(2, be);
    rt2.run([&](Communicator& c) {
        auto dm = DistributionMapping::round_robin(dst_ba.size(), 2);
        MultiFab a(dst_ba, dm, 2, 1, std::nullopt, c), b(dst_ba, dm, 2, 0, std::nullopt, c);
        a.setval(3);
        b.setval(0);
        parallel_copy(b, a, 1, 0, 1);
        auto r = parallel_reduce(be, TypeList<ReduceOpMin>{}, b, [arr = b.const_arrays()](int li, int i, int j, int k) {
            return arr[li](i, j, k, 0);
        });
        CHECK(std::get<0>(r) == 3);
        CHECK_THROWS_AS(parallel_copy(b, a, 1, 0, 2), std::out_of_range);
    });
    CHECK(rt2.stats().total_messages() == 0);

    // Disjoint index spaces leave dst alone.
    BoxArray far(std::vector<Box>{cube(100, 103)});
    MultiFab x(far, DistributionMapping::all_on(1, 0, 1), 1, 0);
    MultiFab y(BoxArray(std::vector<Box>{cube(0, 3)}), DistributionMapping::all_on(1, 0, 1), 1, 0);
    x.setval(9);
    y.setval(1);
    parallel_copy(y, x);
    CHECK(y.fab(0).data()[0] == 1);
}

TEST_CASE("global_reduce") {
    Backend be;
    auto res = runtime_spawn(4, [](Communicator& c) {
        const double vals[4] = {5, -1, 3, 3};
        auto all = global_reduce(c, TypeList<ReduceOpSum, ReduceOpMin, ReduceOpMax>{},
                                 std::make_tuple(double(c.rank() + 1), vals[c.rank()], vals[c.rank()]));
        auto s = global_reduce(c, TypeList<ReduceOpSum>{}, std::make_tuple(double(c.rank() + 1)));
        auto mn = global_reduce(c, TypeList<ReduceOpMin>{}, std::make_tuple(vals[c.rank()]));
        auto mx = global_reduce(c, TypeList<ReduceOpMax>{}, std::make_tuple(vals[c.rank()]));
        bool same = std::get<0>(all) == std::get<0>(s) && std::get<1>(all) == std::get<0>(mn) &&
                    std::get<2>(all) == std::get<0>(mx);
        return std::make_tuple(std::get<0>(all), std::get<1>(all), same);
    }, be);
    for (auto& [sum, mn, same] : res) {
        CHECK(sum == 10);
        CHECK(mn == -1);
        CHECK(same);
    }

    CHECK_THROWS_AS(runtime_spawn(2, [](Communicator& c) {
        if (c.rank() == 0) global_reduce(c, TypeList<ReduceOpSum>{}, std::make_tuple(1.0));
        else global_reduce(c, TypeList<ReduceOpMin>{}, std::make_tuple(1.0));
    }, be), RankError);

    auto rt = runtime_spawn(3, [](Communicator& c) {
        return global_reduce(c, {ReduceOpKind::Sum, ReduceOpKind::Max}, {1.0 * c.rank(), 1.0 * c.rank()});
    }, be);
    CHECK(rt[1][0] == 3);
    CHECK(rt[2][1] == 2);
}

TEST_CASE("index mapped copies") {
    Backend be;
    Bus bus(1);
    Communicator comm(0, bus, be);
    BoxArray sba(std::vector<Box>{line(0, 2), line(3, 7)});
    BoxArray dba(std::vector<Box>{line(0, 4), line(5, 7)});
    auto dm = DistributionMapping::all_on(2, 0, 1);
    MultiFab src(sba, dm, 1, 0, std::nullopt, comm), dst(dba, dm, 1, 0, std::nullopt, comm);
    for (int li = 0; li < 2; ++li) {
        auto a = src.array(li);
        for (int i = src.validbox(li).lo(0); i <= src.validbox(li).hi(0); ++i) a(i, 0, 0) = 10 * i;
    }
    std::array<int, SpaceDim> perm{}, sign{};
    for (int d = 0; d < SpaceDim; ++d) {
        perm[d] = d;
        sign[d] = 1;
    }
    sign[0] = -1;
    AffineIndexMap reflect(perm, sign, axis0(7));
    index_mapped_copy(dst, src, 0, 0, 1, reflect);
    for (int li = 0; li < 2; ++li) {
        auto a = dst.const_array(li);
        for (int i = dst.validbox(li).lo(0); i <= dst.validbox(li).hi(0); ++i) CHECK(a(i, 0, 0) == 10 * (7 - i));
    }

    MultiFab idst(dba, dm, 1, 0, std::nullopt, comm), pdst(dba, dm, 1, 0, std::nullopt, comm);
    index_mapped_copy(idst, src, 0, 0, 1, AffineIndexMap::identity());
    parallel_copy(pdst, src);
    for (int li = 0; li < 2; ++li)
        for (Long o = 0; o < idst.fab(li).size(); ++o) CHECK(idst.fab(li).data()[o] == pdst.fab(li).data()[o]);

    AffineIndexMap outside(perm, sign, axis0(9));
    CHECK_THROWS_AS(index_mapped_copy(dst, src, 0, 0, 1, outside), CommError);
}

TEST_CASE("index mapped rotation") {
    if constexpr (SpaceDim >= 2) {
        Backend be;
        Runtime rt(2, be);
        const int n = 6;
        Box sq = rect(0, 0, n - 1, n - 1);
        std::mt19937 rng(3);
        BoxArray sba(random_split(rng, sq, 4, 1));
        BoxArray dba(random_split(rng, sq, 3, 1));
        // Rotation by 90 degrees: src = (j, n-1-i).
        std::array<int, SpaceDim> perm{}, sign{};
        IntVect off(0);
        for (int d = 0; d < SpaceDim; ++d) {
            perm[d] = d;
            sign[d] = 1;
        }
        perm[0] = 1;
        perm[1] = 0;
        sign[1] = -1;
        off[1] = n - 1;
        AffineIndexMap rot(perm, sign, off);
        auto ok = rt.run([&](Communicator& c) {
            MultiFab src(sba, DistributionMapping::round_robin(sba.size(), 2), 1, 0, std::nullopt, c);
            MultiFab dst(dba, DistributionMapping::all_on(dba.size(), 1, 2), 1, 0, std::nullopt, c);
            for (int li = 0; li < src.local_size(); ++li) {
                auto a = src.array(li);
                parallel_for(be, src.validbox(li), [=](int i, int j, int k) { a(i, j, k) = i + 10 * j + 100 * k; });
            }
            index_mapped_copy(dst, src, 0, 0, 1, rot);
            bool good = true;
            for (int li = 0; li < dst.local_size(); ++li) {
                auto a = dst.const_array(li);
                const Box vb = dst.validbox(li);
                for (Long o = 0; o < vb.num_pts(); ++o) {
                    auto p = vb.at_offset(o).dim3();
                    const int si = p[1], sj = n - 1 - p[0];
                    good = good && a(p[0], p[1], p[2]) == si + 10 * sj + 100 * p[2];
                }
            }
            return good;
        });
        for (bool g : ok) CHECK(g);
        CHECK(rt.stats().max_per_pair() <= 1);
    }
}
