#include "doctest.h"

#include <cstring>

#include "miniamr/ArrayInterface.hpp"
#include "miniamr/MultiFab.hpp"
#include "miniamr/Particles.hpp"
#include "test_util.hpp"

using namespace miniamr;
using namespace miniamr::test;

namespace {

template <class T>
T& element(const ArrayInterface& ai, const std::vector<Long>& idx) {
    return *reinterpret_cast<T*>(ai.data + std::uintptr_t(byte_offset(ai, idx)));
}

} // namespace

TEST_CASE("flat fab metadata") {
    Fab fab(rect(0, 0, 3, 3), 2);
    const auto ai = array_interface(fab.array());
    CHECK(ai.shape == std::vector<Long>{4, SpaceDim > 1 ? 4 : 1, 1, 2});
    if constexpr (SpaceDim > 1) CHECK(ai.strides == std::vector<Long>{8, 32, 128, 128});
    CHECK(ai.typestr == (sizeof(Real) == 8 ? "<f8" : "<f4"));
    CHECK(ai.version == 3);
    CHECK_FALSE(ai.readonly);
    CHECK(ai.data == reinterpret_cast<std::uintptr_t>(fab.data()));
    CHECK(array_interface(fab.const_array()).readonly);
    CHECK_THROWS_AS(array_interface(fab.array(), 'X'), std::invalid_argument);
}

TEST_CASE("F and C views address the same bytes") {
    Box b = cube(0, 3);
    b = Box(b.lo(), b.hi() + axis0(2));
    Fab fab(b, 3);
    auto v = fab.array();
    for (Long o = 0; o < b.num_pts(); ++o) {
        const auto d = b.at_offset(o).dim3();
        for (int n = 0; n < 3; ++n) v(d[0], d[1], d[2], n) = Real(d[0] + 10 * d[1] + 100 * d[2] + 1000 * n);
    }
    const auto f = array_interface(v, 'F');
    const auto c = array_interface(v, 'C');
    CHECK(c.shape == std::vector<Long>{f.shape[3], f.shape[2], f.shape[1], f.shape[0]});
    for (Long x = 0; x < f.shape[0]; ++x)
        for (Long y = 0; y < f.shape[1]; ++y)
            for (Long z = 0; z < f.shape[2]; ++z)
                for (Long n = 0; n < f.shape[3]; ++n) {
                    const Real a = element<Real>(f, {x, y, z, n});
                    CHECK(a == element<Real>(c, {n, z, y, x}));
                    CHECK(a == Real(x + 10 * y + 100 * z + 1000 * n));
                }
    const auto hf = to_host_array(v, 'F');
    CHECK(std::memcmp(hf.data(), fab.data(), hf.size() * sizeof(Real)) == 0);
    const auto hc = to_host_array(v, 'C');
    // C order: x varies fastest within (n, z, y).
    Long at = 0;
    for (Long n = 0; n < f.shape[3]; ++n)
        for (Long z = 0; z < f.shape[2]; ++z)
            for (Long y = 0; y < f.shape[1]; ++y)
                for (Long x = 0; x < f.shape[0]; ++x) CHECK(hc[at++] == Real(x + 10 * y + 100 * z + 1000 * n));
}

TEST_CASE("views write through and allocate nothing") {
    const BoxArray ba = BoxArray::from_domain(cube(0, 7), IntVect(4));
    MultiFab mf(ba, DistributionMapping::round_robin(ba.size(), 1), 1, 1);
    mf.setval(0);
    const auto before = The_Arena()->stats();
    std::vector<ArrayInterface> views;
    for (int li = 0; li < mf.local_size(); ++li) views.push_back(array_interface(mf.array(li)));
    const auto after = The_Arena()->stats();
    CHECK(after.in_use_bytes == before.in_use_bytes);
    CHECK(after.alloc_calls == before.alloc_calls);

    for (int li = 0; li < mf.local_size(); ++li) {
        CHECK(views[li].data == reinterpret_cast<std::uintptr_t>(mf.array(li).p));
        const auto& ai = views[li];
        const Long n = ai.shape[0] * ai.shape[1] * ai.shape[2] * ai.shape[3];
        Real* p = reinterpret_cast<Real*>(ai.data);
        for (Long i = 0; i < n; ++i) p[i] = 42.0;
    }
    auto [s, mn, mx] = parallel_reduce(mf.backend(), TypeList<ReduceOpSum, ReduceOpMin, ReduceOpMax>{}, mf,
                                       [v = mf.const_arrays()](int li, int i, int j, int k) {
                                           const Real x = v[li](i, j, k, 0);
                                           return std::make_tuple(x, x, x);
                                       });
    CHECK(s == 42.0 * Real(cube(0, 7).num_pts()));
    CHECK(mn == 42.0);
    CHECK(mx == 42.0);

    auto copy = to_host_array(mf.const_array(0));
    copy[0] = -1;
    CHECK(mf.const_array(0).p[0] == 42.0);
}

TEST_CASE("particle columns") {
    RealVect lo{}, hi{};
    hi.fill(1);
    std::array<bool, SpaceDim> per;
    per.fill(true);
    Geometry g(cube(0, 7), lo, hi, per);
    BoxArray ba = BoxArray::from_domain(g.domain(), IntVect(8));
    std::vector<ParticleLevel> layout{{g, ba, DistributionMapping::round_robin(1, 1)}};
    ParticleContainer pc(layout, Communicator::serial(), {"a"}, {"i0", "i1"});
    std::vector<RealVect> p(50);
    for (int n = 0; n < 50; ++n) p[n].fill(0.01 + 0.019 * n);
    pc.add_particles(p);
    const Real want[3] = {0.30, 0.35, 0.40};
    for (ParIter pti(pc, 0); pti.isValid(); ++pti) {
        const Long np = pti.num_particles();
        for (int d = 0; d < SpaceDim; ++d) {
            const auto ai = array_interface(pti.pos(d), np);
            CHECK(ai.shape == std::vector<Long>{np});
            CHECK(ai.typestr == (sizeof(Real) == 8 ? "<f8" : "<f4"));
            for (Long i = 0; i < np; ++i) element<Real>(ai, {i}) = want[d];
        }
        const auto x = array_interface(pti.pos(0), np);
        const auto a = array_interface(pti.real("a"), np);
        for (Long i = 0; i < np; ++i) element<Real>(a, {i}) = element<Real>(x, {i}) * element<Real>(x, {i});
        for (const char* name : {"i0", "i1"}) {
            const auto ic = array_interface(pti.int_data(name), np);
            CHECK(ic.typestr == "<i4");
            for (Long i = 0; i < np; ++i) element<int>(ic, {i}) = 12;
        }
        CHECK(array_interface(pti.idcpu(), np).typestr == "<u8");
    }
    Long seen = 0;
    for (auto& [key, t] : pc.tiles()) {
        for (Long i = 0; i < t.size(); ++i, ++seen) {
            for (int d = 0; d < SpaceDim; ++d) CHECK(t.pos(d)[i] == want[d]);
            CHECK(t.real(0)[i] == 0.30 * 0.30);
            CHECK(t.int_data(0)[i] == 12);
            CHECK(t.int_data(1)[i] == 12);
        }
    }
    CHECK(seen == 50);
}
