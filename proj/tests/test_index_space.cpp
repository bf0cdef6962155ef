#include "doctest.h"

#include <random>

#include "miniamr/Geometry.hpp"
#include "test_util.hpp"

using namespace miniamr;
using namespace miniamr::test;

TEST_CASE("intersect") {
    CHECK(intersect(cube(0, 3), cube(2, 5)) == cube(2, 3));
    CHECK(intersect(cube(0, 3), cube(0, 3)) == cube(0, 3));
    Box e = intersect(line(0, 3), line(5, 7));
    CHECK(e.empty());
    CHECK(e.lo() == IntVect(0));
    CHECK(e.hi() == IntVect(-1));
    CHECK_THROWS_AS(intersect(cube(0, 3), Box(IntVect(0), IntVect(3), IndexType::node())), BoxError);
}

TEST_CASE("grow") {
    CHECK(grow(rect(0, 0, 7, 7), IntVect(2)).lo() == IntVect(-2));
    CHECK(grow(cube(0, 7), 2) == cube(-2, 9));
    CHECK(grow(cube(0, 7), 0) == cube(0, 7));
    Box g = grow(line(0, 1), axis0(-1));
    CHECK(g.empty());
    CHECK(g.lo(0) == 1);
    CHECK(g.hi(0) == 0);
    CHECK(g.num_pts() == 0);
}

TEST_CASE("refine and coarsen") {
    CHECK(refine(line(0, 7), 2).hi(0) == 15);
    CHECK(refine(line(0, 7), 2).lo(0) == 0);
    Box c = coarsen(line(1, 14), 2);
    CHECK(c.lo(0) == 0);
    CHECK(c.hi(0) == 7);
    CHECK(coarsen(line(-3, -1), 2).lo(0) == -2);
    CHECK(coarsen(line(-3, -1), 2).hi(0) == -1);
    CHECK_THROWS_AS(refine(cube(0, 1), 0), BoxError);
    CHECK_THROWS_AS(coarsen(cube(0, 1), 0), BoxError);
}

TEST_CASE("convert") {
    Box n = convert(line(0, 7), IndexType::node());
    CHECK(n.hi(0) == 8);
    CHECK(n.ixtype() == IndexType::node());
    CHECK(convert(line(0, 7), IndexType::cell()) == line(0, 7));
    CHECK(convert(convert(cube(-2, 5), IndexType::node()), IndexType::cell()) == cube(-2, 5));
    Box f = convert(cube(0, 3), IndexType::face(0));
    CHECK(f.hi(0) == 4);
    CHECK(f.ixtype().mixed() == (SpaceDim > 1));
}

TEST_CASE("num_pts") {
    CHECK(cube(0, 31).num_pts() == (SpaceDim == 3 ? 32768 : SpaceDim == 2 ? 1024 : 32));
    CHECK(Box().num_pts() == 0);
    CHECK(rect(-2, -2, 9, 9).num_pts() == (SpaceDim > 1 ? 144 : 12));
}

TEST_CASE("text rendering") {
    Box b(IntVect(0), IntVect(7));
    std::string s = b.str();
    if constexpr (SpaceDim == 3) CHECK(s == "(0,0,0)(7,7,7)(0,0,0)");
}

namespace {

Geometry periodic_x_geom(int n) {
    RealVect lo{}, hi{};
    for (int d = 0; d < SpaceDim; ++d) hi[d] = 1;
    std::array<bool, SpaceDim> per{};
    per[0] = true;
    return Geometry(line(0, n - 1), lo, hi, per);
}

} // namespace

TEST_CASE("periodic shift images") {
    Geometry g = periodic_x_geom(8);
    auto imgs = periodic_shift_images(line(-1, 0), g);
    // Oracle: enumerate shift factors -1, 0, 1 along x.
    std::vector<PeriodicImage> expect;
    for (int f = -1; f <= 1; ++f) {
        Box s = shift(line(-1, 0), axis0(8 * f));
        if (s.intersects(g.domain())) expect.push_back({s, axis0(8 * f)});
    }
    REQUIRE(imgs.size() == 2);
    CHECK(imgs == expect);
    CHECK(imgs[0].box == line(-1, 0));
    CHECK(imgs[1].box == line(7, 8));
    CHECK(imgs[1].shift == axis0(8));

    auto interior = periodic_shift_images(line(2, 4), g);
    REQUIRE(interior.size() == 1);
    CHECK(interior[0].shift == IntVect(0));

    Geometry np(line(0, 7), RealVect{}, [] {
        RealVect h{};
        h.fill(1);
        return h;
    }(), std::array<bool, SpaceDim>{});
    auto single = periodic_shift_images(line(-1, 0), np);
    REQUIRE(single.size() == 1);
    CHECK(single[0].shift == IntVect(0));
}

TEST_CASE("geometry cell size") {
    Geometry g = periodic_x_geom(8);
    CHECK(g.cell_size(0) == doctest::Approx(0.125));
    CHECK(g.period()[0] == 8);
    CHECK(g.cell_index(0, 0.99) == 7);
    CHECK_THROWS_AS(Geometry(line(0, 7), RealVect{}, RealVect{}, std::array<bool, SpaceDim>{}), BoxError);
}

TEST_CASE("chop covers the box") {
    IntVect ms(64);
    ms[0] = 4;
    auto pieces = chop(line(0, 9), ms);
    REQUIRE(pieces.size() == 3);
    CHECK(pieces[2] == line(8, 9));
}

TEST_CASE("box algebra properties") {
    std::mt19937 rng(12345);
    for (int t = 0; t < 2000; ++t) {
        Box a = random_box(rng, 10, 8), b = random_box(rng, 10, 8), c = random_box(rng, 10, 8);
        Box ab = intersect(a, b);
        CHECK(ab == intersect(b, a));
        CHECK(intersect(ab, c) == intersect(a, intersect(b, c)));
        CHECK(a.contains(ab));
        CHECK(b.contains(ab));

        std::uniform_int_distribution<int> gn(-2, 3);
        IntVect n;
        for (int d = 0; d < SpaceDim; ++d) n[d] = gn(rng);
        Box g = grow(a, n);
        if (g.ok()) CHECK(grow(g, -n) == a);

        for (int r = 1; r <= 4; ++r) {
            CHECK(coarsen(refine(a, r), r) == a);
            Long rd = 1;
            for (int d = 0; d < SpaceDim; ++d) rd *= r;
            CHECK(refine(a, r).num_pts() == a.num_pts() * rd);
        }
        // Fortran offset law round trip.
        std::uniform_int_distribution<Long> off(0, a.num_pts() - 1);
        Long o = off(rng);
        CHECK(a.index(a.at_offset(o)) == o);
    }
}
