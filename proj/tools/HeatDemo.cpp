#include "HeatDemo.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "Plotfile.hpp"

namespace miniamr::tools {

HeatConfig HeatConfig::from_inputs(const InputsTable& in) {
    HeatConfig c;
    c.n_cell = in.get_int("amr.n_cell", c.n_cell);
    c.max_level = in.get_int("amr.max_level", c.max_level);
    c.ref_ratio = in.get_int("amr.ref_ratio", c.ref_ratio);
    c.blocking_factor = in.get_int("amr.blocking_factor", c.blocking_factor);
    c.max_grid_size = in.get_int("amr.max_grid_size", c.max_grid_size);
    c.diffusivity = in.get_real("demo.diffusivity", c.diffusivity);
    c.sigma0 = in.get_real("demo.sigma0", c.sigma0);
    c.final_time = in.get_real("demo.final_time", c.final_time);
    c.cfl = in.get_real("demo.cfl", c.cfl);
    c.dt = in.get_real("demo.dt", c.dt);
    c.tag_threshold = in.get_real("demo.tag_threshold", c.tag_threshold);
    c.plot_int = in.get_int("demo.plot_int", c.plot_int);
    c.nranks = in.get_int("nranks", c.nranks);
    c.tile_size = in.get_intvect("tile_size", c.tile_size);
    const std::string interp = in.get_string("demo.interp", "linear");
    if (interp == "linear") c.interp = InterpScheme::Linear;
    else if (interp == "pc") c.interp = InterpScheme::PiecewiseConstant;
    else throw InputsError("inputs: demo.interp must be linear or pc, got '" + interp + "'");
    return c;
}

double heat_exact(const RealVect& x, double t, const HeatConfig& cfg) {
    const double s2 = cfg.sigma0 * cfg.sigma0 + 2 * cfg.diffusivity * t;
    double r2 = 0;
    for (int d = 0; d < SpaceDim; ++d) r2 += (x[d] - 0.5) * (x[d] - 0.5);
    return std::pow(cfg.sigma0 * cfg.sigma0 / s2, 0.5 * SpaceDim) * std::exp(-r2 / (2 * s2));
}

namespace {

void set_exact(MultiFab& u, const Geometry& g, double t, const HeatConfig& cfg) {
    auto a = u.arrays();
    parallel_for(u.backend(), u, [&, a](int li, int i, int j, int k) {
        const int ijk[3] = {i, j, k};
        RealVect x;
        for (int d = 0; d < SpaceDim; ++d) x[d] = g.cell_center(d, ijk[d]);
        a[li](i, j, k) = Real(heat_exact(x, t, cfg));
    });
}

//! dst = src + dt * D * laplacian(src) on valid cells, one launch over tiles.
void diffuse(MultiFab& dst, const MultiFab& src, const Geometry& g, double dt, const HeatConfig& cfg) {
    const auto tiles = mfiter_tiles(src, cfg.tile_size);
    std::vector<Box> boxes;
    std::vector<int> owner;
    for (const auto& t : tiles) {
        boxes.push_back(t.tilebox);
        owner.push_back(t.local_index);
    }
    auto in = src.const_arrays();
    auto out = dst.arrays();
    Real coef[3] = {0, 0, 0};
    for (int d = 0; d < SpaceDim; ++d) coef[d] = Real(dt * cfg.diffusivity / (g.cell_size(d) * g.cell_size(d)));
    parallel_for(src.backend(), std::span<const Box>(boxes), [&](int b, int i, int j, int k) {
        const auto& u = in[owner[b]];
        const Real c = u(i, j, k);
        Real lap = coef[0] * (u(i + 1, j, k) - 2 * c + u(i - 1, j, k));
        if constexpr (SpaceDim > 1) lap += coef[1] * (u(i, j + 1, k) - 2 * c + u(i, j - 1, k));
        if constexpr (SpaceDim > 2) lap += coef[2] * (u(i, j, k + 1) - 2 * c + u(i, j, k - 1));
        out[owner[b]](i, j, k) = c + lap;
    });
}

//! One coarse face slab just outside a fine box, in level-0 index space.
struct FaceSlab {
    int li;
    int dir;
    int side; // -1: below the fine box, +1: above
    Box cells;
    std::vector<std::uint8_t> uncovered;
};

std::vector<FaceSlab> face_slabs(const BoxArray& cba, const MultiFab& holder, const Geometry& g0) {
    std::vector<FaceSlab> out;
    for (int li = 0; li < holder.local_size(); ++li) {
        const Box& b = holder.validbox(li);
        for (int d = 0; d < SpaceDim; ++d) {
            for (int side : {-1, 1}) {
                IntVect lo = b.lo(), hi = b.hi();
                if (side < 0) hi[d] = lo[d] = b.lo(d) - 1;
                else lo[d] = hi[d] = b.hi(d) + 1;
                FaceSlab s{li, d, side, Box(lo, hi), {}};
                s.uncovered.resize(std::size_t(s.cells.num_pts()));
                for (Long o = 0; o < s.cells.num_pts(); ++o) {
                    IntVect c = s.cells.at_offset(o);
                    for (int a = 0; a < SpaceDim; ++a) {
                        const int n = g0.domain().length(a);
                        c[a] = ((c[a] % n) + n) % n;
                    }
                    s.uncovered[o] = cba.covers(Box(c, c)) ? 0 : 1;
                }
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

struct Sums {
    double integral, linf, l2, linf_region;
};

} // namespace

HeatResult run_heat_demo(const HeatConfig& cfg, Backend& be) {
    if (cfg.n_cell < 1) throw HeatError("heat: amr.n_cell must be positive");
    if (cfg.max_level < 0 || cfg.max_level > 1) throw HeatError("heat: amr.max_level must be 0 or 1");
    if (cfg.diffusivity < 0) throw HeatError("heat: demo.diffusivity must be non-negative");
    if (cfg.final_time <= 0) throw HeatError("heat: demo.final_time must be positive");
    const double sigma_end = std::sqrt(cfg.sigma0 * cfg.sigma0 + 2 * cfg.diffusivity * cfg.final_time);
    if (6 * sigma_end > 0.5)
        throw HeatError("heat: the Gaussian spreads to within 6 sigma of the boundary (sigma = " +
                        std::to_string(sigma_end) + "); the free-space reference does not apply");

    RealVect plo{}, phi{};
    phi.fill(1);
    std::array<bool, SpaceDim> per;
    per.fill(true);
    const Geometry g0(Box(IntVect(0), IntVect(cfg.n_cell - 1)), plo, phi, per);
    AmrConfig acfg;
    acfg.max_level = cfg.max_level;
    acfg.ref_ratio = cfg.ref_ratio;
    acfg.blocking_factor = cfg.blocking_factor;
    acfg.max_grid_size = cfg.max_grid_size;

    // Time step from the finest possible spacing; checked once refinement is known.
    const int finest_possible_ratio = cfg.max_level > 0 ? cfg.ref_ratio : 1;
    const double h_fine = 1.0 / (double(cfg.n_cell) * finest_possible_ratio);
    const double limit = cfg.diffusivity > 0 ? h_fine * h_fine / (2 * cfg.diffusivity * SpaceDim) : INFINITY;
    double dt = cfg.dt > 0 ? cfg.dt : (std::isfinite(limit) ? cfg.cfl * limit : cfg.final_time / 10);
    if (dt > limit)
        throw HeatError("heat: dt = " + std::to_string(dt) + " violates the stability limit h^2/(2 D ndim) = " +
                        std::to_string(limit));
    const int nsteps = std::max(1, int(std::ceil(cfg.final_time / dt - 1e-9)));
    dt = cfg.final_time / nsteps;

    Runtime rt(cfg.nranks, be);
    auto results = rt.run([&](Communicator& comm) {
        HeatResult res;
        res.nsteps = nsteps;
        res.dt = dt;
        AmrMesh mesh(g0, acfg, cfg.nranks);
        mesh.make_base_level();
        MultiFab u0(mesh.box_array(0), mesh.distribution_map(0), 1, 1, g0, comm);
        MultiFab n0(mesh.box_array(0), mesh.distribution_map(0), 1, 1, g0, comm);
        set_exact(u0, g0, 0, cfg);

        if (cfg.max_level > 0) {
            TagField tags(mesh.box_array(0), mesh.distribution_map(0), comm);
            const Real thr = Real(cfg.tag_threshold);
            tags.tag_where(u0, [thr](const auto& v, int i, int j, int k) { return std::abs(v(i, j, k)) > thr; });
            BoxArray fba = mesh.regrid(0, tags);
            if (!fba.empty()) mesh.set_level(1, fba);
        }
        const bool two = mesh.finest_level() == 1;
        const int r = cfg.ref_ratio;
        res.finest_level = mesh.finest_level();
        const Geometry g1 = two ? mesh.geom(1) : g0;

        std::optional<MultiFab> u1, n1, cstage, flux;
        BoxArray cba;
        std::vector<FaceSlab> slabs;
        if (two) {
            u1.emplace(mesh.box_array(1), mesh.distribution_map(1), 1, 1, g1, comm);
            n1.emplace(mesh.box_array(1), mesh.distribution_map(1), 1, 1, g1, comm);
            set_exact(*u1, g1, 0, cfg);
            average_down(*u1, u0, r);
            cba = mesh.box_array(1).coarsen(r);
            cstage.emplace(cba, mesh.distribution_map(1), 1, 1, std::nullopt, comm);
            flux.emplace(cba, mesh.distribution_map(1), 1, 1, std::nullopt, comm);
            slabs = face_slabs(cba, *cstage, g0);
            res.refined_region = cba.boxes();
        }

        // Coarse cells hidden under the fine level, per local coarse fab.
        std::vector<std::vector<std::uint8_t>> covered(std::size_t(u0.local_size()));
        for (int li = 0; li < u0.local_size(); ++li) {
            const Box& b = u0.validbox(li);
            covered[li].assign(std::size_t(b.num_pts()), 0);
            if (!two) continue;
            for (const Box& f : cba.boxes()) {
                const Box x = intersect(b, f);
                for (Long o = 0; o < x.num_pts(); ++o) covered[li][b.index(x.at_offset(o))] = 1;
            }
        }
        BoxArray region_ba = cfg.error_region.empty() ? BoxArray() : BoxArray(cfg.error_region, false);

        auto measure = [&](double t) {
            Sums s{0, 0, 0, 0};
            const double v0 = std::pow(1.0 / cfg.n_cell, SpaceDim);
            auto in_region = [&](const IntVect& c0) { return !region_ba.empty() && region_ba.covers(Box(c0, c0)); };
            auto visit = [&](const MultiFab& mf, const Geometry& g, int ratio, const std::vector<std::vector<std::uint8_t>>* skip) {
                const double vol = v0 / std::pow(double(ratio), SpaceDim);
                for (int li = 0; li < mf.local_size(); ++li) {
                    const Box& b = mf.validbox(li);
                    auto a = mf.const_array(li);
                    for (Long o = 0; o < b.num_pts(); ++o) {
                        const IntVect c = b.at_offset(o);
                        const auto d3 = c.dim3();
                        const double v = a(d3[0], d3[1], d3[2]);
                        if (ratio == 1) s.integral += v * vol;
                        if (skip && (*skip)[li][o]) continue;
                        RealVect x;
                        for (int d = 0; d < SpaceDim; ++d) x[d] = g.cell_center(d, c[d]);
                        const double e = std::abs(v - heat_exact(x, t, cfg));
                        s.linf = std::max(s.linf, e);
                        s.l2 += e * e * vol;
                        IntVect c0;
                        for (int d = 0; d < SpaceDim; ++d) c0[d] = floor_div(c[d], ratio);
                        if (in_region(c0)) s.linf_region = std::max(s.linf_region, e);
                    }
                }
            };
            visit(u0, g0, 1, two ? &covered : nullptr);
            if (two) visit(*u1, g1, r, nullptr);
            auto [sum, l2] = global_reduce(comm, TypeList<ReduceOpSum, ReduceOpSum>{}, std::make_tuple(s.integral, s.l2));
            auto [linf, lreg] = global_reduce(comm, TypeList<ReduceOpMax, ReduceOpMax>{}, std::make_tuple(s.linf, s.linf_region));
            return Sums{sum, linf, std::sqrt(l2), lreg};
        };

        auto plot = [&](int step, double t) {
            if (cfg.plotfile_dir.empty()) return;
            char name[32];
            std::snprintf(name, sizeof name, "plt%05d", step);
            const std::string path = (std::filesystem::path(cfg.plotfile_dir) / name).string();
            if (comm.rank() == 0) std::filesystem::create_directories(cfg.plotfile_dir);
            std::vector<const MultiFab*> levels{&u0};
            std::vector<int> ratios{1};
            if (two) {
                levels.push_back(&*u1);
                ratios.push_back(r);
            }
            write_plotfile(path, levels, ratios, {"phi"}, t);
            res.plotfiles.push_back(path);
        };

        res.integral_initial = measure(0).integral;
        plot(0, 0);
        const Real hc = Real(g0.cell_size(0));
        const Real hf = Real(g1.cell_size(0));
        const Real D = Real(cfg.diffusivity);
        double t = 0;
        for (int step = 1; step <= nsteps; ++step) {
            fill_boundary(u0, g0);
            if (two) fill_patch(*u1, u0, g1, g0, r, cfg.interp);
            diffuse(n0, u0, g0, dt, cfg);
            if (two) {
                diffuse(*n1, *u1, g1, dt, cfg);
                // Coarse fluxes at coarse/fine faces become the mean of the fine fluxes.
                parallel_copy(*cstage, u0, 0, 0, 1, IntVect(0), IntVect(1), g0);
                flux->setval(0);
                auto cv = cstage->const_arrays();
                auto fv = u1->const_arrays();
                auto tv = flux->arrays();
                std::vector<Box> boxes;
                for (const auto& s : slabs) boxes.push_back(s.cells);
                const Real scale = Real(dt) / hc;
                parallel_for(be, std::span<const Box>(boxes), [&](int b, int i, int j, int k) {
                    const FaceSlab& s = slabs[b];
                    const int J[3] = {i, j, k};
                    IntVect Jv;
                    for (int d = 0; d < SpaceDim; ++d) Jv[d] = J[d];
                    if (!s.uncovered[s.cells.index(Jv)]) return;
                    int I[3] = {i, j, k};
                    I[s.dir] -= s.side;
                    const Real uJ = cv[s.li](J[0], J[1], J[2]);
                    const Real uI = cv[s.li](I[0], I[1], I[2]);
                    // Fluxes oriented along +dir.
                    const Real fc = s.side < 0 ? -D * (uI - uJ) / hc : -D * (uJ - uI) / hc;
                    int f_in = s.side < 0 ? I[s.dir] * r : I[s.dir] * r + r - 1;
                    int f_out = f_in + s.side;
                    Real ff = 0;
                    int nface = 0;
                    int lo[3], hi[3];
                    for (int d = 0; d < 3; ++d) {
                        lo[d] = d < SpaceDim ? I[d] * r : 0;
                        hi[d] = d < SpaceDim ? I[d] * r + r - 1 : 0;
                    }
                    lo[s.dir] = hi[s.dir] = 0;
                    for (int c = lo[2]; c <= hi[2]; ++c)
                        for (int bb = lo[1]; bb <= hi[1]; ++bb)
                            for (int a = lo[0]; a <= hi[0]; ++a) {
                                int pin[3] = {a, bb, c}, pout[3] = {a, bb, c};
                                pin[s.dir] = f_in;
                                pout[s.dir] = f_out;
                                const Real vin = fv[s.li](pin[0], pin[1], pin[2]);
                                const Real vout = fv[s.li](pout[0], pout[1], pout[2]);
                                ff += s.side < 0 ? -D * (vin - vout) / hf : -D * (vout - vin) / hf;
                                ++nface;
                            }
                    ff /= Real(nface);
                    tv[s.li](J[0], J[1], J[2]) = s.side < 0 ? scale * (fc - ff) : scale * (ff - fc);
                });
                parallel_copy(n0, *flux, 0, 0, 1, IntVect(1), IntVect(0), g0, CopyOp::Add);
                average_down(*n1, n0, r);
                std::swap(*u1, *n1);
            }
            std::swap(u0, n0);
            t = step * dt;
            if (cfg.plot_int > 0 && step % cfg.plot_int == 0 && step != nsteps) plot(step, t);
        }
        const Sums end = measure(t);
        res.time = t;
        res.linf = end.linf;
        res.l2 = end.l2;
        res.linf_region = end.linf_region;
        res.integral_final = end.integral;
        plot(nsteps, t);
        return res;
    });
    HeatResult out = std::move(results[0]);
    out.comm = rt.stats();
    return out;
}

} // namespace miniamr::tools
