#include "Bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <random>
#include <sstream>

#include "miniamr/Comm.hpp"
#include "miniamr/MultiFab.hpp"
#include "miniamr/ParticleAoS.hpp"

namespace miniamr::tools {

double BenchReport::value(const std::string& key) const {
    for (const auto& [k, v] : values)
        if (k == key) return v;
    throw std::out_of_range("bench report '" + name + "' has no value '" + key + "'");
}

std::string BenchReport::text() const {
    std::ostringstream out;
    out << name << ": " << (checked ? "check passed" : "check FAILED: " + check_failure) << '\n';
    for (const auto& [k, v] : values) out << "  " << k << " = " << v << '\n';
    return out.str();
}

TriadConfig triad_config(const InputsTable& in) {
    TriadConfig c;
    c.boxes_per_side = in.get_int("bench.triad.boxes_per_side", c.boxes_per_side);
    c.box_size = in.get_int("bench.triad.box_size", c.box_size);
    c.reps = in.get_int("bench.reps", c.reps);
    return c;
}

ArenaBenchConfig arena_bench_config(const InputsTable& in) {
    ArenaBenchConfig c;
    c.cells = in.get_long("bench.arena.cells", c.cells);
    c.cycles = in.get_int("bench.arena.cycles", c.cycles);
    c.touches = in.get_int("bench.arena.touches", c.touches);
    c.reps = in.get_int("bench.reps", c.reps);
    return c;
}

SoaBenchConfig soa_bench_config(const InputsTable& in) {
    SoaBenchConfig c;
    c.nparticles = in.get_long("bench.soa.particles", c.nparticles);
    c.sweeps = in.get_int("bench.soa.sweeps", c.sweeps);
    c.reps = in.get_int("bench.reps", c.reps);
    return c;
}

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double seconds(F&& f) {
    const auto t0 = Clock::now();
    f();
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_reps(int reps) {
    if (reps < 1) throw std::invalid_argument("bench: reps must be >= 1");
}

} // namespace

BenchReport bench_triad(const TriadConfig& cfg, Backend& be) {
    check_reps(cfg.reps);
    BenchReport rep{"triad", false, {}, {}};
    Bus bus(1);
    Communicator comm(0, bus, be);
    const Box domain(IntVect(0), IntVect(cfg.boxes_per_side * cfg.box_size - 1));
    const BoxArray ba = BoxArray::from_domain(domain, IntVect(cfg.box_size));
    const auto dm = DistributionMapping::round_robin(ba.size(), 1);
    MultiFab x(ba, dm, 1, 0, std::nullopt, comm), y(ba, dm, 1, 0, std::nullopt, comm),
        z(ba, dm, 1, 0, std::nullopt, comm), per_box(ba, dm, 1, 0, std::nullopt, comm);
    {
        auto yv = y.arrays();
        auto zv = z.arrays();
        parallel_for(be, y, [&](int li, int i, int j, int k) {
            yv[li](i, j, k) = Real(0.001) * i + Real(0.01) * j + Real(0.1) * k;
            zv[li](i, j, k) = Real(1) / Real(1 + i + j + k);
        });
    }
    auto yv = y.const_arrays();
    auto zv = z.const_arrays();
    auto fused = [&] {
        auto xv = x.arrays();
        parallel_for(be, x, [&](int li, int i, int j, int k) { xv[li](i, j, k) = yv[li](i, j, k) + 2 * zv[li](i, j, k); });
    };
    auto boxwise = [&] {
        for (int li = 0; li < per_box.local_size(); ++li) {
            auto pv = per_box.array(li);
            const auto& a = yv[li];
            const auto& b = zv[li];
            parallel_for(be, per_box.validbox(li), [&](int i, int j, int k) { pv(i, j, k) = a(i, j, k) + 2 * b(i, j, k); });
        }
    };

    Long l0 = be.launch_count();
    fused();
    const Long fused_launches = be.launch_count() - l0;
    l0 = be.launch_count();
    boxwise();
    const Long box_launches = be.launch_count() - l0;

    // Serial oracle over every cell.
    for (int li = 0; li < x.local_size() && rep.check_failure.empty(); ++li) {
        const Box& b = x.validbox(li);
        auto xv = x.const_array(li);
        auto pv = per_box.const_array(li);
        for (Long o = 0; o < b.num_pts(); ++o) {
            const auto c = b.at_offset(o).dim3();
            const Real want = yv[li](c[0], c[1], c[2]) + 2 * zv[li](c[0], c[1], c[2]);
            const Real f = xv(c[0], c[1], c[2]), p = pv(c[0], c[1], c[2]);
            if (std::memcmp(&f, &want, sizeof(Real)) != 0 || std::memcmp(&p, &want, sizeof(Real)) != 0) {
                rep.check_failure = "mismatch at " + Box(b.at_offset(o), b.at_offset(o)).str();
                break;
            }
        }
    }
    rep.values.emplace_back("boxes", double(ba.size()));
    rep.values.emplace_back("cells", double(domain.num_pts()));
    rep.values.emplace_back("fused_launches", double(fused_launches));
    rep.values.emplace_back("per_box_launches", double(box_launches));
    if (!rep.check_failure.empty()) return rep;
    rep.checked = true;

    std::vector<double> tf, tb;
    for (int r = 0; r < cfg.reps; ++r) {
        tf.push_back(seconds(fused));
        tb.push_back(seconds(boxwise));
    }
    rep.values.emplace_back("fused_seconds", median(tf));
    rep.values.emplace_back("per_box_seconds", median(tb));
    return rep;
}

BenchReport bench_arena(const ArenaBenchConfig& cfg) {
    check_reps(cfg.reps);
    if (cfg.cells < 1 || cfg.cycles < 1 || cfg.touches < 1) throw std::invalid_argument("bench arena: sizes must be positive");
    BenchReport rep{"arena", false, {}, {}};
    const std::size_t nbytes = std::size_t(cfg.cells) * sizeof(Real);
    PooledArena pooled(nbytes + (std::size_t(1) << 20), "bench-pooled");
    SystemArena sys("bench-system");
    const Long stride = std::max<Long>(1, cfg.cells / cfg.touches);

    auto cycle = [&](Arena& a) {
        Real* p = static_cast<Real*>(a.alloc(nbytes));
        Real sum = 0;
        Long n = 0;
        for (Long i = 0; i < cfg.cells; i += stride, ++n) p[i] = Real(i % 1000);
        for (Long i = 0; i < cfg.cells; i += stride) sum += p[i];
        a.free(p);
        return std::make_pair(sum, n);
    };
    // Cross-check: both paths see their own writes.
    Real want = 0;
    for (Long i = 0; i < cfg.cells; i += stride) want += Real(i % 1000);
    for (Arena* a : {static_cast<Arena*>(&pooled), static_cast<Arena*>(&sys)}) {
        if (cycle(*a).first != want) {
            rep.check_failure = a->name() + " read back wrong values";
            return rep;
        }
    }
    rep.checked = true;

    auto run = [&](Arena& a) {
        return seconds([&] {
            volatile Real sink = 0;
            for (int c = 0; c < cfg.cycles; ++c) sink = sink + cycle(a).first;
        });
    };
    std::vector<double> tp, ts;
    for (int r = 0; r < cfg.reps; ++r) {
        tp.push_back(run(pooled));
        ts.push_back(run(sys));
    }
    const double mp = median(tp), ms = median(ts);
    rep.values.emplace_back("bytes_per_cycle", double(nbytes));
    rep.values.emplace_back("cycles", cfg.cycles);
    rep.values.emplace_back("pooled_seconds", mp);
    rep.values.emplace_back("system_seconds", ms);
    rep.values.emplace_back("pooled_seconds_per_cycle", mp / cfg.cycles);
    rep.values.emplace_back("system_seconds_per_cycle", ms / cfg.cycles);
    rep.values.emplace_back("speedup", ms / mp);
    rep.values.emplace_back("pooled_slab_growths", double(pooled.stats().slab_growths));
    return rep;
}

BenchReport bench_soa_vs_aos(const SoaBenchConfig& cfg, Backend& be) {
    check_reps(cfg.reps);
    if (cfg.nparticles < 1 || cfg.sweeps < 1) throw std::invalid_argument("bench soa: sizes must be positive");
    BenchReport rep{"soa", false, {}, {}};
    const Long n = cfg.nparticles;
    ParticleTile soa(0, 0);
    soa.resize(n);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<Real> u(0, 1);
    for (Long i = 0; i < n; ++i) {
        for (int d = 0; d < SpaceDim; ++d) soa.pos(d)[i] = u(rng);
        soa.idcpu()[i] = ParticleId::make(0, std::uint64_t(i) + 1).word();
    }
    AoSRefTile aos = soa_to_aos_ref(soa);

    Real shift[SpaceDim];
    for (int d = 0; d < SpaceDim; ++d) shift[d] = Real(1e-7) * (d + 1);
    Real* cols[SpaceDim];
    for (int d = 0; d < SpaceDim; ++d) cols[d] = soa.pos(d);
    AoSRecord* recs = aos.records.data();

    auto sweep_soa = [&] {
        parallel_for(be, n, [&](Long i) {
            for (int d = 0; d < SpaceDim; ++d) cols[d][i] += shift[d];
        });
    };
    auto sweep_aos = [&] {
        parallel_for(be, n, [&](Long i) {
            AoSRecord r = recs[i];
            for (int d = 0; d < SpaceDim; ++d) r.pos[d] += shift[d];
            recs[i] = r;
        });
    };
    auto same = [&] {
        for (Long i = 0; i < n; ++i)
            for (int d = 0; d < SpaceDim; ++d)
                if (std::memcmp(&cols[d][i], &recs[i].pos[d], sizeof(Real)) != 0) return false;
        return true;
    };
    sweep_soa();
    sweep_aos();
    if (!same()) {
        rep.check_failure = "SoA and AoS positions differ after one sweep";
        return rep;
    }

    std::vector<double> ts, ta;
    for (int r = 0; r < cfg.reps; ++r) {
        ts.push_back(seconds([&] {
            for (int s = 0; s < cfg.sweeps; ++s) sweep_soa();
        }));
        ta.push_back(seconds([&] {
            for (int s = 0; s < cfg.sweeps; ++s) sweep_aos();
        }));
    }
    if (!same()) {
        rep.check_failure = "SoA and AoS positions differ after the timed sweeps";
        return rep;
    }
    rep.checked = true;
    const double ms = median(ts) / cfg.sweeps, ma = median(ta) / cfg.sweeps;
    rep.values.emplace_back("particles", double(n));
    rep.values.emplace_back("aos_record_bytes", double(sizeof(AoSRecord)));
    rep.values.emplace_back("soa_bytes_per_particle", double(SpaceDim * sizeof(Real)));
    rep.values.emplace_back("workers", double(be.kind() == Backend::Kind::Serial ? 1 : be.nworkers()));
    rep.values.emplace_back("soa_seconds_per_sweep", ms);
    rep.values.emplace_back("aos_seconds_per_sweep", ma);
    rep.values.emplace_back("speedup", ma / ms);
    return rep;
}

} // namespace miniamr::tools
