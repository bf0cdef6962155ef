#include <cstdio>
#include <iostream>

#include "Bench.hpp"
#include "CLI11.hpp"
#include "HeatDemo.hpp"
#include "Inputs.hpp"

using namespace miniamr;
using namespace miniamr::tools;

namespace {

void print_arena(const char* label, Arena* a) {
    const auto s = a->stats();
    std::printf("arena %-8s reserved=%zu in_use=%zu allocs=%zu frees=%zu slab_growths=%zu\n", label, s.reserved_bytes,
                s.in_use_bytes, s.alloc_calls, s.free_calls, s.slab_growths);
}

//! Applies the process-wide keys: arenas, backend, tile size.
void configure(const InputsTable& in, Backend::Kind default_kind) {
    ArenaConfig ac;
    ac.init_size = std::size_t(in.get_long("arena.init_size", (long long)ac.init_size));
    ac.kind = in.get_string("arena.kind", ac.kind);
    if (ac.kind != "pooled" && ac.kind != "system")
        throw InputsError("inputs: arena.kind must be pooled or system, got '" + ac.kind + "'");
    configure_arenas(ac);
    const auto kind = in.has("backend") ? backend_kind_from_string(in.get_string("backend")) : default_kind;
    set_default_backend(kind, in.get_int("nworkers", 0));
    if (in.has("tile_size")) set_default_tile_size(in.get_intvect("tile_size"));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"miniamr: block-structured AMR demo and microbenchmarks"};
    app.require_subcommand(1);
    bool arena_stats = false, comm_stats = false;
    std::string plot_dir;
    app.add_flag("--arena-stats", arena_stats, "Print arena statistics at exit");
    app.add_flag("--comm-stats", comm_stats, "Print message counts of the run");
    app.add_option("--plotfile-dir", plot_dir, "Directory for plotfiles (heat)");

    std::string inputs_path;
    std::vector<std::string> overrides;
    auto* heat = app.add_subcommand("heat", "Two-level heat-equation demo");
    heat->add_option("--inputs", inputs_path, "Inputs file")->check(CLI::ExistingFile);
    heat->add_option("overrides", overrides, "key=value overrides");
    heat->add_flag("--arena-stats", arena_stats, "Print arena statistics at exit");
    heat->add_flag("--comm-stats", comm_stats, "Print message counts of the run");
    heat->add_option("--plotfile-dir", plot_dir, "Directory for plotfiles");

    std::string which;
    auto* bench = app.add_subcommand("bench", "Microbenchmarks");
    bench->add_option("which", which, "triad | arena | soa")->required()->check(CLI::IsMember({"triad", "arena", "soa"}));
    bench->add_option("--inputs", inputs_path, "Inputs file")->check(CLI::ExistingFile);
    bench->add_option("overrides", overrides, "key=value overrides");
    bench->add_flag("--arena-stats", arena_stats, "Print arena statistics at exit");

    CLI11_PARSE(app, argc, argv);

    try {
        const InputsTable in = read_inputs(inputs_path, overrides);
        if (heat->parsed()) {
            configure(in, Backend::Kind::Serial);
            HeatConfig cfg = HeatConfig::from_inputs(in);
            if (!plot_dir.empty()) cfg.plotfile_dir = plot_dir;
            const HeatResult r = run_heat_demo(cfg, default_backend());
            std::printf("heat: levels=%d steps=%d dt=%.6g time=%.6g\n", r.finest_level + 1, r.nsteps, r.dt, r.time);
            std::printf("heat: linf=%.6e l2=%.6e\n", r.linf, r.l2);
            std::printf("heat: integral initial=%.17g final=%.17g rel_change=%.3e\n", r.integral_initial,
                        r.integral_final, std::abs(r.integral_final - r.integral_initial) / std::abs(r.integral_initial));
            for (const auto& p : r.plotfiles) std::printf("heat: wrote %s\n", p.c_str());
            if (comm_stats) std::cout << "comm: total_messages=" << r.comm.total_messages()
                                      << " total_bytes=" << r.comm.total_bytes()
                                      << " max_per_pair=" << r.comm.max_per_pair() << '\n'
                                      << r.comm.str() << '\n';
        } else {
            configure(in, which == "soa" ? Backend::Kind::CpuParallel : Backend::Kind::Serial);
            BenchReport rep;
            if (which == "triad") rep = bench_triad(triad_config(in), default_backend());
            else if (which == "arena") rep = bench_arena(arena_bench_config(in));
            else rep = bench_soa_vs_aos(soa_bench_config(in), default_backend());
            std::cout << rep.text();
            if (!rep.checked) return 2;
        }
        if (arena_stats) {
            print_arena("default", The_Arena());
            print_arena("comm", The_Comm_Arena());
            print_arena("async", The_Async_Arena());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "miniamr: %s\n", e.what());
        return 1;
    }
    return 0;
}
