#pragma once

#include <string>
#include <utility>
#include <vector>

#include "Inputs.hpp"
#include "miniamr/Backend.hpp"

namespace miniamr::tools {

//! Outcome of one benchmark. Timings are medians in seconds and are only
//! filled in when the correctness check passed.
struct BenchReport {
    std::string name;
    bool checked = false;
    std::string check_failure;
    std::vector<std::pair<std::string, double>> values;

    double value(const std::string& key) const;
    std::string text() const;
};

//! x = y + 2 z over boxes_per_side^SpaceDim boxes of box_size^SpaceDim cells,
//! fused (one launch) against one launch per box.
struct TriadConfig {
    int boxes_per_side = 8;
    int box_size = 32;
    int reps = 5;
};

//! cycles x (allocate cells doubles, touch, free) on a pooled arena and on
//! the system allocator.
struct ArenaBenchConfig {
    long long cells = 256LL * 256 * 256;
    int cycles = 10000;
    int reps = 5;
    //! Elements written and read back per cycle, spread over the block.
    int touches = 64;
};

//! Position-only sweep over nparticles in SoA columns and in AoS records.
struct SoaBenchConfig {
    long long nparticles = 1 << 20;
    int sweeps = 10;
    int reps = 5;
};

TriadConfig triad_config(const InputsTable& in);
ArenaBenchConfig arena_bench_config(const InputsTable& in);
SoaBenchConfig soa_bench_config(const InputsTable& in);

BenchReport bench_triad(const TriadConfig& cfg, Backend& be);
BenchReport bench_arena(const ArenaBenchConfig& cfg);
BenchReport bench_soa_vs_aos(const SoaBenchConfig& cfg, Backend& be);

} // namespace miniamr::tools
