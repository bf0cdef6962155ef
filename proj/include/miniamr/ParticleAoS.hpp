#pragma once

#include <cstdint>
#include <vector>

#include "miniamr/Particles.hpp"

namespace miniamr {

//! Record of the legacy layout: positions and id word stored together.
struct AoSRecord {
    Real pos[SpaceDim];
    std::uint64_t idcpu;
};

//! Reference container with the legacy layout: an array of records plus
//! separate columns for the remaining components. Used for benchmarking.
struct AoSRefTile {
    std::vector<AoSRecord> records;
    std::vector<std::vector<Real>> reals;
    std::vector<std::vector<int>> ints;

    Long size() const noexcept { return Long(records.size()); }
};

AoSRefTile soa_to_aos_ref(const ParticleTile& t);
ParticleTile aos_ref_to_soa(const AoSRefTile& a, Arena* arena = The_Arena());

} // namespace miniamr
