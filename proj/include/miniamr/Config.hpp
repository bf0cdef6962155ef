#pragma once

#include <cstdint>

#ifndef MINIAMR_SPACEDIM
#define MINIAMR_SPACEDIM 3
#endif

static_assert(MINIAMR_SPACEDIM >= 1 && MINIAMR_SPACEDIM <= 3, "MINIAMR_SPACEDIM must be 1, 2 or 3");

namespace miniamr {

inline constexpr int SpaceDim = MINIAMR_SPACEDIM;

#ifdef MINIAMR_USE_FLOAT
using Real = float;
#else
using Real = double;
#endif

using Long = std::int64_t;

} // namespace miniamr
