#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "miniamr/MultiFab.hpp"

namespace miniamr::tools {

class PlotfileError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PlotLevel {
    //! Refinement ratio to the next coarser level (1 on level 0).
    int ref_ratio = 1;
    std::vector<Box> boxes;
    //! Per box: components in order, each Fortran-ordered over the box.
    std::vector<std::vector<double>> data;
};

//! Snapshot of a hierarchy. On disk:
//!   MINIAMR-PLT v1
//!   ndim ncomp nlevels time
//!   name0 name1 ...
//!   per level: `nboxes ref_ratio`, then one `lo... hi...` line per box
//! followed by, per box in level order, an 8-byte little-endian byte count
//! and that many bytes of little-endian doubles.
struct Plotfile {
    int ndim = SpaceDim;
    double time = 0;
    std::vector<std::string> names;
    std::vector<PlotLevel> levels;
};

std::string encode_plotfile(const Plotfile& pf);
Plotfile decode_plotfile(std::string_view bytes);

void write_plotfile(const std::string& path, const Plotfile& pf);
Plotfile read_plotfile(const std::string& path);

//! Collects the valid data of every level onto rank 0. Other ranks get the
//! metadata with empty payloads. Collective over the MultiFabs' communicator.
Plotfile gather_plotfile(const std::vector<const MultiFab*>& levels, const std::vector<int>& ref_ratios,
                         const std::vector<std::string>& names, double time);

//! gather_plotfile, then rank 0 writes path.
void write_plotfile(const std::string& path, const std::vector<const MultiFab*>& levels,
                    const std::vector<int>& ref_ratios, const std::vector<std::string>& names, double time);

} // namespace miniamr::tools
