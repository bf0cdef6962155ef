#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "Inputs.hpp"
#include "miniamr/Amr.hpp"

namespace miniamr::tools {

class HeatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Diffusion of a Gaussian on the periodic unit cube, coarse level plus at
//! most one refined level placed where |u| exceeds tag_threshold at t = 0.
struct HeatConfig {
    int n_cell = 32;
    int max_level = 1;
    int ref_ratio = 2;
    int blocking_factor = 8;
    int max_grid_size = 16;
    double diffusivity = 1.0;
    double sigma0 = 0.05;
    double final_time = 0.002;
    //! dt = cfl * h_finest^2 / (2 D SpaceDim) unless dt > 0 is given.
    double cfl = 0.5;
    double dt = 0;
    double tag_threshold = 0.1;
    int nranks = 1;
    InterpScheme interp = InterpScheme::Linear;
    IntVect tile_size = default_tile_size();
    //! Plotfiles go here when non-empty: initial, final, and every plot_int steps.
    std::string plotfile_dir;
    int plot_int = 0;
    //! Level-0 boxes over which linf_region is measured.
    std::vector<Box> error_region;

    static HeatConfig from_inputs(const InputsTable& in);
};

struct HeatResult {
    double linf = 0;
    double l2 = 0;
    double linf_region = 0;
    double integral_initial = 0;
    double integral_final = 0;
    int nsteps = 0;
    double dt = 0;
    double time = 0;
    int finest_level = 0;
    //! Refined region in level-0 index space.
    std::vector<Box> refined_region;
    std::vector<std::string> plotfiles;
    MessageStats comm;
};

//! Free-space solution at point x and time t, centered in the unit cube.
double heat_exact(const RealVect& x, double t, const HeatConfig& cfg);

HeatResult run_heat_demo(const HeatConfig& cfg, Backend& be);

} // namespace miniamr::tools
