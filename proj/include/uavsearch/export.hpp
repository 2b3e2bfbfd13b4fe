#pragma once

#include <string>

namespace uvs {

// Turn a completed run directory (trajectory.csv + metrics.csv) into
// plot-ready per-UAV time series: controls, velocities, finite-difference
// accelerations, altitude with terrain and h_min/h_goal bands, and the
// eta-vs-t curve. The scenario config supplies the mesh and UAV parameters.
void export_plots(const std::string& config_path, const std::string& run_dir,
                  const std::string& out_dir);

}  // namespace uvs
