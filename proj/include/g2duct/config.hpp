#pragma once

#include <string>

#include "g2duct/anderson.hpp"
#include "g2duct/geometry.hpp"
#include "g2duct/params.hpp"
#include "g2duct/stokes.hpp"
#include "g2duct/sweep.hpp"

namespace g2duct {

enum class ModelKind { Stokes, NavierStokes, Grade2, Grade2Simplified };

const char* model_name(ModelKind m);
ModelKind model_from_name(const std::string& s);

/// Flat key-value run configuration with dotted section prefixes
/// (geometry.*, mesh.*, fluid.*, solver.*, aa.*, sweep.*, output.*).
struct RunConfig {
  // geometry
  double b_i = 1.0, b_o = 1.0, L = 1.0, H = 0.5;
  bool smoothed_corners = false;
  double chamfer_length = 0.1;

  // mesh
  int n = 2;
  SplitKind split = SplitKind::CrossedTriangle;
  int r_u = 0, r_b = 0, r_p = 0;

  // fluid
  double nu = 1.0;
  double alpha1 = 0.0, alpha2 = 0.0;
  double alpha = 0.0, theta = 0.0;
  bool polar_given = false;
  bool cartesian_given = false;
  double U = 1.0;

  // solver
  ModelKind model = ModelKind::Grade2;
  SolverConfig solver;
  double reynolds = -1.0;  // < 0: derive U/nu for the navier-stokes model

  // acceleration
  AAConfig aa;

  // sweep
  SweepGrid sweep;

  // output
  std::string out_dir = "out";
  int workers = 1;
  bool cell_dump = false;  // also write per-cell field dumps

  DuctGeometry geometry() const;
  FluidParams fluid_params() const;
  double effective_reynolds() const { return reynolds >= 0.0 ? reynolds : U / nu; }

  void validate() const;
};

/// Parse a config file; missing file or malformed lines raise
/// std::runtime_error with a location diagnostic.
RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& is, const std::string& name = "<config>");

/// Apply one "key=value" override (same keys as the file format).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Build the configured mesh: base duct + r_u/r_b/r_p refinements.
Mesh build_configured_mesh(const RunConfig& cfg);

}  // namespace g2duct
