#pragma once

#include <memory>
#include <string>
#include <vector>

#include "g2duct/analytic.hpp"
#include "g2duct/assembly.hpp"
#include "g2duct/params.hpp"

namespace g2duct {

struct SolverConfig {
  double rho = 1e4;               // IPM penalty
  double tol_outer = 1e-5;        // ||u^n - u^{n-1}||_L2 outer tolerance
  double tol_div = 1e-10;         // ||div u|| IPM tolerance
  int ipm_max = 50;
  int outer_max = 60;
  double early_exit_ratio = 0.5;  // IPM stagnation exit, checked after iteration 2
  int degree = 4;
  bool upwind_transport = false;  // experimental transport stabilization, default off
  double picard_damping = 1.0;    // relaxation for the Picard baselines
  bool verbose = false;           // per-iteration diagnostics on stderr

  void validate() const;
};

enum class IpmStatus { Converged, EarlyExit, MaxIterations };

struct StokesResult {
  Field u;
  Field z;   // IPM accumulator
  Field pi;  // recovered pressure (zero mean)
  int ipm_iterations = 0;
  double div_norm = 0.0;
  IpmStatus status = IpmStatus::Converged;
  int outer_iterations = 0;                // Picard count for Navier-Stokes
  std::vector<double> residual_history;    // Picard ||u^n - u^{n-1}||_L2
};

/// Precomputed operators for repeated IPM solves on a fixed space: the
/// penalized operator (factored once over interior dofs), the vector mass
/// and div-div matrices, and the pressure projection.
class StokesIPM {
 public:
  /// viscosity_coeff scales the grad-grad term: the transformed system uses
  /// 1, the simplified grade-two momentum equation uses nu.
  StokesIPM(const FunctionSpace& V, const FunctionSpace& P, const SolverConfig& cfg,
            double viscosity_coeff = 1.0);

  const FunctionSpace& velocity_space() const { return *V_; }
  const FunctionSpace& pressure_space() const { return *P_; }
  const SparseMatrix& mass() const { return M_; }
  const SparseMatrix& divdiv() const { return D_; }

  /// Dirichlet values for u on all boundary dofs (full-size vector).
  void set_boundary_values(std::vector<double> g_full);
  const std::vector<double>& boundary_values() const { return g_full_; }

  struct IpmRun {
    int iterations = 0;
    double div_norm = 0.0;
    IpmStatus status = IpmStatus::Converged;
    std::vector<double> div_history;
  };

  /// Iterate u-solve / z-accumulate until ||div u|| <= tol_div.  rhs_load is
  /// the assembled (f, v) vector; z is the warm-startable accumulator.
  IpmRun run(const std::vector<double>& rhs_load, Field& u, Field& z) const;

  /// L2 projection of -div z onto the pressure space, shifted to zero mean
  /// (the solver's pressure gauge).
  Field recover_pressure(const Field& z) const;

  /// ||u^n - u^{n-1}||_L2 via the mass matrix.
  double l2_norm(const std::vector<double>& coeffs) const;

 private:
  const FunctionSpace* V_;
  const FunctionSpace* P_;
  SolverConfig cfg_;
  SparseMatrix A_;   // viscosity_coeff * grad-grad + rho * div-div
  SparseMatrix M_;   // vector mass
  SparseMatrix D_;   // div-div
  SparseMatrix B_;   // (q, div v)
  SparseMatrix Mp_;  // pressure mass
  std::unique_ptr<ConstrainedSystem> bc_system_;
  std::unique_ptr<SparseSolver> pressure_solver_;
  std::vector<double> g_full_;
};

/// Raw L2 projection of -div z onto P (no gauge shift).
Field recover_pressure(const Field& z, const FunctionSpace& P);

/// Nodal boundary-value vector for V from tag-wise boundary data.
std::vector<double> boundary_values_from_data(const FunctionSpace& V, const BoundaryData& bd);

/// Net-flux compatibility check; throws IncompatibleBoundaryDataError.
void check_boundary_compatibility(const FunctionSpace& V, const std::vector<double>& g_full);

/// Stokes solve -lap u + grad pi = w by the iterated penalty method, with
/// pressure recovery.
StokesResult solve_stokes_ipm(const FunctionSpace& V, const FunctionSpace& P, const Field& w_rhs,
                              const BoundaryData& g, const SolverConfig& cfg);

/// Navier-Stokes baseline -lap u + R u.grad u + grad pi = 0 via Picard
/// iteration on the IPM solver.
StokesResult solve_navier_stokes(const FunctionSpace& V, const FunctionSpace& P, double reynolds,
                                 const BoundaryData& g, const SolverConfig& cfg);

}  // namespace g2duct
