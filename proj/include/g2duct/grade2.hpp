#pragma once

#include <memory>
#include <optional>

#include "g2duct/anderson.hpp"
#include "g2duct/stokes.hpp"

namespace g2duct {

/// Converged (or diagnostic) state of the transformed grade-two solve:
/// velocity u, auxiliary pressure pi, transport variable w, IPM accumulator
/// z, and the derived physical pressure p.  The state owns its spaces so the
/// fields stay valid after the solver returns.
struct FlowState {
  std::shared_ptr<const FunctionSpace> velocity_space;
  std::shared_ptr<const FunctionSpace> pressure_space;
  Field u;
  Field pi;
  Field w;
  Field z;
  Field p;
  int outer_iterations = 0;
  int total_ipm_iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // ||u^n - u^{n-1}||_L2, from n = 2
  double pressure_projection_residual = 0.0;
};

struct SimplifiedState {
  std::shared_ptr<const FunctionSpace> velocity_space;
  std::shared_ptr<const FunctionSpace> pressure_space;
  std::shared_ptr<const FunctionSpace> scalar_space;
  Field u;
  Field q;         // modified pressure
  Field z_scalar;  // scalar transport variable
  int outer_iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
};

/// Load vector of div N(u, pi) tested against the transport space: the
/// expansion -alpha1 (grad u)^T grad pi + div tau evaluated
/// cellwise from second derivatives of u and first derivatives of pi.
std::vector<double> assemble_N_divergence(const Field& u, const Field& pi,
                                          const FluidParams& params, const FunctionSpace& W);

/// Inflow Dirichlet data for the transport solve: facets with
/// alpha1 g.n < 0 at every facet quadrature point.  Fills a dof mask and
/// the w_b values (only meaningful where the mask is set).
void inflow_dirichlet(const FunctionSpace& W, const Field& g, double alpha1,
                      const std::function<void(const Point2&, double*)>& w_b,
                      std::vector<char>& mask, std::vector<double>& values);

/// Solve (nu I + alpha1 u.grad) w = load with w = w_b on the inflow set.
Field solve_transport(const Field& u, const std::vector<double>& load, const FluidParams& params,
                      const std::vector<char>& inflow_mask, const std::vector<double>& inflow_values,
                      const SolverConfig& cfg);

/// Physical pressure p = nu pi + alpha1 P(u.grad pi), with p = nu pi
/// enforced on no-slip wall dofs where u vanishes pointwise.
Field recover_physical_pressure(const Field& u, const Field& pi, const FluidParams& params,
                                double* projection_residual = nullptr);

/// Outer fixed-point solve of the transformed system on the duct, with
/// Anderson acceleration of the paired (U, Z) sequences.
FlowState solve_grade2(const Mesh& mesh, const FluidParams& params, const DuctGeometry& geom,
                       const SolverConfig& cfg, const AAConfig& aa);

/// Variant with explicit boundary data (channel setups, tests); w0_coeffs,
/// when given, overrides the initial transport iterate (sweep warm starts).
FlowState solve_grade2_with_data(const Mesh& mesh, const FluidParams& params,
                                 const BoundaryData& bd, const SolverConfig& cfg,
                                 const AAConfig& aa,
                                 const std::vector<double>* w0_coeffs = nullptr);

/// Special-case solver for alpha1 + alpha2 = 0 via the scalar-transport
/// formulation; throws ParameterMismatchError otherwise.
SimplifiedState solve_grade2_simplified(const Mesh& mesh, const FluidParams& params,
                                        const DuctGeometry& geom, const SolverConfig& cfg);

/// Physical pressure of the simplified formulation, p = q - |u|^2/2
/// projected onto P (q is the rotational-form Bernoulli pressure).
Field simplified_physical_pressure(const SimplifiedState& state, const FunctionSpace& P);

}  // namespace g2duct
