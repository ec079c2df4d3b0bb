#pragma once

#include "ccbm/assembly.hpp"

namespace ccbm {

struct Diagnostics {
  double J = 0.0;
  double J_KV = 0.0;
  double J_D = 0.0;
  double J_N = 0.0;
  double max_abs_u_i = 0.0;
  double max_abs_p_i = 0.0;
  double max_abs_v = 0.0;
  double max_abs_q = 0.0;
};

struct AuxiliaryStates {
  RealStokesSolution u_D;  // slip on Sigma, pressure normalized to zero Sigma mean
  RealStokesSolution u_N;  // natural traction on Sigma
};

ComplexStokesField solve_state(const Mesh& mesh, const FeSpacePair& spaces,
                               const PhysicsCase& cs);

ComplexStokesField solve_adjoint(const Mesh& mesh, const FeSpacePair& spaces,
                                 const PhysicsCase& cs, const ComplexStokesField& state);

// J = 1/2 int (|u_i|^2 + |p_i|^2), exact quadrature of the FE representation.
double cost_J(const Mesh& mesh, const FeSpacePair& spaces, const ComplexStokesField& state);

AuxiliaryStates solve_auxiliary_states(const Mesh& mesh, const FeSpacePair& spaces,
                                       const PhysicsCase& cs);

Diagnostics diagnostics(const Mesh& mesh, const FeSpacePair& spaces, const PhysicsCase& cs,
                        const ComplexStokesField& state, const ComplexStokesField& adjoint,
                        const AuxiliaryStates& aux);

// Mean and standard deviation of p_D - p_N over the pressure nodes.
std::pair<double, double> pressure_shift_stats(const AuxiliaryStates& aux);

}  // namespace ccbm
