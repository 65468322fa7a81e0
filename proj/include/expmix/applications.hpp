#pragma once

#include <optional>
#include <string>
#include <vector>

#include "expmix/dynamics.hpp"
#include "expmix/skew.hpp"

namespace expmix {

// Eigenvalue data of the linearization at a Lorenz-like equilibrium.
struct EquilibriumSpectrum {
  double lambda_ss = 0.0;
  double lambda_s = 0.0;
  double lambda_u = 0.0;
  double divergence = 0.0;
  bool lorenz_like_ordering = false;  // l_ss < l_s < 0 < -l_s < l_u
  bool strong_dissipativity = false;  // div < 0 and l_u + l_ss < l_s
  std::string to_json_string() const;
};

// Linearization of the classical vector field at the origin:
// lambda_s = -beta; lambda_u, lambda_ss the roots of
// x^2 + (sigma+1) x - sigma(rho-1); divergence = -(sigma+1+beta).
EquilibriumSpectrum lorenz_spectrum(double sigma, double rho, double beta);

// Named model configurations used across the test pipelines.
struct ModelConfig {
  std::string name;
  ExpandingMap map;
  RoofFunction roof;
  std::optional<SkewMap> fiber;
  bool uni_expected = false;  // whether a UNI witness should exist
};

ModelConfig model_zoo(const std::string& name);
std::vector<std::string> model_zoo_names();

}  // namespace expmix
