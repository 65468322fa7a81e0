#include "expmix/applications.hpp"

#include <cmath>

#include "json.hpp"

namespace expmix {

EquilibriumSpectrum lorenz_spectrum(double sigma, double rho, double beta) {
  if (sigma <= 0 || rho <= 0 || beta < 0)
    throw Error("equilibrium spectrum needs positive parameters");
  EquilibriumSpectrum sp;
  sp.lambda_s = -beta;
  double tr = sigma + 1.0;
  double det = -sigma * (rho - 1.0);  // product of the two roots
  double disc = std::sqrt(tr * tr - 4.0 * det);
  sp.lambda_u = 0.5 * (-tr + disc);
  sp.lambda_ss = 0.5 * (-tr - disc);
  sp.divergence = -(sigma + 1.0 + beta);
  sp.lorenz_like_ordering = sp.lambda_ss < sp.lambda_s &&
                            sp.lambda_s < 0.0 && -sp.lambda_s < sp.lambda_u;
  sp.strong_dissipativity =
      sp.divergence < 0.0 && sp.lambda_u + sp.lambda_ss < sp.lambda_s;
  return sp;
}

std::string EquilibriumSpectrum::to_json_string() const {
  nlohmann::json j;
  j["lambda_ss"] = lambda_ss;
  j["lambda_s"] = lambda_s;
  j["lambda_u"] = lambda_u;
  j["divergence"] = divergence;
  j["lorenz_like_ordering"] = lorenz_like_ordering;
  j["strong_dissipativity"] = strong_dissipativity;
  return j.dump(2);
}

namespace {

ExpandingMap make_doubling() {
  std::vector<Branch> branches(2);
  branches[0] = {0.0, 0.5, [](double y) { return 0.5 * y; },
                 [](double) { return 0.5; }};
  branches[1] = {0.5, 1.0, [](double y) { return 0.5 * (y + 1.0); },
                 [](double) { return 0.5; }};
  return ExpandingMap(
      1.0, 1.0, 0.5, std::move(branches),
      [](double y) {
        double z = 2.0 * y;
        return z < 1.0 ? z : z - 1.0;
      },
      "doubling");
}

ExpandingMap make_ternary() {
  std::vector<Branch> branches(3);
  for (int m = 0; m < 3; ++m)
    branches[m] = {m / 3.0, (m + 1) / 3.0,
                   [m](double y) { return (y + m) / 3.0; },
                   [](double) { return 1.0 / 3.0; }};
  return ExpandingMap(
      1.0, 1.0, 1.0 / 3.0, std::move(branches),
      [](double y) {
        double z = 3.0 * y;
        if (z >= 3.0) return 1.0;
        return z - std::floor(z);
      },
      "ternary");
}

RoofFunction quadratic_roof() {
  return {[](double y) { return 2.0 + 0.5 * y * y; },
          [](double y) { return y; }, 2.0, 0.1};
}

RoofFunction linear_roof() {
  return {[](double y) { return 2.0 + y; }, [](double) { return 1.0; }, 2.0,
          0.1};
}

RoofFunction constant_roof() {
  return {[](double) { return 2.0; }, [](double) { return 0.0; }, 2.0, 0.1};
}

SkewMap standard_fiber(ExpandingMap base) {
  return SkewMap{std::move(base),
                 [](double y, double z) { return 0.5 * z + 0.25 * y; },
                 /*fiber_lo=*/0.0,
                 /*fiber_hi=*/1.0,
                 /*circle=*/false,
                 /*fiber_lip=*/0.5,
                 /*C=*/1.0,
                 /*gamma0=*/0.5};
}

}  // namespace

ModelConfig model_zoo(const std::string& name) {
  auto build = [&](ExpandingMap map, RoofFunction roof,
                   bool uni) -> ModelConfig {
    std::optional<SkewMap> fiber = standard_fiber(map);
    return ModelConfig{name, std::move(map), std::move(roof),
                       std::move(fiber), uni};
  };
  if (name == "doubling-quadratic")
    return build(make_doubling(), quadratic_roof(), true);
  if (name == "doubling-linear")
    return build(make_doubling(), linear_roof(), false);
  if (name == "doubling-constant")
    return build(make_doubling(), constant_roof(), false);
  if (name == "ternary-quadratic")
    return build(make_ternary(), quadratic_roof(), true);
  throw UnknownModel("no model named '" + name + "'");
}

std::vector<std::string> model_zoo_names() {
  return {"doubling-quadratic", "doubling-linear", "doubling-constant",
          "ternary-quadratic"};
}

}  // namespace expmix
