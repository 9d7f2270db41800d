#include "rolldisc/types.hpp"

#include "rolldisc/error.hpp"

#include <cmath>
#include <string>

namespace rolldisc {

std::string_view to_string(ConstraintMode mode) {
  return mode == ConstraintMode::roll ? "roll" : "slide";
}

std::string_view to_string(BondMode mode) { return mode == BondMode::soft ? "soft" : "hard"; }

ConstraintMode parse_constraint_mode(std::string_view text) {
  if (text == "slide") return ConstraintMode::slide;
  if (text == "roll") return ConstraintMode::roll;
  throw ArgumentError("unknown constraint mode '" + std::string(text) + "'");
}

BondMode parse_bond_mode(std::string_view text) {
  if (text == "hard") return BondMode::hard;
  if (text == "soft") return BondMode::soft;
  throw ArgumentError("unknown bond mode '" + std::string(text) + "'");
}

bool Configuration::on_manifold(double tol) const {
  for (const Pair& p : kTrimerPairs) {
    if (std::abs(bond_length(p) - 1.0) > tol) return false;
  }
  return center_of_mass_sum().cwiseAbs().maxCoeff() <= tol;
}

}  // namespace rolldisc
