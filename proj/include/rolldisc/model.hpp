#pragma once

// Constraint rows, Gram matrix and orthogonal projections for a chain of
// touching unit-diameter discs.

#include "rolldisc/types.hpp"

#include <span>
#include <vector>

namespace rolldisc::model {

/// Which velocity constraints are active. The trimer uses pairs (1,2),(2,3);
/// the row builders accept any pair list.
struct ConstraintSet {
  bool bonds_enabled = true;
  bool rolling_enabled = false;
  bool com_pinned = true;
  std::vector<Pair> pairs{kTrimerPairs.begin(), kTrimerPairs.end()};
  /// Rolling rows require |x_i - x_j| = 1 to within this tolerance.
  double contact_tol = 1e-6;

  int rows() const;

  static ConstraintSet for_mode(ConstraintMode mode);
};

/// Row of (x_i - x_j).(v_i - v_j) = 0.
Vec9 bond_row(const Configuration& cfg, Pair pair);

/// Row of (x_i - x_j)^perp.(v_i - v_j) - (w_i + w_j)/2 = 0, with all terms
/// moved to the left-hand side.
Vec9 rolling_row(const Configuration& cfg, Pair pair, double contact_tol = 1e-6);

/// Rows of sum_i v_i = 0 (x then y).
Vec9 com_row(int axis);

/// Stacks rows in the order bonds, rolling, com_x, com_y.
ConstraintMatrix constraint_matrix(const Configuration& cfg, const ConstraintSet& cs);

struct ProjectionBundle {
  ConstraintMatrix C;
  GramMatrix G;
  Mat9 P;
  Eigen::LLT<GramMatrix> G_llt;
  double condition = 1.0;

  int rows() const { return static_cast<int>(C.rows()); }
  /// v - C^T G^{-1} C v, without forming P.
  Vec9 project(const Vec9& v) const;
  /// C^T G^{-1} C v.
  Vec9 normal_part(const Vec9& v) const { return v - project(v); }
};

/// Builds C, G = C C^T and P = I - C^T G^{-1} C. Throws NumericalRankError
/// when G is numerically singular (condition estimate above 1e12).
ProjectionBundle assemble(const Configuration& cfg, const ConstraintSet& cs);

/// Only P; skips the bookkeeping of the full bundle.
Mat9 projection(const Configuration& cfg, const ConstraintSet& cs);

/// Moore-Penrose pseudoinverse of P Gamma P via SVD with relative cutoff
/// 1e-12 * sigma_max.
Mat9 gamma_p_dagger(const ProjectionBundle& bundle, const Mat9& gamma);

/// Same matrix via the complement shift (P Gamma P + I - P)^{-1} - (I - P).
/// Exact for SPD Gamma; used in the integrators because it needs one 9x9
/// LDLT instead of an SVD.
Mat9 gamma_p_dagger_shifted(const Mat9& P, const Mat9& gamma);

/// General SVD pseudoinverse with relative cutoff.
Mat9 pseudo_inverse(const Mat9& M, double rel_cutoff = 1e-12);

}  // namespace rolldisc::model
