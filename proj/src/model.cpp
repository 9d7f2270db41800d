#include "rolldisc/model.hpp"

#include "rolldisc/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace rolldisc::model {

namespace {

void check_pair(Pair pair) {
  const bool valid = pair.i >= 1 && pair.i <= kDiscs && pair.j >= 1 && pair.j <= kDiscs;
  if (!valid || pair.i == pair.j) {
    throw ArgumentError(fmt::format("invalid disc pair ({},{})", pair.i, pair.j));
  }
}

}  // namespace

int ConstraintSet::rows() const {
  const int n = static_cast<int>(pairs.size());
  return (bonds_enabled ? n : 0) + (rolling_enabled ? n : 0) + (com_pinned ? 2 : 0);
}

ConstraintSet ConstraintSet::for_mode(ConstraintMode mode) {
  ConstraintSet cs;
  cs.rolling_enabled = mode == ConstraintMode::roll;
  return cs;
}

Vec9 bond_row(const Configuration& cfg, Pair pair) {
  check_pair(pair);
  const Vec2 d = cfg.position(pair.i) - cfg.position(pair.j);
  Vec9 row = Vec9::Zero();
  row.segment<2>(2 * (pair.i - 1)) = d;
  row.segment<2>(2 * (pair.j - 1)) = -d;
  return row;
}

Vec9 rolling_row(const Configuration& cfg, Pair pair, double contact_tol) {
  check_pair(pair);
  const Vec2 d = cfg.position(pair.i) - cfg.position(pair.j);
  const double gap = std::abs(d.norm() - 1.0);
  if (gap > contact_tol) {
    throw PreconditionError(fmt::format(
        "rolling constraint needs discs ({},{}) in contact; |d|-1 = {:.3e}", pair.i, pair.j,
        d.norm() - 1.0));
  }
  const Vec2 dp = perp(d);
  Vec9 row = Vec9::Zero();
  row.segment<2>(2 * (pair.i - 1)) = dp;
  row.segment<2>(2 * (pair.j - 1)) = -dp;
  row[kSpinOffset + pair.i - 1] = -0.5;
  row[kSpinOffset + pair.j - 1] = -0.5;
  return row;
}

Vec9 com_row(int axis) {
  Vec9 row = Vec9::Zero();
  for (int d = 0; d < kDiscs; ++d) row[2 * d + axis] = 1.0;
  return row;
}

ConstraintMatrix constraint_matrix(const Configuration& cfg, const ConstraintSet& cs) {
  ConstraintMatrix C(cs.rows(), kDim);
  int r = 0;
  if (cs.bonds_enabled) {
    for (const Pair& p : cs.pairs) C.row(r++) = bond_row(cfg, p).transpose();
  }
  if (cs.rolling_enabled) {
    for (const Pair& p : cs.pairs) C.row(r++) = rolling_row(cfg, p, cs.contact_tol).transpose();
  }
  if (cs.com_pinned) {
    C.row(r++) = com_row(0).transpose();
    C.row(r++) = com_row(1).transpose();
  }
  return C;
}

Vec9 ProjectionBundle::project(const Vec9& v) const {
  if (C.rows() == 0) return v;
  const RowVector cv = C * v;
  return v - C.transpose() * G_llt.solve(cv);
}

ProjectionBundle assemble(const Configuration& cfg, const ConstraintSet& cs) {
  ProjectionBundle b;
  b.C = constraint_matrix(cfg, cs);
  b.G = b.C * b.C.transpose();
  b.P = Mat9::Identity();
  if (b.C.rows() == 0) return b;

  b.G_llt.compute(b.G);
  // Pivots of the Cholesky factor bound the spectrum of G from both sides;
  // their squared ratio is a cheap condition estimate.
  const auto diag = b.G_llt.matrixLLT().diagonal();
  const double dmax = diag.cwiseAbs().maxCoeff();
  const double dmin = diag.cwiseAbs().minCoeff();
  b.condition = dmin > 0.0 ? (dmax / dmin) * (dmax / dmin) : INFINITY;
  if (b.G_llt.info() != Eigen::Success || !(b.condition < 1e12)) {
    throw NumericalRankError(
        fmt::format("constraint Gram matrix is numerically singular (cond ~ {:.3e})",
                    b.condition),
        b.condition);
  }
  b.P.noalias() -= b.C.transpose() * b.G_llt.solve(b.C);
  return b;
}

Mat9 projection(const Configuration& cfg, const ConstraintSet& cs) { return assemble(cfg, cs).P; }

Mat9 pseudo_inverse(const Mat9& M, double rel_cutoff) {
  Eigen::JacobiSVD<Mat9> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_cutoff * s.maxCoeff();
  Vec9 inv = Vec9::Zero();
  for (int k = 0; k < kDim; ++k) {
    if (s[k] > cutoff) inv[k] = 1.0 / s[k];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Mat9 gamma_p_dagger(const ProjectionBundle& bundle, const Mat9& gamma) {
  const Mat9 M = bundle.P * gamma * bundle.P;
  return pseudo_inverse(0.5 * (M + M.transpose()));
}

Mat9 gamma_p_dagger_shifted(const Mat9& P, const Mat9& gamma) {
  const Mat9 complement = Mat9::Identity() - P;
  Mat9 A = P * gamma * P + complement;
  A = 0.5 * (A + A.transpose());
  Eigen::LDLT<Mat9> ldlt(A);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalRankError("P Gamma P + (I - P) is not invertible", INFINITY);
  }
  Mat9 inv = ldlt.solve(Mat9::Identity());
  return 0.5 * (inv + inv.transpose()) - complement;
}

}  // namespace rolldisc::model
