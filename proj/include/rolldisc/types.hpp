#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <string_view>

namespace rolldisc {

// Layout of the 9-dimensional state: (x1,y1,x2,y2,x3,y3,theta1,theta2,theta3).
inline constexpr int kDim = 9;
inline constexpr int kDiscs = 3;
inline constexpr int kSpinOffset = 6;
inline constexpr int kMaxRows = 6;

using Vec9 = Eigen::Matrix<double, kDim, 1>;
using Mat9 = Eigen::Matrix<double, kDim, kDim>;
using Vec2 = Eigen::Vector2d;

// Row-major so that a single constraint row is contiguous.
using ConstraintMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, kDim, Eigen::RowMajor, kMaxRows, kDim>;
using GramMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxRows, kMaxRows>;
using RowVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxRows, 1>;

enum class ConstraintMode { slide, roll };
enum class BondMode { hard, soft };

std::string_view to_string(ConstraintMode mode);
std::string_view to_string(BondMode mode);
ConstraintMode parse_constraint_mode(std::string_view text);
BondMode parse_bond_mode(std::string_view text);

/// Disc pair, 1-based as in the usual trimer labelling (discs 1,2,3).
struct Pair {
  int i = 1;
  int j = 2;
  friend bool operator==(const Pair&, const Pair&) = default;
};

inline constexpr std::array<Pair, 2> kTrimerPairs{Pair{1, 2}, Pair{2, 3}};

/// Positions and spins of the three discs. Positions are in disc-diameter
/// units, spins in radians.
class Configuration {
 public:
  Configuration() : x_(Vec9::Zero()) {}
  explicit Configuration(const Vec9& x) : x_(x) {}

  const Vec9& vec() const { return x_; }
  Vec9& vec() { return x_; }

  /// Center of disc `disc` (1-based).
  Vec2 position(int disc) const { return x_.segment<2>(2 * (disc - 1)); }
  void set_position(int disc, const Vec2& p) { x_.segment<2>(2 * (disc - 1)) = p; }
  double spin(int disc) const { return x_[kSpinOffset + disc - 1]; }
  void set_spin(int disc, double theta) { x_[kSpinOffset + disc - 1] = theta; }

  double bond_length(Pair pair) const { return (position(pair.i) - position(pair.j)).norm(); }
  Vec2 center_of_mass_sum() const { return position(1) + position(2) + position(3); }

  /// Bond lengths equal one and the centre of mass sits at the origin.
  bool on_manifold(double tol = 1e-10) const;

 private:
  Vec9 x_;
};

inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

}  // namespace rolldisc
