#include <doctest.h>

#include "rolldisc/dynamics_full.hpp"
#include "rolldisc/error.hpp"
#include "rolldisc/overdamped.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace rolldisc;
using langevin::PhaseState;
using langevin::SimParams;

namespace {

// Independent oracle: the symmetric stretch r * xbar0(omega) projects along
// both bond gradients with a common multiplier mu solving
// r^2 (s^2 (1+mu)^2 + c^2 (1+3mu)^2) = 1.
Vec9 stretch_oracle(double omega, double r) {
  const double s = std::sin(omega), c = std::cos(omega);
  auto f = [&](double mu) {
    return r * r * (s * s * (1 + mu) * (1 + mu) + c * c * (1 + 3 * mu) * (1 + 3 * mu)) - 1.0;
  };
  double lo = r > 1 ? -0.3 : 0.0, hi = r > 1 ? 0.0 : 0.3;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    ((f(lo) < 0) == (f(mid) < 0) ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);
  const Vec2 p1(-r * s, -r * c / 3), p2(0, 2 * r * c / 3), p3(r * s, -r * c / 3);
  const Vec2 d12 = p1 - p2, d23 = p2 - p3;
  Vec9 out = Vec9::Zero();
  out.segment<2>(0) = p1 + mu * d12;
  out.segment<2>(2) = p2 - mu * d12 + mu * d23;
  out.segment<2>(4) = p3 - mu * d23;
  return out;
}

Vec9 random_vec(std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Vec9 v;
  for (int k = 0; k < kDim; ++k) v[k] = n(gen);
  return v;
}

}  // namespace

TEST_CASE("rest state is a fixed point without noise") {
  SimParams p;
  p.sigma = 0.0;
  p.beta = INFINITY;
  for (auto mode : {ConstraintMode::slide, ConstraintMode::roll}) {
    p.constraint_mode = mode;
    PhaseState s = langevin::initial_state(1.1, 0.3);
    const PhaseState s0 = s;
    Rng rng(3, 0);
    for (int k = 0; k < 50; ++k) langevin::step_inplace(s, p, rng);
    CHECK((s.q.vec() - s0.q.vec()).norm() == 0.0);
    CHECK(s.p.norm() == 0.0);
  }
}

TEST_CASE("friction dissipates kinetic energy") {
  SimParams p;
  p.sigma = 0.0;
  p.beta = INFINITY;
  std::mt19937_64 gen(11);
  for (auto mode : {ConstraintMode::slide, ConstraintMode::roll}) {
    p.constraint_mode = mode;
    PhaseState s = langevin::initial_state(1.0, 0.0);
    s.p = model::projection(s.q, p.velocity_constraints()) * random_vec(gen);
    double ke = s.p.squaredNorm();
    Rng rng(1, 0);
    for (int k = 0; k < 200; ++k) {
      langevin::step_inplace(s, p, rng);
      const double next = s.p.squaredNorm();
      CHECK(next <= ke * (1 + 1e-12));
      ke = next;
    }
  }
}

TEST_CASE("same seed gives identical trajectories") {
  SimParams p;
  p.constraint_mode = ConstraintMode::roll;
  PhaseState a = langevin::initial_state(), b = langevin::initial_state();
  Rng ra(42, 7), rb(42, 7);
  for (int k = 0; k < 100; ++k) {
    langevin::step_inplace(a, p, ra);
    b = langevin::step(b, p, rb);
  }
  CHECK(a.q.vec() == b.q.vec());
  CHECK(a.p == b.p);
}

TEST_CASE("position projection matches the symmetric stretch oracle") {
  for (double omega : {0.4, 0.9, std::numbers::pi / 2, 2.3}) {
    for (double r : {1.03, 0.97, 1.2}) {
      Vec9 q = overdamped::parameterize(omega, 0.0).vec();
      q.head<6>() *= r;
      const Configuration out = langevin::project_position(Configuration(q), 1e-14);
      const Vec9 expect = stretch_oracle(omega, r);
      CHECK((out.vec() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("position projection restores the centre of mass and the bonds") {
  std::mt19937_64 gen(5);
  Vec9 q = overdamped::parameterize(1.2, 0.7).vec();
  q += 0.05 * random_vec(gen);
  for (int d = 0; d < 3; ++d) q.segment<2>(2 * d) += Vec2(0.3, -0.2);
  const Configuration out = langevin::project_position(Configuration(q));
  CHECK(langevin::holonomic_residual(out).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(out.on_manifold(1e-10));
  // Spins are untouched by the holonomic rows.
  CHECK((out.vec().tail<3>() - q.tail<3>()).norm() == 0.0);

  CHECK_THROWS_AS(langevin::project_position(Configuration(q), 1e-14, 1), ConvergenceError);
  const Configuration on = overdamped::parameterize(0.8, 0.1);
  CHECK(langevin::project_position(on).vec() == on.vec());
}

TEST_CASE("soft bond force is minus the energy gradient") {
  std::mt19937_64 gen(9);
  const double k = 37.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Configuration q(overdamped::parameterize(0.3 + 0.2 * trial, 0.1).vec() +
                          0.1 * random_vec(gen));
    const Vec9 f = langevin::soft_bond_force(q, k);
    const double h = 1e-6;
    for (int i = 0; i < kDim; ++i) {
      Vec9 a = q.vec(), b = q.vec();
      a[i] += h;
      b[i] -= h;
      const double fd = -(langevin::soft_bond_energy(Configuration(a), k) -
                          langevin::soft_bond_energy(Configuration(b), k)) /
                        (2 * h);
      CHECK(f[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
  CHECK_THROWS_AS(langevin::soft_bond_force(langevin::initial_state().q, 0.0), ArgumentError);
}

TEST_CASE("curvature term and Lagrange multipliers") {
  std::mt19937_64 gen(17);
  SimParams p;
  p.mass = 0.3;
  for (auto mode : {ConstraintMode::slide, ConstraintMode::roll}) {
    p.constraint_mode = mode;
    const auto cs = p.velocity_constraints();
    for (int trial = 0; trial < 20; ++trial) {
      PhaseState s = langevin::initial_state(0.3 + 0.12 * trial, 0.5 * trial);
      s.p = model::projection(s.q, cs) * random_vec(gen);
      const Vec9 v = s.p / p.mass;
      const RowVector exact = langevin::constraint_curvature(s.q, v, cs);
      const RowVector fd = langevin::constraint_curvature_fd(s.q, v, cs);
      CHECK((exact - fd).cwiseAbs().maxCoeff() < 1e-6);

      const Vec9 F = random_vec(gen);
      const Vec9 a = langevin::constrained_acceleration(s, p, F);
      const ConstraintMatrix C = model::constraint_matrix(s.q, cs);
      CHECK((C * a + exact).cwiseAbs().maxCoeff() < 1e-11);

      // Forces along the constraint normals are absorbed by the multipliers.
      const RowVector w = RowVector::Ones(C.rows());
      const Vec9 a2 = langevin::constrained_acceleration(s, p, F + C.transpose() * w);
      CHECK((a - a2).cwiseAbs().maxCoeff() < 1e-11);
      const RowVector l1 = langevin::lagrange_multipliers(s, p, F);
      const RowVector l2 = langevin::lagrange_multipliers(s, p, F + C.transpose() * w);
      CHECK((l2 - l1 - w).cwiseAbs().maxCoeff() < 1e-11);
    }
  }
}

TEST_CASE("mass scaling") {
  std::mt19937_64 gen(23);
  const Vec9 four = Vec9::Constant(4.0);
  const langevin::MassScaling ms(four);
  const Mat9 gamma = Mat9::Identity() * 3.0;
  CHECK((ms.scale_friction(gamma) - gamma / 4.0).norm() < 1e-15);
  CHECK((ms.scale_noise(Mat9::Identity()) - Mat9::Identity() / 2.0).norm() < 1e-15);
  const Vec9 x = random_vec(gen);
  CHECK((ms.scale_position(x) - 2.0 * x).norm() < 1e-15);

  Vec9 m;
  m << 1, 2, 3, 0.5, 0.25, 7, 0.1, 0.2, 0.3;
  const langevin::MassScaling gen_ms(m);
  CHECK((gen_ms.unscale_position(gen_ms.scale_position(x)) - x).norm() < 1e-14);
  Mat9 A;
  for (int j = 0; j < kDim; ++j) A.col(j) = random_vec(gen);
  const Mat9 G = A * A.transpose();
  CHECK((gen_ms.unscale_friction(gen_ms.scale_friction(G)) - G).norm() < 1e-12 * G.norm());
  CHECK((gen_ms.unscale_noise(gen_ms.scale_noise(A)) - A).norm() < 1e-12 * A.norm());

  // Fluctuation-dissipation survives the change of coordinates.
  const double beta = 1.7;
  const Eigen::LLT<Mat9> llt(2.0 / beta * G);
  const Mat9 sigma = llt.matrixL();
  const Mat9 st = gen_ms.scale_noise(sigma);
  CHECK((st * st.transpose() - 2.0 / beta * gen_ms.scale_friction(G)).norm() < 1e-10 * G.norm());

  // Constraint velocities are coordinate free.
  const Configuration q = overdamped::parameterize(1.0, 0.2);
  const ConstraintMatrix C = model::constraint_matrix(q, model::ConstraintSet::for_mode(ConstraintMode::roll));
  const Vec9 v = random_vec(gen);
  CHECK((gen_ms.scale_constraints(C) * gen_ms.scale_position(v) - C * v).norm() < 1e-12);
  CHECK((gen_ms.unscale_constraints(gen_ms.scale_constraints(C)) - C).norm() < 1e-14);

  auto U = [](const Vec9& y) { return y.squaredNorm() + y[0] * y[3]; };
  const auto Ut = gen_ms.scale_potential(U);
  CHECK(Ut(gen_ms.scale_position(x)) == doctest::Approx(U(x)).epsilon(1e-14));

  Vec9 bad = m;
  bad[4] = 0.0;
  CHECK_THROWS_AS(langevin::MassScaling{bad}, ArgumentError);
}

TEST_CASE("parameter validation") {
  SimParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.effective_beta() == doctest::Approx(2.0));
  p.beta = 3.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p.beta = 2.0;
  CHECK_NOTHROW(p.validate());
  p.dt = -1.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p.dt = 1e-3;
  p.mass = 0.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
}

TEST_CASE("hard constraints hold along a trajectory") {
  for (auto mode : {ConstraintMode::slide, ConstraintMode::roll}) {
    SimParams p;
    p.constraint_mode = mode;
    p.dt = 2e-3;
    PhaseState s = langevin::initial_state(1.3, 0.0);
    Rng rng(99, 0);
    const auto cs = p.velocity_constraints();
    double worst_pos = 0.0, worst_vel = 0.0;
    for (int k = 0; k < 2000; ++k) {
      langevin::step_inplace(s, p, rng);
      worst_pos = std::max(worst_pos, langevin::holonomic_residual(s.q).cwiseAbs().maxCoeff());
      worst_vel = std::max(worst_vel, (model::constraint_matrix(s.q, cs) * s.p).cwiseAbs().maxCoeff());
    }
    CHECK(worst_pos < 1e-10);
    CHECK(worst_vel < 1e-12);
  }
}

TEST_CASE("soft bonds stay near unit length") {
  SimParams p;
  p.bond_mode = BondMode::soft;
  p.dt = 1e-4;
  PhaseState s = langevin::initial_state();
  Rng rng(4, 0);
  double worst = 0.0;
  for (int k = 0; k < 20000; ++k) {
    langevin::step_inplace(s, p, rng);
    for (const Pair& pr : kTrimerPairs) worst = std::max(worst, std::abs(s.q.bond_length(pr) - 1.0));
  }
  CHECK(worst < 0.05);
  CHECK(worst > 0.0);
  CHECK(s.q.center_of_mass_sum().norm() < 1e-9);
}

TEST_CASE("kinetic temperature of hard sliding") {
  // Five unconstrained velocity directions, each carrying 1/beta.
  SimParams p;
  p.dt = 1e-3;
  PhaseState s = langevin::initial_state();
  Rng rng(2024, 0);
  double acc = 0.0;
  const int n = 1000000;
  for (int k = 0; k < n; ++k) {
    langevin::step_inplace(s, p, rng);
    acc += s.p.squaredNorm() / p.mass;
  }
  CHECK(acc / n == doctest::Approx(5.0 / p.effective_beta()).epsilon(0.04));
}

TEST_CASE("stretched collinear bond relaxes along its own direction") {
  Vec9 q = overdamped::parameterize(std::numbers::pi / 2, 0.0).vec();
  q[0] -= 1e-4;
  const Configuration out = langevin::project_position(Configuration(q));
  CHECK(std::abs(out.bond_length({1, 2}) - 1.0) < 1e-10);
  CHECK(std::abs(out.bond_length({2, 3}) - 1.0) < 1e-10);
  for (int d = 0; d < 3; ++d) CHECK(std::abs(out.vec()[2 * d + 1] - q[2 * d + 1]) < 1e-15);

  Vec9 shifted = overdamped::parameterize(0.9, 0.4).vec();
  const Vec9 base = shifted;
  for (int d = 0; d < 3; ++d) shifted.segment<2>(2 * d) += Vec2(0.25, 0.125);
  CHECK((langevin::project_position(Configuration(shifted)).vec() - base).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("soft force on a stretched bond") {
  Vec9 q = overdamped::parameterize(std::numbers::pi / 2, 0.0).vec();
  const double delta = 1e-3;
  q[0] -= delta;
  const Vec9 f = langevin::soft_bond_force(Configuration(q), 1.0);
  CHECK(f.segment<2>(0).norm() == doctest::Approx(2 * delta).epsilon(1e-12));
  CHECK(f[0] > 0.0);
  CHECK(f.segment<2>(4).norm() == 0.0);
  CHECK(langevin::soft_bond_force(overdamped::parameterize(1.0, 0.0), 1.0).norm() < 1e-15);
}

TEST_CASE("multipliers vanish at rest without forces") {
  SimParams p;
  p.constraint_mode = ConstraintMode::roll;
  const PhaseState s = langevin::initial_state(1.0, 0.5);
  CHECK(langevin::lagrange_multipliers(s, p, Vec9::Zero()).norm() == 0.0);
}

TEST_CASE("noiseless tangent momentum decays by the friction factor") {
  SimParams p;
  p.sigma = 0.0;
  p.beta = INFINITY;
  p.dt = 1e-4;
  PhaseState s = langevin::initial_state(1.0, 0.0);
  std::mt19937_64 gen(3);
  s.p = 0.01 * model::projection(s.q, p.velocity_constraints()) * random_vec(gen);
  Rng rng(1, 0);
  const double factor = 1.0 - p.gamma * p.dt / p.mass;
  for (int k = 0; k < 20; ++k) {
    const double before = s.p.norm();
    const Vec9 q0 = s.q.vec();
    langevin::step_inplace(s, p, rng);
    CHECK(s.p.norm() / before == doctest::Approx(factor).epsilon(1e-6));
    CHECK((s.q.vec() - q0).norm() > 0.0);
    CHECK(s.q.on_manifold(1e-10));
  }
}
