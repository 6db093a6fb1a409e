#include "scfo/dense_qp.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace scfo;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

LinearSystem random_system(std::mt19937_64& rng, int n, int m) {
  const Vector z = oracle::uniform_vector(rng, n, -1, 1);
  LinearSystem sys = LinearSystem::empty(n);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < m; ++i) {
    const Vector a = oracle::uniform_vector(rng, n, -1, 1);
    sys.add_row(a, a.dot(z) + U(rng));
  }
  return sys;
}

}  // namespace

TEST_CASE("projection onto a halfspace") {
  LinearSystem sys = LinearSystem::empty(2);
  sys.add_row(vec({1, 0}), 1.0);
  const QpResult r = project_point(vec({2, 0}), sys);
  REQUIRE(r.ok());
  CHECK(r.x(0) == doctest::Approx(1.0));
  CHECK(r.x(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.multipliers(0) == doctest::Approx(1.0));

  const QpResult inside = project_point(vec({0.5, 3}), sys);
  REQUIRE(inside.ok());
  CHECK((inside.x - vec({0.5, 3})).norm() < 1e-12);
}

TEST_CASE("feasibility tests") {
  LinearSystem contradictory = LinearSystem::empty(1);
  contradictory.add_row(vec({1}), -1.0);
  contradictory.add_row(vec({-1}), -1.0);
  CHECK_FALSE(is_feasible(contradictory));
  CHECK_FALSE(find_feasible_point(contradictory).has_value());
  CHECK(project_point(vec({0}), contradictory).status == QpStatus::Infeasible);

  CHECK(is_feasible(LinearSystem::empty(3)));

  LinearSystem wedge = LinearSystem::empty(2);
  wedge.add_row(vec({1, 1}), -1.0);
  wedge.add_row(vec({-1, 0}), 5.0);
  const auto p = find_feasible_point(wedge);
  REQUIRE(p.has_value());
  CHECK(wedge.max_violation(*p) <= 1e-10);
}

TEST_CASE("feasibility agrees with the simplex oracle") {
  std::mt19937_64 rng(21);
  int feasible = 0;
  for (int t = 0; t < 400; ++t) {
    const int n = 1 + t % 4;
    const int m = 1 + static_cast<int>(rng() % 8);
    LinearSystem sys = LinearSystem::empty(n);
    for (int i = 0; i < m; ++i) {
      sys.add_row(oracle::uniform_vector(rng, n, -1, 1), oracle::uniform_vector(rng, 1, -1, 0.3)(0));
    }
    const bool lib = is_feasible(sys);
    CHECK(lib == oracle::lp_feasible(sys.A, sys.b));
    feasible += lib;
  }
  CHECK(feasible > 40);
  CHECK(feasible < 360);
}

TEST_CASE("projection matches face enumeration and satisfies KKT") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 3;
    const LinearSystem sys = random_system(rng, n, 6);
    const Vector x0 = oracle::uniform_vector(rng, n, -3, 3);
    const QpResult r = project_point(x0, sys);
    REQUIRE(r.ok());
    const auto ref = oracle::face_enumeration_projection(x0, sys.A, sys.b);
    REQUIRE(ref.has_value());
    CHECK(0.5 * (r.x - x0).squaredNorm() == doctest::Approx(ref->objective).epsilon(1e-9));
    const KktReport kkt = kkt_residuals(Matrix::Identity(n, n), -x0, sys, r.x, r.multipliers);
    CHECK(kkt.max() <= 1e-8);
  }
}

TEST_CASE("projection is idempotent and non-expansive") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 100; ++t) {
    const LinearSystem sys = random_system(rng, 3, 5);
    const Vector a = oracle::uniform_vector(rng, 3, -3, 3);
    const Vector b = oracle::uniform_vector(rng, 3, -3, 3);
    const QpResult pa = project_point(a, sys);
    const QpResult pb = project_point(b, sys);
    REQUIRE(pa.ok());
    REQUIRE(pb.ok());
    const QpResult again = project_point(pa.x, sys);
    REQUIRE(again.ok());
    CHECK((again.x - pa.x).norm() < 1e-9);
    CHECK((pa.x - pb.x).norm() <= (a - b).norm() + 1e-9);
  }
}

TEST_CASE("general convex QP") {
  // min (x-1)^2 + 2 (y-2)^2 s.t. x + y <= 1
  Matrix H(2, 2);
  H << 2, 0, 0, 4;
  const Vector c = vec({-2, -8});
  LinearSystem sys = LinearSystem::empty(2);
  sys.add_row(vec({1, 1}), 1.0);
  const QpResult r = solve_qp(H, c, sys);
  REQUIRE(r.ok());
  // stationarity: 2(x-1) + l = 0, 4(y-2) + l = 0, x + y = 1
  CHECK(r.x(0) == doctest::Approx(-1.0 / 3.0));
  CHECK(r.x(1) == doctest::Approx(4.0 / 3.0));
  CHECK(r.multipliers(0) == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("degenerate and redundant rows") {
  LinearSystem sys = LinearSystem::empty(2);
  sys.add_row(vec({1, 0}), 1.0);
  sys.add_row(vec({1, 0}), 1.0);
  sys.add_row(vec({2, 0}), 2.0);
  sys.add_row(vec({0, 1}), 0.0);
  sys.add_row(vec({1, 1}), 1.0);
  const QpResult r = project_point(vec({3, 3}), sys);
  REQUIRE(r.ok());
  CHECK(r.x(0) == doctest::Approx(1.0));
  CHECK(r.x(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(kkt_residuals(Matrix::Identity(2, 2), -vec({3, 3}), sys, r.x, r.multipliers).max() <= 1e-8);
}

TEST_CASE("malformed systems") {
  LinearSystem sys = LinearSystem::empty(2);
  CHECK_THROWS(sys.add_row(vec({1}), 0.0));
  CHECK_THROWS(project_point(vec({1, 2, 3}), sys));
}
