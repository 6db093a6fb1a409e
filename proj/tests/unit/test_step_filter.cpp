#include "scfo/step_filter.hpp"

#include <doctest.h>

#include <cmath>

using namespace scfo;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

SlackState one_soft(double d, double d0, double d_total, double beta) {
  SlackState s;
  s.d = vec({d});
  s.d0 = vec({d0});
  s.d_total = vec({d_total});
  s.beta = vec({beta});
  return s;
}

HistoryEntry rec(const Vector& u, double g_upper, double phi = 0.0) {
  HistoryEntry e;
  e.u = u;
  e.g_upper = vec({g_upper});
  e.g_meas = vec({g_upper});
  e.phi_meas = phi;
  return e;
}

ScalarFunction fn(std::function<double(const Vector&)> f,
                  std::function<Vector(const Vector&)> g = nullptr) {
  ScalarFunction s;
  s.value = std::move(f);
  s.gradient = std::move(g);
  return s;
}

}  // namespace

TEST_CASE("feasibility gain") {
  const SlackState hard = SlackState::hard(1);
  CHECK(gain_feasibility(vec({-0.2}), vec({0.2}), hard) == doctest::Approx(1.0));
  CHECK(gain_feasibility(vec({0.0}), vec({0.7}), hard) == 0.0);
  CHECK(gain_feasibility(vec({-0.2}), vec({-0.5}), hard) == kInf);
  SlackState soft = one_soft(0.1, 0.1, 1.0, 0.5);
  CHECK(gain_feasibility(vec({-0.2}), vec({0.2}), soft) == doctest::Approx(1.5));
  CHECK(gain_feasibility(vec({-0.2, -0.1}), vec({0.2, 0.5}), SlackState::hard(2)) == doctest::Approx(0.2));
}

TEST_CASE("cost-decrease gain") {
  QBoundState q = QBoundState::fixed(2.0 * Matrix::Identity(2, 2));
  const GradientBox g = GradientBox::exact(vec({-1, 0}));
  CHECK(gain_cost_decrease(g, q, vec({1, 0})) == doctest::Approx(0.995));
  QBoundState q2 = QBoundState::fixed(4.0 * Matrix::Identity(2, 2));
  CHECK(gain_cost_decrease(g, q2, vec({1, 0})) == doctest::Approx(0.4975));

  const double delta = 1e-3;
  const GradientBox edge{vec({-delta - 0.5, -0.5}), vec({-delta + 0.5, 0.5}), vec({-delta, 0})};
  const Vector du = vec({0.3, 0.0});
  // worst case over the box is exactly -delta * 0.3 for a pure u1 step
  CHECK(gain_cost_decrease(shrink_box(edge, 0.0), q, du) ==
        doctest::Approx(1.99 * delta * 0.3 / (2.0 * 0.09)));
  CHECK_THROWS(gain_cost_decrease(GradientBox::exact(vec({1, 0})), q, vec({1, 0})));
}

TEST_CASE("gain composition") {
  CHECK(compose_gain(1.5, 0.995) == doctest::Approx(0.995));
  CHECK(compose_gain(kInf, kInf) == 1.0);
  CHECK(compose_gain(0.0, 0.7) == 0.0);
  CHECK(compose_gain(0.3, 0.4) == doctest::Approx(0.3));
}

TEST_CASE("slack reduction") {
  const SlackState s = one_soft(4.0, 4.0, 6.0, 1.0 / 3.0);
  CHECK_NOTHROW(s.validate());
  CHECK(slack_step(s, vec({-1.0})).d(0) == 4.0);
  const SlackState once = slack_step(s, vec({0.5}));
  CHECK(once.d(0) == doctest::Approx(4.0 / 3.0));
  const SlackState twice = slack_step(once, vec({0.0}));
  CHECK(twice.d(0) == doctest::Approx(4.0 / 9.0));
  CHECK(slack_step(SlackState::hard(1), vec({1.0})).d(0) == 0.0);
}

TEST_CASE("slack reduction constant bound") {
  CHECK(beta_max(4.0, 6.0) == doctest::Approx(1.0 / 3.0));
  CHECK(beta_max(2.0, 2.0) == 0.0);
  CHECK(beta_max(1.0, 1e12) == doctest::Approx(1.0));
  CHECK_THROWS(beta_max(4.0, 3.0));
  CHECK_THROWS(one_soft(4.0, 4.0, 6.0, 0.5).validate());
  const SlackState levels = SlackState::soft_levels(vec({2.0, 1.0}), 0.05);
  CHECK(levels.d0(0) == doctest::Approx(0.1));
  CHECK(levels.d_total(1) == doctest::Approx(0.5));
  CHECK(levels.beta(0) == doctest::Approx(0.9));
}

TEST_CASE("fallback reference") {
  const SlackState s = one_soft(0.3, 0.3, 3.0, 0.9);
  IterateState st;
  st.history.push_back(rec(vec({0, 0}), -0.5, 5.0));
  st.history.push_back(rec(vec({1, 0}), 0.1, 3.0));
  CHECK(fallback_reference(st, s) == 1);
  CHECK_FALSE(needs_fallback(st.history.back().g_upper, s));

  st.history.push_back(rec(vec({2, 0}), 0.2, 2.0));
  st.history.push_back(rec(vec({3, 0}), 0.5, 1.0));
  CHECK(needs_fallback(st.history.back().g_upper, s));
  CHECK(fallback_reference(st, s) == 2);

  IterateState only_start;
  only_start.history.push_back(rec(vec({0, 0}), -0.5, 5.0));
  only_start.history.push_back(rec(vec({1, 0}), 0.4, 1.0));
  only_start.history.push_back(rec(vec({2, 0}), 0.6, 0.5));
  CHECK(fallback_reference(only_start, s) == 0);
}

TEST_CASE("union line search") {
  const LipschitzTable lip = LipschitzTable::symmetric(Matrix::Ones(1, 2));
  const SlackState hard = SlackState::hard(1);
  const Vector u_k = vec({0, 0});
  const Vector u_bar = vec({1, 0});

  const std::vector<HistoryEntry> alone{rec(u_k, -0.1)};
  CHECK(union_line_search(u_k, u_bar, alone, lip, vec({-0.1}), {}, hard) == doctest::Approx(0.1));

  // a past point at [0.6, 0] certifies u1 in [0.3, 0.9]; intermediate K are outside the union
  std::vector<HistoryEntry> hist{rec(vec({0.6, 0}), -0.3), rec(u_k, -0.1)};
  const double K = union_line_search(u_k, u_bar, hist, lip, vec({-0.1}), {}, hard);
  CHECK(K == doctest::Approx(0.9).epsilon(1e-8));

  auto member = [&](double k) {
    const Vector u = u_k + k * (u_bar - u_k);
    if (-0.1 + k <= 0.0) return true;
    for (const auto& h : hist) {
      if (h.g_upper(0) + (u - h.u).cwiseAbs().sum() <= 0.0) return true;
    }
    return false;
  };
  CHECK(member(K - 1e-12));
  for (int i = 0; i <= 10000; ++i) {
    const double k = i / 10000.0;
    if (k > K + 1e-6) CHECK_FALSE(member(k));
  }
  CHECK_FALSE(member(0.2));
}

TEST_CASE("union line search is never below the local gain") {
  const LipschitzTable lip = LipschitzTable::symmetric(Matrix::Ones(1, 2));
  const std::vector<HistoryEntry> hist{rec(vec({-1, 0}), -0.2), rec(vec({0, 0}), -0.4)};
  const double K = union_line_search(vec({0, 0}), vec({0.3, 0.1}), hist, lip, vec({-0.4}), {},
                                     SlackState::hard(1));
  CHECK(K >= std::min(1.0, 0.4 / 0.4) - 1e-12);
}

TEST_CASE("known-cost line search") {
  ScalarFunction cost = fn([](const Vector& u) { return std::pow(u(0) - 0.3, 2) + u(1) * u(1); },
                           [](const Vector& u) { return vec({2 * (u(0) - 0.3), 2 * u(1)}); });
  const Vector u_k = vec({0, 0});
  const Vector u_bar = vec({1, 0});
  CHECK(line_search_known_cost(u_k, u_bar, &cost, kInf, {}) == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(line_search_known_cost(u_k, u_bar, &cost, 0.2, {}) == doctest::Approx(0.2).epsilon(1e-8));

  ScalarFunction loose = fn([](const Vector& u) { return u(0) - 2.0; });
  const std::vector<KnownConstraint> convex{{&loose, true}};
  CHECK(line_search_known_cost(u_k, u_bar, &cost, kInf, convex) == doctest::Approx(0.3).epsilon(1e-8));

  ScalarFunction rising = fn([](const Vector& u) { return u(0); }, [](const Vector&) { return vec({1, 0}); });
  CHECK(line_search_known_cost(u_k, u_bar, &rising, kInf, {}) == 0.0);

  ScalarFunction wall = fn([](const Vector& u) { return u(0) - 0.5; });
  const std::vector<KnownConstraint> walls{{&wall, false}};
  CHECK(line_search_known_cost(u_k, u_bar, nullptr, 0.8, walls, KnownLineSearch::MaximizeStep) ==
        doctest::Approx(0.5).epsilon(1e-6));
  CHECK(line_search_known_cost(u_k, u_bar, nullptr, 0.3, walls, KnownLineSearch::MaximizeStep) ==
        doctest::Approx(0.3));
}
