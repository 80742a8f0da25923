#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bar/error.hpp"
#include "bar/simulate.hpp"
#include "helpers.hpp"

using namespace bar;

namespace {
double se(double p, double n) { return std::sqrt(p * (1 - p) / n); }
}  // namespace

TEST_CASE("forced draws hit the probability one branches") {
  const auto m = testing_bar::self_loop();
  const StateVector one{1}, zero{0};
  const double u_hi[] = {0.999999};
  const double u_lo[] = {0.0};
  const Bit w1[] = {1}, w0[] = {0};
  CHECK(m.expected_parameter(0, one) == doctest::Approx(0.8));
  CHECK(bar_step(m, one, StepDraws{u_hi, w1}) == one);
  CHECK(bar_step(m, zero, StepDraws{u_lo, w0}) == zero);
}

TEST_CASE("one step law matches the parameter") {
  const auto m = testing_bar::self_loop();
  const StateVector one{1};
  const CounterRng rng(42);
  const int n = 1000000;
  int ones = 0;
  for (int k = 0; k < n; ++k) ones += bar_step(m, one, rng.at(k))[0];
  CHECK(std::abs(ones / double(n) - 0.8) < 0.002);
}

TEST_CASE("trajectory contracts") {
  const auto m = testing_bar::self_loop();
  const auto t = sample_trajectory(m, 1, InitSpec::explicit_state({1}), 3);
  REQUIRE(t.n() == 1);
  CHECK(t.state(0)[0] == 1);

  const auto a = sample_trajectory(m, 500, InitSpec::burn_in(), 9);
  const auto b = sample_trajectory(m, 500, InitSpec::burn_in(), 9);
  CHECK(a == b);
  CHECK_FALSE(a == sample_trajectory(m, 500, InitSpec::burn_in(), 10));

  const auto s = sample_trajectory(m, 1000000, InitSpec::stationary(), 1);
  std::size_t ones = 0;
  for (Bit x : s.bits()) ones += x;
  CHECK(std::abs(ones / 1e6 - 0.5) < 0.002);

  const auto big = testing_bar::model(std::vector<std::vector<testing_bar::Edge>>(21, {{0, 0.5}}),
                                      std::vector<double>(21, 0.5));
  try {
    sample_trajectory(big, 10, InitSpec::stationary(), 1);
    FAIL("expected ExactTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ExactTooLarge);
  }
}

TEST_CASE("coupled step: absorption, marginals, coalescence rate") {
  const auto m = testing_bar::model({{{0, 0.3}, {1, 0.5, '-'}}, {{0, 0.6}, {2, 0.2}}, {{1, 0.8, '-'}}},
                                    {0.2, 0.2, 0.2});
  const CounterRng rng(7);
  const StateVector x{1, 0, 1}, y{0, 1, 1};
  for (int k = 0; k < 1000; ++k) {
    const auto [a, b] = coupled_step(m, x, x, rng.at(k));
    REQUIRE(a == b);
  }
  // each side keeps the one-step law of the uncoupled kernel
  const int n = 200000;
  std::vector<int> cx(3), cy(3);
  for (int k = 0; k < n; ++k) {
    const auto [a, b] = coupled_step(m, x, y, rng.at(k));
    for (int i = 0; i < 3; ++i) cx[i] += a[i], cy[i] += b[i];
  }
  for (NodeId i = 0; i < 3; ++i) {
    const double px = m.expected_parameter(i, x), py = m.expected_parameter(i, y);
    CHECK(std::abs(cx[i] / double(n) - px) < 4 * se(px, n) + 1e-9);
    CHECK(std::abs(cy[i] / double(n) - py) < 4 * se(py, n) + 1e-9);
  }

  const auto loop = testing_bar::self_loop();
  const StateVector one{1}, zero{0};
  int met = 0;
  for (int k = 0; k < n; ++k) {
    const auto [a, b] = coupled_step(loop, one, zero, rng.at(k));
    met += a == b;
  }
  CHECK(std::abs(met / double(n) - 0.4) < 4 * se(0.4, n));

  const double u[] = {0.3, 0.6, 0.1};
  const Bit w[] = {1, 0, 1};
  const StateVector z{0, 0, 0};
  const auto [a, b] = coupled_step(m, z, z, StepDraws{u, w});
  CHECK(a == b);
  CHECK(a == bar_step(m, z, StepDraws{u, w}));
}

TEST_CASE("coupling time distribution on the self loop") {
  const auto loop = testing_bar::self_loop();
  const StateVector one{1}, zero{0};
  const auto same = coupling_time(loop, one, one, 100, 1, 50);
  for (auto t : same.times) CHECK(t == 0);

  const auto ct = coupling_time(loop, one, zero, 1000, 1, 100000);
  CHECK(ct.censored_count() == 0);
  CHECK(std::abs(ct.mean() - 2.5) < 0.05);
  // geometric(0.4): P(T > n) = 0.6^n
  CHECK(std::abs(ct.survival(2) - 0.36) < 0.01);
  REQUIRE(ct.quantile_time(0.125));
  CHECK(*ct.quantile_time(0.125) == 5);  // 0.6^4 = 0.13 > 0.125 >= 0.6^5
}

TEST_CASE("hypercube walk") {
  const auto loop = testing_bar::self_loop();
  const StateVector one{1};
  const CounterRng rng(5);
  for (int k = 0; k < 100; ++k) CHECK(rw_step(loop, one, rng.at(k), 1.0) == one);

  const int n = 1000000;
  int ones = 0;
  for (int k = 0; k < n; ++k) ones += rw_step(loop, one, rng.at(k))[0];
  CHECK(std::abs(ones / double(n) - 0.8) < 0.002);

  const auto m = testing_bar::model({{{0, 0.3}, {1, 0.5, '-'}}, {{0, 0.6}, {1, 0.2}}}, {0.2, 0.2});
  const StateVector x{1, 0};
  for (int k = 0; k < 1000; ++k) {
    const auto y = rw_step(m, x, rng.at(k));
    CHECK((y[0] != x[0]) + (y[1] != x[1]) <= 1);
  }
}

TEST_CASE("trajectory CSV round trip") {
  const auto m = testing_bar::model({{{0, 0.3}, {1, 0.5, '-'}}, {{0, 0.6}, {1, 0.2}}}, {0.2, 0.2});
  const auto t = sample_trajectory(m, 300, InitSpec::burn_in(), 77);
  std::stringstream ss;
  write_trajectory_csv(t, ss);
  const auto back = read_trajectory_csv(ss);
  CHECK(back.bits().size() == t.bits().size());
  CHECK(std::equal(back.bits().begin(), back.bits().end(), t.bits().begin()));
  CHECK(back.seed() == 77);

  std::stringstream bad("x1,x2\n0,2\n");
  CHECK_THROWS_AS(read_trajectory_csv(bad), Error);
}
