#include <doctest.h>

#include <cmath>

#include "bar/bounds.hpp"
#include "bar/error.hpp"
#include "bar/exactchain.hpp"
#include "bar/simulate.hpp"
#include "helpers.hpp"

using namespace bar;
using testing_bar::model;

namespace {
// node 0: state index bit 0
double p_next(const ExactChain& c, std::size_t from, std::size_t to) { return c.transition()(from, to); }
}  // namespace

TEST_CASE("two state chains") {
  const auto pos = build_transition(testing_bar::self_loop('+'));
  CHECK(p_next(pos, 1, 1) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(p_next(pos, 1, 0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(p_next(pos, 0, 1) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(pos.stationary()[0] == doctest::Approx(0.5).epsilon(1e-12));

  const auto neg = build_transition(testing_bar::self_loop('-'));
  CHECK(p_next(neg, 1, 1) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(p_next(neg, 0, 1) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(neg.stationary()[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("transition rows are distributions and pi is stationary") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const RandomModelSpec spec{6, {1, 2, 3, 2, 1, 3}};
    const auto c = build_transition(random_model(spec, s).model);
    CHECK(c.row_residual() < 1e-12);
    CHECK(c.stationarity_residual() < 1e-10);
    // brute force: product of per-node Bernoulli laws
    const auto& m = c.model();
    for (std::size_t x : {std::size_t{0}, std::size_t{13}, std::size_t{63}}) {
      const auto xs = state_from_index(x, 6);
      for (std::size_t y : {std::size_t{5}, std::size_t{40}}) {
        double prod = 1.0;
        for (NodeId i = 0; i < 6; ++i) {
          const double q = m.expected_parameter(i, xs);
          prod *= ((y >> i) & 1) ? q : 1 - q;
        }
        CHECK(p_next(c, x, y) == doctest::Approx(prod).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("TV curve of the self loop is 0.5 * 0.6^n") {
  const auto c = build_transition(testing_bar::self_loop());
  const auto curve = tv_curve(c, 12);
  for (std::size_t n = 0; n <= 12; ++n) CHECK(curve[n] == doctest::Approx(0.5 * std::pow(0.6, n)).epsilon(1e-10));
  CHECK(tv_to_stationarity(c, 7) == doctest::Approx(0.5 * std::pow(0.6, 7)).epsilon(1e-10));
  CHECK(exact_mixing_time(c, 0.125) == 3);  // 0.108 <= 0.125 < 0.18
  CHECK(exact_mixing_time(c, 0.25) <= exact_mixing_time(c, 0.125));
  CHECK(exact_mixing_time(c, 0.125) <= exact_mixing_time(c, 1.0 / 16));

  const RandomModelSpec spec{5, {2, 2, 2, 2, 2}};
  const auto r = build_transition(random_model(spec, 4).model);
  const auto rc = tv_curve(r, 40);
  for (std::size_t n = 1; n < rc.size(); ++n) CHECK(rc[n] <= rc[n - 1] + 1e-12);
}

TEST_CASE("nu on small chains") {
  CHECK(exact_nu(build_transition(testing_bar::self_loop('+')), 0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(exact_nu(build_transition(testing_bar::self_loop('-')), 0, 0) == doctest::Approx(-0.6).epsilon(1e-12));

  const auto blocks = model({{{0, 0.6}}, {{1, 0.7, '-'}}}, {0.4, 0.3});
  const auto c = build_transition(blocks);
  CHECK(std::abs(exact_nu(c, 0, 1)) < 1e-12);
  CHECK(std::abs(exact_nu(c, 1, 0)) < 1e-12);
  const auto margin = identifiability_margin(c, blocks.truth());
  CHECK(margin.chi[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(margin.chi[1] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(margin.identifiable);

  const auto nu = exact_nu_matrix(c);
  for (NodeId m = 0; m < 2; ++m)
    for (NodeId l = 0; l < 2; ++l) CHECK(nu(m, l) == doctest::Approx(exact_nu(c, m, l)).epsilon(1e-12));
}

TEST_CASE("nu decomposes into weights times conditional parent means") {
  // nu_{m|l} = sum_j a_mj (E[f(X_j) | X_l = 1] - E[f(X_j) | X_l = 0])
  for (std::uint64_t s = 0; s < 8; ++s) {
    const RandomModelSpec spec{5, {2, 1, 3, 2, 2}};
    const auto m = random_model(spec, 100 + s).model;
    const auto c = build_transition(m);
    for (NodeId i = 0; i < 5; ++i)
      for (NodeId l = 0; l < 5; ++l) {
        double sum = 0.0;
        for (const auto& e : m.parents(i)) {
          const double d = conditional_bit_mean(c, e.source, l, 1) - conditional_bit_mean(c, e.source, l, 0);
          sum += e.weight * (e.sign == Sign::Positive ? d : -d);
        }
        CHECK(exact_nu(c, i, l) == doctest::Approx(sum).epsilon(1e-10));
      }
  }
}

TEST_CASE("a weak parent shadowed by a strong non-parent") {
  // node 0 follows node 1 closely; node 1's second parent (node 2) is weak
  const auto m = model({{{1, 0.8}}, {{1, 0.7}, {2, 0.1}}, {{1, 0.5}, {2, 0.3}}}, {0.2, 0.2, 0.2});
  const auto c = build_transition(m);
  const double weak = std::abs(exact_nu(c, 1, 2));
  const double shadow = std::abs(exact_nu(c, 1, 0));
  const auto margin = identifiability_margin(c, m.truth());
  CHECK(shadow >= weak);
  CHECK(margin.chi[1] == doctest::Approx(std::min(weak, std::abs(exact_nu(c, 1, 1))) - shadow).epsilon(1e-12));
  CHECK(margin.chi[1] <= 0.0);
  CHECK_FALSE(margin.identifiable);
}

TEST_CASE("conditionals") {
  const auto m = model({{{0, 0.8}}, {{1, 0.5}}}, {0.2, 0.5});
  const auto c = build_transition(m);
  const NodeId both[] = {0, 1};
  for (Bit x2 : {Bit{0}, Bit{1}}) {
    const Bit hi[] = {1, x2}, lo[] = {0, x2};
    CHECK(exact_conditional(c, 0, both, hi) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(exact_conditional(c, 0, both, lo) == doctest::Approx(0.1).epsilon(1e-12));
  }
  // favourable polarity on S(i) gives sum a + b rho_w
  const auto r = random_model(RandomModelSpec{4, {2, 2, 2, 2}, 0.1, 0.1, 0.2, 0.5, 0.5}, 8).model;
  const auto rc = build_transition(r);
  for (NodeId i = 0; i < 4; ++i) {
    std::vector<NodeId> s;
    std::vector<Bit> x;
    double top = r.b(i) * r.rho_w();
    for (const auto& e : r.parents(i)) {
      s.push_back(e.source);
      x.push_back(e.sign == Sign::Positive ? 1 : 0);
      top += e.weight;
    }
    CHECK(exact_conditional(rc, i, s, x) == doctest::Approx(top).epsilon(1e-10));
    CHECK(exact_conditional(rc, i, {}, {}) == doctest::Approx(exact_marginals(rc)[i]).epsilon(1e-10));
  }
}

TEST_CASE("stationary marginals by the linear solve") {
  const auto neg = stationary_marginals(testing_bar::self_loop('-'));
  CHECK(neg[0] == doctest::Approx(0.8 / 1.6).epsilon(1e-12));
  for (std::uint64_t s = 0; s < 10; ++s) {
    RandomModelSpec spec{6, {2, 3, 1, 2, 2, 3}};
    spec.sign_prob = 1.0;
    spec.rho_w = 0.3;
    for (double v : stationary_marginals(random_model(spec, s).model)) CHECK(v == doctest::Approx(0.3).epsilon(1e-9));
    spec.sign_prob = 0.5;
    const auto m = random_model(spec, s).model;
    const auto solved = stationary_marginals(m);
    const auto exact = exact_marginals(build_transition(m));
    for (NodeId i = 0; i < 6; ++i) CHECK(std::abs(solved[i] - exact[i]) < 1e-9);
  }
}

TEST_CASE("exact mixing never exceeds the closed form bound") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto m = random_model(RandomModelSpec{4, {2, 1, 2, 3}}, 30 + s).model;
    const auto c = build_transition(m);
    for (double theta : {0.25, 0.125, 0.0625})
      CHECK(static_cast<long long>(exact_mixing_time(c, theta)) <= mixing_bound(m, theta).primary);
  }
}

TEST_CASE("size cap") {
  const auto big = model(std::vector<std::vector<testing_bar::Edge>>(21, {{0, 0.5}}), std::vector<double>(21, 0.5));
  try {
    build_transition(big);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooLarge);
  }
}
