#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bar/error.hpp"
#include "bar/model.hpp"
#include "helpers.hpp"

using namespace bar;
using testing_bar::Edge;
using testing_bar::params;

namespace {
ModelParams two_node(double b0 = 0.2) { return params({{{1, 0.8}}, {{0, 0.5}}}, {b0, 0.5}); }
}  // namespace

TEST_CASE("validate accepts a well formed two node model") {
  CHECK_FALSE(validate(two_node()).has_value());
  CHECK_NOTHROW(BarModel::create(two_node()));
}

TEST_CASE("validate reports the first broken invariant") {
  auto v = validate(two_node(0.3));
  REQUIRE(v);
  CHECK(v->kind == ErrorKind::RowSumViolation);
  CHECK(v->node == NodeId{0});

  v = validate(params({{{0, 0.05}}}, {0.95}));
  REQUIRE(v);
  CHECK(v->kind == ErrorKind::WeightBelowFloor);

  v = validate(params({{{0, 0.95}}}, {0.05}));
  REQUIRE(v);
  CHECK(v->kind == ErrorKind::NoiseBelowFloor);

  v = validate(params({{}}, {1.0}));
  REQUIRE(v);
  CHECK(v->kind == ErrorKind::EmptyParentSet);

  v = validate(params({{{0, 0.4}, {0, 0.4}}}, {0.2}));
  REQUIRE(v);
  CHECK(v->kind == ErrorKind::DuplicateEdge);

  try {
    BarModel::create(two_node(0.3));
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RowSumViolation);
  }
}

TEST_CASE("d_star matches a brute force search") {
  CHECK(d_star(0.1, 0.1) == 9);
  CHECK(d_star(0.5, 0.5) == 1);
  CHECK_THROWS_AS(d_star(0.6, 0.5), Error);
  for (double a : {0.05, 0.1, 0.13, 0.2, 0.3}) {
    for (double b : {0.1, 0.15, 0.3}) {
      std::size_t best = 0;
      for (std::size_t d = 1; d < 100; ++d)
        if (a * static_cast<double>(d) + b <= 1.0 + 1e-12) best = d;
      CHECK(d_star(a, b) == best);
    }
  }
}

TEST_CASE("random_model produces valid, reproducible models") {
  RandomModelSpec spec{3, {3, 3, 3}};
  const auto g = random_model(spec, 11);
  for (NodeId i = 0; i < 3; ++i) CHECK(g.truth.parents[i] == std::vector<NodeId>{0, 1, 2});

  spec = RandomModelSpec{12, std::vector<std::size_t>(12, 3)};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = random_model(spec, seed);
    CHECK_FALSE(validate(m.model.params()).has_value());
    for (NodeId i = 0; i < 12; ++i) {
      double s = m.model.b(i);
      for (const auto& e : m.model.parents(i)) s += e.weight;
      CHECK(std::abs(s - 1.0) < 1e-12);
      CHECK(m.model.b(i) >= 0.1 - 1e-15);
      CHECK(m.model.b(i) <= 0.2 + 1e-15);
      CHECK(m.truth.parents[i].size() == 3);
    }
  }
  CHECK(random_model(spec, 5).model.params() == random_model(spec, 5).model.params());
  CHECK_FALSE(random_model(spec, 5).model.params() == random_model(spec, 6).model.params());
}

TEST_CASE("edge inclusion frequency is d/p") {
  const RandomModelSpec spec{30, std::vector<std::size_t>(30, 3)};
  const int draws = 10000;
  int hits_a = 0, hits_b = 0;
  for (int s = 0; s < draws; ++s) {
    const auto t = random_model(spec, static_cast<std::uint64_t>(s)).truth;
    const auto has = [&](NodeId i, NodeId j) {
      return std::find(t.parents[i].begin(), t.parents[i].end(), j) != t.parents[i].end();
    };
    hits_a += has(4, 17);
    hits_b += has(29, 29);
  }
  CHECK(std::abs(hits_a / double(draws) - 0.1) < 0.01);
  CHECK(std::abs(hits_b / double(draws) - 0.1) < 0.01);
}

TEST_CASE("JSON round trip is value identical") {
  const RandomModelSpec spec{7, {1, 2, 3, 1, 2, 3, 2}};
  const auto m = random_model(spec, 3).model;
  const auto text = model_to_json(m);
  const auto back = model_from_json(text);
  CHECK(back.params() == m.params());
  CHECK(model_to_json(back) == text);
  CHECK(back.hash() == m.hash());
}

TEST_CASE("JSON errors carry the right kind") {
  const auto kind_of = [](const std::string& text) {
    try {
      model_from_json(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IOError;
  };
  CHECK(kind_of("{not json") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"p":1,"rho_w":0.5,"a_min":0.1,"b_min":0.1,"nodes":[{"id":1,"b":0.4,"parents":[{"j":2,"a":0.6,"sign":"+"}]}]})") ==
        ErrorKind::UnknownNode);
  CHECK(kind_of(R"({"p":1,"rho_w":0.5,"a_min":0.1,"b_min":0.1,"nodes":[{"id":1,"b":0.3,"parents":[{"j":1,"a":0.6,"sign":"+"}]}]})") ==
        ErrorKind::RowSumViolation);
}

TEST_CASE("truth splits parents by sign") {
  const auto m = testing_bar::model({{{0, 0.3, '+'}, {1, 0.5, '-'}}, {{1, 0.8}}}, {0.2, 0.2});
  const auto t = m.truth();
  CHECK(t.positive[0] == std::vector<NodeId>{0});
  CHECK(t.negative[0] == std::vector<NodeId>{1});
  CHECK(t.edge_count() == 3);
  CHECK(t.d == 2);
  CHECK_FALSE(m.sign_free());
  const auto cols = m.column_sums();
  CHECK(cols[0] == doctest::Approx(0.3));
  CHECK(cols[1] == doctest::Approx(1.3));
}
