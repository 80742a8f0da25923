#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bar/model.hpp"
#include "bar/rng.hpp"
#include "bar/simulate.hpp"

namespace bar {

enum class BoolOp { And, Or, Id };
std::string_view to_string(BoolOp op) noexcept;

struct Literal {
  NodeId node = 0;
  bool negated = false;
  friend bool operator==(const Literal&, const Literal&) = default;
};

struct BoolRule {
  BoolOp op = BoolOp::Id;
  std::vector<Literal> literals;
  friend bool operator==(const BoolRule&, const BoolRule&) = default;
};

/// Noisy synchronous boolean network: each node evaluates its rule on the
/// current state and the result is flipped with probability `noise`.
struct BooleanNetwork {
  std::size_t p = 0;
  std::vector<BoolRule> rules;  // rules[i] drives node i
  double noise = 0.0;
  friend bool operator==(const BooleanNetwork&, const BooleanNetwork&) = default;
};

/// One rule per line, `<id> = <OP>(<lit>{, <lit>})` with `<lit> ::= <id> | !<id>`
/// and OP one of AND, OR, ID (ID takes exactly one literal). Ids run 1..p and
/// each node is defined once. Blank lines and `#` comments are skipped; an
/// optional `noise = <real>` line sets the flip probability (default 0).
/// Errors: ParseError with the line number, UnknownNode for ids outside 1..p.
BooleanNetwork parse_rules(std::string_view text);
std::string rules_to_text(const BooleanNetwork& net);

bool evaluate(const BoolRule& rule, std::span<const Bit> x) noexcept;
StateVector boolean_step(const BooleanNetwork& net, std::span<const Bit> x, CounterRng::Step rng);

/// fan_in distinct parents per node drawn uniformly, operator uniform on
/// {AND, OR}, each literal negated with probability 1/2.
BooleanNetwork random_andor_network(std::size_t p, std::size_t fan_in, double noise, std::uint64_t seed);

/// Parents are the literal nodes; negated literals count as negative edges.
GraphTruth truth_from_network(const BooleanNetwork& net);

std::uint64_t network_hash(const BooleanNetwork& net);

/// Uniform random start, `burn_in` discarded steps, then n recorded states.
Trajectory sample_boolean(const BooleanNetwork& net, std::size_t n, std::size_t burn_in, std::uint64_t seed,
                          std::uint64_t replica = 0);

}  // namespace bar
