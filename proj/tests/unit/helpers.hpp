#pragma once

#include <initializer_list>
#include <vector>

#include "bar/model.hpp"

namespace testing_bar {

struct Edge {
  bar::NodeId source;
  double weight;
  char sign = '+';
};

// rows[i] lists the parents of node i, 0-based.
inline bar::ModelParams params(std::vector<std::vector<Edge>> rows, std::vector<double> b,
                               double rho_w = 0.5, double a_min = 0.1, double b_min = 0.1) {
  bar::ModelParams mp;
  mp.p = rows.size();
  mp.rows.resize(mp.p);
  for (bar::NodeId i = 0; i < mp.p; ++i)
    for (const auto& e : rows[i])
      mp.rows[i].push_back({i, e.source, e.weight, e.sign == '+' ? bar::Sign::Positive : bar::Sign::Negative});
  mp.b = std::move(b);
  mp.rho_w = rho_w;
  mp.a_min = a_min;
  mp.b_min = b_min;
  return mp;
}

inline bar::BarModel model(std::vector<std::vector<Edge>> rows, std::vector<double> b, double rho_w = 0.5) {
  return bar::BarModel::create(params(std::move(rows), std::move(b), rho_w));
}

// p=1 self-loop, a=0.6, b=0.4.
inline bar::BarModel self_loop(char sign = '+') { return model({{{0, 0.6, sign}}}, {0.4}); }

}  // namespace testing_bar
