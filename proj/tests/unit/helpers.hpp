#pragma once

#include <cmath>
#include <vector>

#include "qpamdp/envs/domain.hpp"
#include "qpamdp/learn.hpp"

namespace testing {

using namespace qpamdp;

// Toy composite policy with explicit means, variances and Q weights
// (one constant feature per action).
inline CompositePolicy toy_policy(const envs::Domain& d, std::vector<double> theta, std::vector<double> var,
                                  double temperature, std::vector<double> q = {}) {
  CompositePolicy pi = d.initial_policy();
  for (int a = 0; a < pi.parameters.num_actions(); ++a) {
    pi.parameters.set_theta(a, Matrix::Constant(1, 1, theta[a]));
    pi.parameters.set_variances(a, Vector::Constant(1, var[a]));
    if (!q.empty()) pi.q.weights(a, 0) = q[a];
  }
  pi.discrete.temperature = temperature;
  return pi;
}

// Central difference of f at x along every coordinate.
template <class F>
Vector central_difference(F&& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
}

}  // namespace testing
