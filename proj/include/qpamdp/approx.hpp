#pragma once

// Fourier-basis features and the linear action-value function over them.

#include <set>
#include <vector>

#include "qpamdp/core.hpp"

namespace qpamdp {

class StateScaler {
 public:
  StateScaler() = default;
  StateScaler(Vector lower, Vector upper);

  // Maps each component into [0, 1] (clamped).
  StateVector scale(const StateVector& s) const;

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  int dim() const { return static_cast<int>(lower_.size()); }

 private:
  Vector lower_;
  Vector upper_;
};

struct BasisSpec {
  int order = 2;
  int max_nonzero = 2;
  std::set<int> excluded_dims;
};

class FourierBasis {
 public:
  FourierBasis() = default;

  // Enumerates every coefficient vector in {0..order}^n with at most
  // max_nonzero non-zero entries and zeros on excluded_dims. The zero vector
  // comes first, then vectors by increasing number of non-zeros, then
  // lexicographically over dimension indices and coefficient values.
  static FourierBasis generate(int n, int order, int max_nonzero, const std::set<int>& excluded_dims);
  static FourierBasis generate(int n, const BasisSpec& spec);

  int size() const { return static_cast<int>(coefficients_.size()); }
  int state_dim() const { return n_; }
  int order() const { return order_; }
  int max_nonzero() const { return max_nonzero_; }
  const std::set<int>& excluded_dims() const { return excluded_; }
  const std::vector<std::vector<int>>& coefficients() const { return coefficients_; }

  // cos(pi * c_i . s) for every coefficient vector; s must be scaled to [0,1].
  Vector features(const StateVector& s_scaled) const;
  // 1 / ||c_i||_2, with 1 for the constant feature.
  const Vector& learning_rate_scales() const { return lr_scales_; }

 private:
  int n_ = 0;
  int order_ = 0;
  int max_nonzero_ = 0;
  std::set<int> excluded_;
  std::vector<std::vector<int>> coefficients_;
  Vector lr_scales_;
};

// Scaler + basis: the full state -> feature pipeline for Q.
struct FourierFeatures {
  StateScaler scaler;
  FourierBasis basis;

  Vector operator()(const StateVector& s) const { return basis.features(scaler.scale(s)); }
  int size() const { return basis.size(); }
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One row of weights per discrete action. Row-major storage makes the flat
// concatenation (omega) contiguous.
struct QWeights {
  RowMatrix weights;

  QWeights() = default;
  QWeights(int num_actions, int num_features);

  int num_actions() const { return static_cast<int>(weights.rows()); }
  int num_features() const { return static_cast<int>(weights.cols()); }
  Eigen::Map<const Vector> flat() const { return {weights.data(), weights.size()}; }
  Eigen::Map<Vector> flat() { return {weights.data(), weights.size()}; }
  bool all_finite() const { return weights.allFinite(); }
};

double q_value(const QWeights& q, const FourierBasis& basis, const StateVector& s_scaled, ActionId a);
double q_value(const QWeights& q, const Vector& features, ActionId a);
Vector q_values(const QWeights& q, const Vector& features);

}  // namespace qpamdp
