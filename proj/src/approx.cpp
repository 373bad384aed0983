#include "qpamdp/approx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qpamdp {

StateScaler::StateScaler(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw DimensionMismatch("state scaler upper bounds", lower_.size(), upper_.size());
  }
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i])) {
      throw Error("state scaler: lower[" + std::to_string(i) + "] must be < upper");
    }
  }
}

StateVector StateScaler::scale(const StateVector& s) const {
  if (s.size() != lower_.size()) throw DimensionMismatch("scale_state", lower_.size(), s.size());
  StateVector out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out[i] = std::clamp((s[i] - lower_[i]) / (upper_[i] - lower_[i]), 0.0, 1.0);
  }
  return out;
}

namespace {

// Appends every assignment of values 1..order to the dims in `support`.
void emit_support(const std::vector<int>& support, int n, int order, std::vector<std::vector<int>>& out) {
  std::vector<int> values(support.size(), 1);
  while (true) {
    std::vector<int> c(n, 0);
    for (std::size_t i = 0; i < support.size(); ++i) c[support[i]] = values[i];
    out.push_back(std::move(c));
    // odometer, last support dim fastest
    std::size_t k = values.size();
    while (k > 0) {
      --k;
      if (values[k] < order) {
        ++values[k];
        std::fill(values.begin() + static_cast<long>(k) + 1, values.end(), 1);
        break;
      }
      if (k == 0) return;
    }
    if (values.empty()) return;
  }
}

void emit_subsets(const std::vector<int>& dims, std::size_t size, std::size_t start, std::vector<int>& current,
                  int n, int order, std::vector<std::vector<int>>& out) {
  if (current.size() == size) {
    emit_support(current, n, order, out);
    return;
  }
  for (std::size_t i = start; i < dims.size(); ++i) {
    current.push_back(dims[i]);
    emit_subsets(dims, size, i + 1, current, n, order, out);
    current.pop_back();
  }
}

}  // namespace

FourierBasis FourierBasis::generate(int n, int order, int max_nonzero, const std::set<int>& excluded_dims) {
  if (n < 1) throw Error("fourier basis: state dimension must be >= 1");
  if (order < 1) throw Error("fourier basis: order must be >= 1");
  if (max_nonzero < 1 || max_nonzero > n) throw Error("fourier basis: max_nonzero must be in [1, n]");
  for (int d : excluded_dims) {
    if (d < 0 || d >= n) {
      throw Error("fourier basis: excluded dimension " + std::to_string(d) + " out of range for n = " +
                  std::to_string(n));
    }
  }

  FourierBasis basis;
  basis.n_ = n;
  basis.order_ = order;
  basis.max_nonzero_ = max_nonzero;
  basis.excluded_ = excluded_dims;

  std::vector<int> active;
  for (int d = 0; d < n; ++d) {
    if (!excluded_dims.contains(d)) active.push_back(d);
  }
  basis.coefficients_.push_back(std::vector<int>(n, 0));
  std::vector<int> current;
  const auto max_support = std::min<std::size_t>(max_nonzero, active.size());
  for (std::size_t k = 1; k <= max_support; ++k) {
    emit_subsets(active, k, 0, current, n, order, basis.coefficients_);
  }

  basis.lr_scales_.resize(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    double norm2 = 0.0;
    for (int v : basis.coefficients_[i]) norm2 += static_cast<double>(v) * v;
    basis.lr_scales_[i] = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 1.0;
  }
  return basis;
}

FourierBasis FourierBasis::generate(int n, const BasisSpec& spec) {
  return generate(n, spec.order, std::min(spec.max_nonzero, n), spec.excluded_dims);
}

Vector FourierBasis::features(const StateVector& s_scaled) const {
  if (s_scaled.size() != n_) throw DimensionMismatch("fourier_features", n_, s_scaled.size());
  Vector out(size());
  for (int i = 0; i < size(); ++i) {
    double dot = 0.0;
    const auto& c = coefficients_[i];
    for (int d = 0; d < n_; ++d) {
      if (c[d] != 0) dot += c[d] * s_scaled[d];
    }
    out[i] = std::cos(std::numbers::pi * dot);
  }
  return out;
}

QWeights::QWeights(int num_actions, int num_features) : weights(RowMatrix::Zero(num_actions, num_features)) {}

double q_value(const QWeights& q, const Vector& features, ActionId a) {
  if (a < 0 || a >= q.num_actions()) throw Error("q_value: unknown action id " + std::to_string(a));
  if (features.size() != q.num_features()) {
    throw DimensionMismatch("q_value features", q.num_features(), features.size());
  }
  return q.weights.row(a).dot(features);
}

double q_value(const QWeights& q, const FourierBasis& basis, const StateVector& s_scaled, ActionId a) {
  return q_value(q, basis.features(s_scaled), a);
}

Vector q_values(const QWeights& q, const Vector& features) {
  if (features.size() != q.num_features()) {
    throw DimensionMismatch("q_values features", q.num_features(), features.size());
  }
  return q.weights * features;
}

}  // namespace qpamdp
