#pragma once

// Two-tier PAMDP policy: a softmax over Q for the discrete action, and a
// Gaussian over each action's continuous parameters.

#include <functional>
#include <memory>
#include <vector>

#include "qpamdp/approx.hpp"
#include "qpamdp/core.hpp"

namespace qpamdp {

// Boltzmann probabilities exp(q/tau) / sum exp(q/tau), max-subtracted.
Vector discrete_action_probabilities(const Vector& q_values, double temperature);

struct SoftmaxDiscretePolicy {
  // A temperature of exactly 0 selects argmax Q (lowest id on ties). It is a
  // degenerate sampling mode only; densities and scores require tau > 0.
  double temperature = 1.0;
};

// Per-action state features psi_a(s) for the parameter policy.
class FeatureMap {
 public:
  using Fn = std::function<Vector(ActionId, const StateVector&)>;

  FeatureMap() = default;
  FeatureMap(std::vector<int> dims, Fn fn);

  // Constant feature (1) for every action.
  static FeatureMap constant(int num_actions);

  Vector operator()(ActionId a, const StateVector& s) const;
  int dim(ActionId a) const;
  int num_actions() const { return static_cast<int>(dims_.size()); }

 private:
  std::vector<int> dims_;
  Fn fn_;
};

class GaussianParameterPolicy {
 public:
  GaussianParameterPolicy() = default;
  // theta[a] has shape (param_dim_a, feature_dim_a); variances[a] is the
  // diagonal of Sigma_a with length param_dim_a.
  GaussianParameterPolicy(std::vector<Matrix> theta, std::vector<Vector> variances, FeatureMap features);

  int num_actions() const { return static_cast<int>(theta_.size()); }
  int param_dim(ActionId a) const { return static_cast<int>(theta_.at(a).rows()); }
  const Matrix& theta(ActionId a) const { return theta_.at(a); }
  const Vector& variances(ActionId a) const { return variances_.at(a); }
  const FeatureMap& features() const { return features_; }

  void set_theta(ActionId a, Matrix theta);
  void set_variances(ActionId a, Vector variances);

  Vector mean(ActionId a, const StateVector& s) const;
  // Raw (unclamped) sample from N(mean, Sigma_a).
  Vector sample(ActionId a, const StateVector& s, Rng& rng) const;

  // Flat theta: actions in id order, each theta_a in row-major order.
  int flat_size() const;
  Vector flat_theta() const;
  void set_flat_theta(const Vector& flat);
  int block_offset(ActionId a) const;

 private:
  void check_shapes() const;

  std::vector<Matrix> theta_;
  std::vector<Vector> variances_;
  FeatureMap features_;
};

double gaussian_log_density(const GaussianParameterPolicy& policy, const StateVector& s, ActionId a,
                            const Vector& x);

// Score of the Gaussian head w.r.t. the flat theta of all actions. Only the
// block of action a is non-zero: psi_a(s) (x) Sigma_a^-1 (x - mean).
Vector grad_log_parameter_policy(const GaussianParameterPolicy& policy, const StateVector& s, ActionId a,
                                 const Vector& x);
// Adds the score into out (length flat_size()) without allocating the full vector.
void accumulate_grad_log_parameter_policy(const GaussianParameterPolicy& policy, const StateVector& s,
                                          ActionId a, const Vector& x, Eigen::Ref<Vector> out);

// Score of the softmax head w.r.t. flat omega:
// block b = phi(s) / tau * ([a == b] - p(b|s)).
Vector grad_log_discrete_policy(const QWeights& q, const FourierFeatures& phi, const StateVector& s, ActionId a,
                                double temperature);
void accumulate_grad_log_discrete_policy(const QWeights& q, const Vector& features, ActionId a,
                                         double temperature, Eigen::Ref<Vector> out);

class CompositePolicy {
 public:
  CompositePolicy() = default;
  CompositePolicy(SoftmaxDiscretePolicy discrete, std::shared_ptr<const FourierFeatures> phi, QWeights q,
                  GaussianParameterPolicy parameters);

  SoftmaxDiscretePolicy discrete;
  std::shared_ptr<const FourierFeatures> phi;
  QWeights q;
  GaussianParameterPolicy parameters;

  int num_actions() const { return q.num_actions(); }
  Vector action_probabilities(const StateVector& s) const;
  Vector action_probabilities_from_features(const Vector& features) const;
  ActionId sample_discrete(const Vector& features, Rng& rng) const;
  double log_density(const StateVector& s, ActionId a, const Vector& x) const;
};

struct SampledAction {
  ParameterizedAction action;  // clamped into schema bounds
  Vector raw_params;           // Gaussian sample before clamping
};

// a ~ softmax(Q(s, .)), x ~ N(theta_a^T psi_a(s), Sigma_a), then clamped.
SampledAction sample_action(const CompositePolicy& policy, std::span<const ActionSchema> schemas,
                            const StateVector& s, Rng& rng);
// Same, reusing precomputed Fourier features of s.
SampledAction sample_action(const CompositePolicy& policy, std::span<const ActionSchema> schemas,
                            const StateVector& s, const Vector& features, Rng& rng);

}  // namespace qpamdp
