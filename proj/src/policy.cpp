#include "qpamdp/policy.hpp"

#include <cmath>
#include <numbers>

namespace qpamdp {

Vector discrete_action_probabilities(const Vector& q_values, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error("softmax: temperature must be a finite positive number");
  }
  if (q_values.size() == 0) throw Error("softmax: empty action set");
  if (!q_values.allFinite()) throw Error("softmax: non-finite Q values");
  const double top = q_values.maxCoeff();
  Vector p = ((q_values.array() - top) / temperature).exp().matrix();
  p /= p.sum();
  return p;
}

FeatureMap::FeatureMap(std::vector<int> dims, Fn fn) : dims_(std::move(dims)), fn_(std::move(fn)) {}

FeatureMap FeatureMap::constant(int num_actions) {
  return FeatureMap(std::vector<int>(num_actions, 1),
                    [](ActionId, const StateVector&) { return Vector::Ones(1).eval(); });
}

int FeatureMap::dim(ActionId a) const {
  if (a < 0 || a >= num_actions()) throw Error("feature map: unknown action id " + std::to_string(a));
  return dims_[a];
}

Vector FeatureMap::operator()(ActionId a, const StateVector& s) const {
  const int expected = dim(a);
  Vector out = fn_(a, s);
  if (out.size() != expected) throw DimensionMismatch("parameter features", expected, out.size());
  return out;
}

GaussianParameterPolicy::GaussianParameterPolicy(std::vector<Matrix> theta, std::vector<Vector> variances,
                                                 FeatureMap features)
    : theta_(std::move(theta)), variances_(std::move(variances)), features_(std::move(features)) {
  check_shapes();
}

void GaussianParameterPolicy::check_shapes() const {
  if (variances_.size() != theta_.size()) {
    throw DimensionMismatch("gaussian policy variances", static_cast<long>(theta_.size()),
                            static_cast<long>(variances_.size()));
  }
  if (features_.num_actions() != num_actions()) {
    throw DimensionMismatch("gaussian policy feature maps", num_actions(), features_.num_actions());
  }
  for (int a = 0; a < num_actions(); ++a) {
    if (theta_[a].cols() != features_.dim(a)) {
      throw DimensionMismatch("theta columns for action " + std::to_string(a), features_.dim(a),
                              theta_[a].cols());
    }
    if (variances_[a].size() != theta_[a].rows()) {
      throw DimensionMismatch("covariance diagonal for action " + std::to_string(a), theta_[a].rows(),
                              variances_[a].size());
    }
    if ((variances_[a].array() < 0.0).any()) throw Error("gaussian policy: negative variance");
  }
}

void GaussianParameterPolicy::set_theta(ActionId a, Matrix theta) {
  theta_.at(a) = std::move(theta);
  check_shapes();
}

void GaussianParameterPolicy::set_variances(ActionId a, Vector variances) {
  variances_.at(a) = std::move(variances);
  check_shapes();
}

Vector GaussianParameterPolicy::mean(ActionId a, const StateVector& s) const {
  return theta_.at(a) * features_(a, s);
}

Vector GaussianParameterPolicy::sample(ActionId a, const StateVector& s, Rng& rng) const {
  Vector x = mean(a, s);
  const Vector& var = variances_[a];
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] += std::sqrt(var[i]) * rng.normal();
  }
  return x;
}

int GaussianParameterPolicy::flat_size() const {
  int n = 0;
  for (const auto& t : theta_) n += static_cast<int>(t.size());
  return n;
}

int GaussianParameterPolicy::block_offset(ActionId a) const {
  int off = 0;
  for (int b = 0; b < a; ++b) off += static_cast<int>(theta_.at(b).size());
  return off;
}

Vector GaussianParameterPolicy::flat_theta() const {
  Vector out(flat_size());
  int off = 0;
  for (const auto& t : theta_) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) out[off++] = t(r, c);
    }
  }
  return out;
}

void GaussianParameterPolicy::set_flat_theta(const Vector& flat) {
  if (flat.size() != flat_size()) throw DimensionMismatch("flat theta", flat_size(), flat.size());
  int off = 0;
  for (auto& t : theta_) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = flat[off++];
    }
  }
}

namespace {

void check_param(const GaussianParameterPolicy& policy, ActionId a, const Vector& x) {
  if (a < 0 || a >= policy.num_actions()) throw Error("gaussian policy: unknown action id " + std::to_string(a));
  if (x.size() != policy.param_dim(a)) throw DimensionMismatch("parameter vector", policy.param_dim(a), x.size());
  if ((policy.variances(a).array() <= 0.0).any()) {
    throw Error("gaussian policy: density requires strictly positive variances");
  }
}

}  // namespace

double gaussian_log_density(const GaussianParameterPolicy& policy, const StateVector& s, ActionId a,
                            const Vector& x) {
  check_param(policy, a, x);
  const Vector diff = x - policy.mean(a, s);
  const Vector& var = policy.variances(a);
  double log_p = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    log_p += -0.5 * std::log(2.0 * std::numbers::pi * var[i]) - 0.5 * diff[i] * diff[i] / var[i];
  }
  return log_p;
}

void accumulate_grad_log_parameter_policy(const GaussianParameterPolicy& policy, const StateVector& s,
                                          ActionId a, const Vector& x, Eigen::Ref<Vector> out) {
  check_param(policy, a, x);
  if (out.size() != policy.flat_size()) throw DimensionMismatch("theta gradient", policy.flat_size(), out.size());
  const Vector psi = policy.features()(a, s);
  const Vector scaled = (x - policy.theta(a) * psi).cwiseQuotient(policy.variances(a));
  int off = policy.block_offset(a);
  // row-major block: d log p / d theta_a(r, c) = scaled[r] * psi[c]
  for (Eigen::Index r = 0; r < scaled.size(); ++r) {
    for (Eigen::Index c = 0; c < psi.size(); ++c) out[off++] += scaled[r] * psi[c];
  }
}

Vector grad_log_parameter_policy(const GaussianParameterPolicy& policy, const StateVector& s, ActionId a,
                                 const Vector& x) {
  Vector g = Vector::Zero(policy.flat_size());
  accumulate_grad_log_parameter_policy(policy, s, a, x, g);
  return g;
}

void accumulate_grad_log_discrete_policy(const QWeights& q, const Vector& features, ActionId a,
                                         double temperature, Eigen::Ref<Vector> out) {
  if (a < 0 || a >= q.num_actions()) throw Error("discrete score: unknown action id " + std::to_string(a));
  if (out.size() != q.weights.size()) {
    throw DimensionMismatch("omega gradient", static_cast<long>(q.weights.size()), out.size());
  }
  const Vector p = discrete_action_probabilities(q_values(q, features), temperature);
  const int nf = q.num_features();
  for (int b = 0; b < q.num_actions(); ++b) {
    const double coef = ((b == a ? 1.0 : 0.0) - p[b]) / temperature;
    out.segment(b * nf, nf) += coef * features;
  }
}

Vector grad_log_discrete_policy(const QWeights& q, const FourierFeatures& phi, const StateVector& s, ActionId a,
                                double temperature) {
  Vector g = Vector::Zero(q.weights.size());
  accumulate_grad_log_discrete_policy(q, phi(s), a, temperature, g);
  return g;
}

CompositePolicy::CompositePolicy(SoftmaxDiscretePolicy discrete_, std::shared_ptr<const FourierFeatures> phi_,
                                 QWeights q_, GaussianParameterPolicy parameters_)
    : discrete(discrete_), phi(std::move(phi_)), q(std::move(q_)), parameters(std::move(parameters_)) {
  if (!phi) throw Error("composite policy: missing Fourier features");
  if (q.num_features() != phi->size()) throw DimensionMismatch("Q weight columns", phi->size(), q.num_features());
  if (q.num_actions() != parameters.num_actions()) {
    throw DimensionMismatch("parameter policy actions", q.num_actions(), parameters.num_actions());
  }
  if (discrete.temperature < 0.0) throw Error("composite policy: negative temperature");
}

Vector CompositePolicy::action_probabilities_from_features(const Vector& features) const {
  const Vector qv = q_values(q, features);
  if (discrete.temperature > 0.0) return discrete_action_probabilities(qv, discrete.temperature);
  Vector p = Vector::Zero(qv.size());
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < qv.size(); ++i) {
    if (qv[i] > qv[best]) best = i;
  }
  p[best] = 1.0;
  return p;
}

Vector CompositePolicy::action_probabilities(const StateVector& s) const {
  return action_probabilities_from_features((*phi)(s));
}

ActionId CompositePolicy::sample_discrete(const Vector& features, Rng& rng) const {
  const Vector p = action_probabilities_from_features(features);
  return rng.categorical(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

double CompositePolicy::log_density(const StateVector& s, ActionId a, const Vector& x) const {
  if (!(discrete.temperature > 0.0)) throw Error("composite density requires temperature > 0");
  const Vector p = action_probabilities(s);
  return std::log(p[a]) + gaussian_log_density(parameters, s, a, x);
}

SampledAction sample_action(const CompositePolicy& policy, std::span<const ActionSchema> schemas,
                            const StateVector& s, const Vector& features, Rng& rng) {
  if (static_cast<int>(schemas.size()) != policy.num_actions()) {
    throw DimensionMismatch("action schemas", policy.num_actions(), static_cast<long>(schemas.size()));
  }
  const ActionId a = policy.sample_discrete(features, rng);
  SampledAction out;
  out.raw_params = policy.parameters.sample(a, s, rng);
  out.action = validate_action(schemas[a], ParameterizedAction{a, out.raw_params});
  return out;
}

SampledAction sample_action(const CompositePolicy& policy, std::span<const ActionSchema> schemas,
                            const StateVector& s, Rng& rng) {
  return sample_action(policy, schemas, s, (*policy.phi)(s), rng);
}

}  // namespace qpamdp
