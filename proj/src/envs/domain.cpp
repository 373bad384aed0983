#include "qpamdp/envs/domain.hpp"

#include <numbers>

namespace qpamdp::envs {

std::shared_ptr<const FourierFeatures> Domain::fourier() const {
  auto f = std::make_shared<FourierFeatures>();
  f->scaler = scaler;
  f->basis = FourierBasis::generate(env->state_dim(), basis);
  return f;
}

CompositePolicy Domain::initial_policy() const {
  auto phi = fourier();
  QWeights q(env->num_actions(), phi->size());
  return CompositePolicy(SoftmaxDiscretePolicy{temperature}, phi, std::move(q),
                         GaussianParameterPolicy(theta0, variances, features));
}

Domain make_toy_domain(const ToyConfig& cfg, double variance) {
  Domain d;
  auto env = std::make_shared<ToyPamdp>(cfg);
  const int k = env->num_actions();
  d.env = env;
  d.scaler = StateScaler(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  d.basis = BasisSpec{1, 1, {0}};  // constant feature only
  d.features = FeatureMap::constant(k);
  d.temperature = 0.5;
  d.theta0.assign(k, Matrix::Zero(1, 1));
  d.variances.assign(k, Vector::Constant(1, variance));
  return d;
}

FeatureMap goal_feature_map(const GoalConfig& cfg) {
  using namespace goal_index;
  const double w = cfg.field_width;
  const double l = cfg.field_length;
  return FeatureMap({7, 2, 2}, [w, l](ActionId a, const StateVector& s) {
    if (a == kKickTo) {
      const double bx = s[kBallX] / w;
      const double by = s[kBallY] / l;
      const Vec2 rel(s[kBallX] - s[kKeeperX], s[kBallY] - s[kKeeperY]);
      const double n = rel.norm();
      const Vec2 u = n > 0.0 ? Vec2(rel / n) : Vec2::Zero();
      Vector psi(7);
      psi << 1.0, bx, by, bx * bx, by * by, u.x(), u.y();
      return psi;
    }
    Vector psi(2);
    psi << 1.0, s[kKeeperX] / w;
    return psi;
  });
}

Domain make_goal_domain(const GoalConfig& cfg) {
  using namespace goal_index;
  Domain d;
  auto env = std::make_shared<GoalEnv>(cfg);
  d.env = env;

  Vector lower = Vector::Zero(kStateDim);
  Vector upper(kStateDim);
  const double v = cfg.kick_speed;
  const double pi = std::numbers::pi;
  lower << 0, 0, -v, -v, -pi, 0, 0, -v, -v, -pi, 0, 0, -v, -v;
  upper << cfg.field_width, cfg.field_length, v, v, pi, cfg.field_width, cfg.field_length, v, v, pi,
      cfg.field_width, cfg.field_length, v, v;
  d.scaler = StateScaler(lower, upper);
  d.basis = BasisSpec{2, 2, kGoalVelocityDims};
  d.features = goal_feature_map(cfg);
  d.temperature = 3.0;

  // kick-to: straight ahead; shots at the middle of each half.
  Matrix kick = Matrix::Zero(2, 7);
  kick(0, 1) = cfg.field_width;
  kick(1, 0) = 14.0;
  kick(1, 2) = cfg.field_length;
  Matrix shoot = Matrix::Zero(1, 2);
  shoot(0, 0) = 0.5;
  d.theta0 = {kick, shoot, shoot};

  const double kick_sd_x = 0.05 * cfg.field_width;
  const double kick_sd_y = 0.05 * cfg.field_length;
  const double shoot_sd = 0.1;  // in half-goal units
  d.variances = {Vector{{kick_sd_x * kick_sd_x, kick_sd_y * kick_sd_y}}, Vector::Constant(1, shoot_sd * shoot_sd),
                 Vector::Constant(1, shoot_sd * shoot_sd)};
  return d;
}

FeatureMap platform_feature_map(const PlatformConfig& cfg) {
  using namespace platform_index;
  const double total = cfg.total_length();
  const double vmax = cfg.max_speed();
  const double ev = cfg.enemy_speed;
  return FeatureMap({5, 5, 5}, [total, vmax, ev](ActionId, const StateVector& s) {
    Vector psi(5);
    psi << 1.0, s[kX] / total, s[kXdot] / vmax, s[kEnemyX] / total, s[kEnemyXdot] / ev;
    return psi;
  });
}

Domain make_platform_domain(const PlatformConfig& cfg) {
  using namespace platform_index;
  Domain d;
  auto env = std::make_shared<PlatformEnv>(cfg);
  d.env = env;
  Vector lower(kStateDim);
  Vector upper(kStateDim);
  lower << 0.0, 0.0, 0.0, -cfg.enemy_speed;
  upper << cfg.total_length(), cfg.max_speed(), cfg.total_length(), cfg.enemy_speed;
  d.scaler = StateScaler(lower, upper);
  d.basis = BasisSpec{4, 2, {}};
  d.features = platform_feature_map(cfg);
  d.temperature = 0.01;

  auto bias = [](double v) {
    Matrix m = Matrix::Zero(1, 5);
    m(0, 0) = v;
    return m;
  };
  d.theta0 = {bias(3.0), bias(4.0), bias(8.0)};
  const double sd = 0.05 * cfg.platform_lengths[1];
  d.variances.assign(3, Vector::Constant(1, sd * sd));
  return d;
}

}  // namespace qpamdp::envs
