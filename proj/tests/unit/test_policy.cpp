#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"

using namespace qpamdp;
using testing::central_difference;
using testing::rel_error;

namespace {

// Two actions with 2-d parameters and 3 features, one action with 1-d / 2.
GaussianParameterPolicy random_gaussian(Rng& rng) {
  FeatureMap psi({3, 2, 2}, [](ActionId a, const StateVector& s) {
    Vector f(a == 0 ? 3 : 2);
    if (a == 0) {
      f << 1.0, s[0], s[1] * s[1];
    } else {
      f << 1.0, std::sin(s[a - 1]);
    }
    return f;
  });
  std::vector<Matrix> theta{Matrix(2, 3), Matrix(1, 2), Matrix(2, 2)};
  std::vector<Vector> var{Vector(2), Vector(1), Vector(2)};
  for (int a = 0; a < 3; ++a) {
    for (Eigen::Index i = 0; i < theta[a].size(); ++i) theta[a].data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < var[a].size(); ++i) var[a][i] = rng.uniform(0.2, 2.0);
  }
  return GaussianParameterPolicy(theta, var, psi);
}

std::shared_ptr<FourierFeatures> small_features() {
  auto phi = std::make_shared<FourierFeatures>();
  phi->scaler = StateScaler(Vector::Zero(2), Vector::Ones(2));
  phi->basis = FourierBasis::generate(2, 2, 2, {});
  return phi;
}

QWeights random_q(Rng& rng, int actions, int features) {
  QWeights q(actions, features);
  for (Eigen::Index i = 0; i < q.weights.size(); ++i) q.flat()[i] = rng.normal();
  return q;
}

Vector random_state(Rng& rng) {
  Vector s(2);
  s << rng.uniform(), rng.uniform();
  return s;
}

}  // namespace

TEST_SUITE("policy") {
  TEST_CASE("softmax examples") {
    const Vector eq = discrete_action_probabilities(Vector::Constant(4, 3.0), 0.7);
    for (int i = 0; i < 4; ++i) CHECK(eq[i] == doctest::Approx(0.25));

    Vector q(2);
    q << 1.0, 0.0;
    const Vector p = discrete_action_probabilities(q, 1.0);
    const double e = std::exp(1.0);
    CHECK(p[0] == doctest::Approx(e / (1 + e)).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(1 / (1 + e)).epsilon(1e-14));
    CHECK(p[0] == doctest::Approx(0.7311).epsilon(1e-4));

    q << 1000.0, 0.0;
    const Vector big = discrete_action_probabilities(q, 1.0);
    CHECK(big.allFinite());
    CHECK(big[0] == doctest::Approx(1.0));
    CHECK(big[1] < 1e-300);
  }

  TEST_CASE("softmax rejects bad input") {
    Vector q(2);
    q << 1.0, std::nan("");
    CHECK_THROWS(discrete_action_probabilities(q, 1.0));
    q << 1.0, 0.0;
    CHECK_THROWS(discrete_action_probabilities(q, 0.0));
    CHECK_THROWS(discrete_action_probabilities(q, -1.0));
  }

  TEST_CASE("softmax properties") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      Vector q(5);
      for (int i = 0; i < 5; ++i) q[i] = 20.0 * rng.normal();
      const double tau = rng.uniform(0.05, 5.0);
      const Vector p = discrete_action_probabilities(q, tau);
      CHECK((p.array() >= 0.0).all());
      CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
      const Vector shifted = discrete_action_probabilities((q.array() + rng.normal() * 100).matrix(), tau);
      CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("zero variance samples the mean exactly") {
    Rng rng(1);
    auto g = random_gaussian(rng);
    for (int a = 0; a < 3; ++a) g.set_variances(a, Vector::Zero(g.param_dim(a)));
    const Vector s = random_state(rng);
    for (int a = 0; a < 3; ++a) CHECK(g.sample(a, s, rng) == g.mean(a, s));
  }

  TEST_CASE("zero temperature picks argmax with lowest-id ties") {
    const auto d = envs::make_goal_domain();
    auto pi = d.initial_policy();
    pi.discrete.temperature = 0.0;
    Rng rng(3);
    const StateVector s = d.env->reset(rng);
    // all equal: lowest id
    for (int i = 0; i < 20; ++i) CHECK(sample_action(pi, d.env->schemas(), s, rng).action.id == 0);
    pi.q.weights(2, 0) = 0.5;
    pi.q.weights(1, 0) = 0.5;
    for (int i = 0; i < 20; ++i) CHECK(sample_action(pi, d.env->schemas(), s, rng).action.id == 1);
  }

  TEST_CASE("sample_action is reproducible and clamped") {
    const auto d = envs::make_platform_domain();
    const auto pi = d.initial_policy();
    Rng r0(0);
    const StateVector s = d.env->reset(r0);
    Rng a(77), b(77);
    for (int i = 0; i < 50; ++i) {
      const auto x = sample_action(pi, d.env->schemas(), s, a);
      const auto y = sample_action(pi, d.env->schemas(), s, b);
      CHECK(x.action.id == y.action.id);
      CHECK(x.action.params == y.action.params);
      CHECK(x.raw_params == y.raw_params);
      const auto& sch = d.env->schema(x.action.id);
      CHECK(x.action.params[0] >= sch.bounds[0].lower);
      CHECK(x.action.params[0] <= sch.bounds[0].upper);
    }
  }

  TEST_CASE("gaussian log density examples") {
    FeatureMap psi = FeatureMap::constant(1);
    GaussianParameterPolicy g({Matrix::Constant(1, 1, 0.3)}, {Vector::Ones(1)}, psi);
    const Vector s = Vector::Zero(1);
    const Vector mean = Vector::Constant(1, 0.3);
    CHECK(gaussian_log_density(g, s, 0, mean) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
    CHECK(gaussian_log_density(g, s, 0, mean) == doctest::Approx(-0.9189).epsilon(1e-4));

    Rng rng(2);
    auto h = random_gaussian(rng);
    const Vector st = random_state(rng);
    for (int a = 0; a < 3; ++a) {
      const Vector mu = h.mean(a, st);
      Vector off = mu;
      off[0] += std::sqrt(h.variances(a)[0]);
      CHECK(std::exp(gaussian_log_density(h, st, a, off) - gaussian_log_density(h, st, a, mu)) ==
            doctest::Approx(std::exp(-0.5)));
      auto doubled = h;
      doubled.set_variances(a, 2.0 * h.variances(a));
      CHECK(gaussian_log_density(h, st, a, mu) - gaussian_log_density(doubled, st, a, mu) ==
            doctest::Approx(0.5 * h.param_dim(a) * std::log(2.0)));
    }
    CHECK_THROWS(gaussian_log_density(h, st, 0, Vector::Zero(3)));
  }

  TEST_CASE("parameter score at the mean is zero and other blocks are zero") {
    Rng rng(5);
    const auto g = random_gaussian(rng);
    const Vector s = random_state(rng);
    for (int a = 0; a < 3; ++a) {
      CHECK(grad_log_parameter_policy(g, s, a, g.mean(a, s)).cwiseAbs().maxCoeff() == 0.0);
      Vector x = g.mean(a, s);
      x.array() += 0.7;
      const Vector grad = grad_log_parameter_policy(g, s, a, x);
      CHECK(grad.size() == g.flat_size());
      const int lo = g.block_offset(a);
      const int hi = lo + static_cast<int>(g.theta(a).size());
      for (int i = 0; i < grad.size(); ++i) {
        if (i < lo || i >= hi) CHECK(grad[i] == 0.0);
      }
      CHECK(grad.segment(lo, hi - lo).norm() > 0.0);
    }
    CHECK_THROWS(grad_log_parameter_policy(g, s, 1, Vector::Zero(2)));
  }

  TEST_CASE("parameter score matches finite differences of the log density") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
      const auto g = random_gaussian(rng);
      const Vector s = random_state(rng);
      const int a = trial % 3;
      Vector x = g.sample(a, s, rng);
      const Vector analytic = grad_log_parameter_policy(g, s, a, x);
      auto f = [&](const Vector& flat) {
        auto p = g;
        p.set_flat_theta(flat);
        return gaussian_log_density(p, s, a, x);
      };
      const Vector fd = central_difference(f, g.flat_theta(), 1e-5);
      CHECK(rel_error(analytic, fd) < 1e-5);

      // directional derivative
      Vector dir(g.flat_size());
      for (int i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
      dir.normalize();
      const double h = 1e-5;
      const double dd = (f(g.flat_theta() + h * dir) - f(g.flat_theta() - h * dir)) / (2 * h);
      CHECK(std::abs(dd - analytic.dot(dir)) / std::max(1.0, std::abs(dd)) < 1e-5);
    }
  }

  TEST_CASE("discrete score with equal Q is +-phi/(2 tau)") {
    const auto phi = small_features();
    QWeights q(2, phi->size());
    const double tau = 0.8;
    const Vector s = (Vector(2) << 0.3, 0.6).finished();
    const Vector f = (*phi)(s);
    const Vector g = grad_log_discrete_policy(q, *phi, s, 0, tau);
    const int n = phi->size();
    CHECK((g.head(n) - f / (2 * tau)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((g.tail(n) + f / (2 * tau)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS(grad_log_discrete_policy(q, *phi, s, 2, tau));
  }

  TEST_CASE("discrete score identity sums to zero") {
    const auto phi = small_features();
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
      const QWeights q = random_q(rng, 3, phi->size());
      const Vector s = random_state(rng);
      const double tau = rng.uniform(0.2, 3.0);
      const Vector p = discrete_action_probabilities(q_values(q, (*phi)(s)), tau);
      Vector total = Vector::Zero(q.weights.size());
      for (int a = 0; a < 3; ++a) total += p[a] * grad_log_discrete_policy(q, *phi, s, a, tau);
      CHECK(total.cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("discrete score matches finite differences") {
    const auto phi = small_features();
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      const QWeights q = random_q(rng, 3, phi->size());
      const Vector s = random_state(rng);
      const int a = trial % 3;
      const double tau = rng.uniform(0.3, 2.0);
      const Vector analytic = grad_log_discrete_policy(q, *phi, s, a, tau);
      auto f = [&](const Vector& flat) {
        QWeights w = q;
        w.flat() = flat;
        return std::log(discrete_action_probabilities(q_values(w, (*phi)(s)), tau)[a]);
      };
      const Vector fd = central_difference(f, Vector(q.flat()), 1e-5);
      CHECK(rel_error(analytic, fd) < 1e-5);
    }
  }

  TEST_CASE("scores have zero mean under the policy") {
    Rng rng(12);
    const auto phi = small_features();
    const QWeights q = random_q(rng, 3, phi->size());
    const auto g = random_gaussian(rng);
    const Vector s = random_state(rng);
    const double tau = 0.9;
    CompositePolicy pi(SoftmaxDiscretePolicy{tau}, phi, q, g);
    const int n = 10000;
    const int dim = static_cast<int>(q.weights.size()) + g.flat_size();
    Matrix samples(n, dim);
    const Vector f = (*phi)(s);
    for (int i = 0; i < n; ++i) {
      const ActionId a = pi.sample_discrete(f, rng);
      const Vector x = g.sample(a, s, rng);
      samples.row(i) << grad_log_discrete_policy(q, *phi, s, a, tau).transpose(),
          grad_log_parameter_policy(g, s, a, x).transpose();
    }
    const Vector mean = samples.colwise().mean();
    for (int j = 0; j < dim; ++j) {
      const double sd = std::sqrt((samples.col(j).array() - mean[j]).square().sum() / (n - 1));
      const double se = sd / std::sqrt(static_cast<double>(n));
      if (se == 0.0) {
        CHECK(std::abs(mean[j]) < 1e-12);
      } else {
        CHECK(std::abs(mean[j]) < 3.0 * se + 1e-12);
      }
    }
  }

  TEST_CASE("composite density factorizes") {
    Rng rng(13);
    const auto phi = small_features();
    const QWeights q = random_q(rng, 3, phi->size());
    const auto g = random_gaussian(rng);
    CompositePolicy pi(SoftmaxDiscretePolicy{1.3}, phi, q, g);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector s = random_state(rng);
      const int a = trial % 3;
      const Vector x = g.sample(a, s, rng);
      const double expect = std::log(pi.action_probabilities(s)[a]) + gaussian_log_density(g, s, a, x);
      CHECK(pi.log_density(s, a, x) == doctest::Approx(expect).epsilon(1e-14));
    }
  }

  TEST_CASE("flat theta round trip") {
    Rng rng(14);
    auto g = random_gaussian(rng);
    Vector flat = g.flat_theta();
    CHECK(flat.size() == 6 + 2 + 4);
    CHECK(flat[1] == g.theta(0)(0, 1));  // row-major within a block
    flat.array() += 1.0;
    g.set_flat_theta(flat);
    CHECK(g.flat_theta() == flat);
    CHECK(g.block_offset(2) == 8);
  }

  TEST_CASE("goal parameter features") {
    const envs::GoalConfig cfg;
    const auto psi = envs::goal_feature_map(cfg);
    using namespace envs::goal_index;
    StateVector s = StateVector::Zero(kStateDim);
    s[kBallX] = 12.0;
    s[kBallY] = 20.0;
    s[kKeeperX] = 15.0;
    s[kKeeperY] = 24.0;
    const Vector k = psi(envs::kKickTo, s);
    REQUIRE(k.size() == 7);
    CHECK(k[0] == 1.0);
    CHECK(k[1] == doctest::Approx(12.0 / cfg.field_width));
    CHECK(k[2] == doctest::Approx(20.0 / cfg.field_length));
    CHECK(k[3] == doctest::Approx(k[1] * k[1]));
    CHECK(k[4] == doctest::Approx(k[2] * k[2]));
    CHECK(k[5] == doctest::Approx(-3.0 / 5.0));
    CHECK(k[6] == doctest::Approx(-4.0 / 5.0));
    const Vector sh = psi(envs::kShootLeft, s);
    REQUIRE(sh.size() == 2);
    CHECK(sh[0] == 1.0);
    CHECK(sh[1] == doctest::Approx(15.0 / cfg.field_width));
  }
}
