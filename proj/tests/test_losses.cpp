#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hesslasso/losses.hpp"
#include "oracles.hpp"

using namespace hesslasso;

namespace {

oracle::Family family(LossKind k) {
  switch (k) {
    case LossKind::least_squares: return oracle::Family::gaussian;
    case LossKind::logistic: return oracle::Family::binomial;
    case LossKind::poisson: return oracle::Family::poisson;
  }
  return oracle::Family::gaussian;
}

Vector response(LossKind k, Index n, std::mt19937_64& rng) {
  Vector y(n);
  std::normal_distribution<double> z;
  std::bernoulli_distribution b(0.5);
  std::poisson_distribution<int> pois(1.5);
  for (Index i = 0; i < n; ++i) {
    switch (k) {
      case LossKind::least_squares: y[i] = z(rng); break;
      case LossKind::logistic: y[i] = b(rng) ? 1.0 : 0.0; break;
      case LossKind::poisson: y[i] = pois(rng); break;
    }
  }
  return y;
}

}  // namespace

TEST_CASE("LossModel normalizers") {
  Vector y(3);
  y << 1.0, 0.0, 2.0;
  CHECK(LossModel::make(LossKind::least_squares, y).zeta == doctest::Approx(5.0));
  CHECK(LossModel::make(LossKind::logistic, y).zeta == doctest::Approx(3.0 * std::log(2.0)));
  CHECK(LossModel::make(LossKind::poisson, y).zeta == doctest::Approx(3.0 + std::log(2.0)));
  CHECK(LossModel::make(LossKind::poisson, y).supports_gap_safe == false);
  CHECK(LossModel::make(LossKind::logistic, y).supports_gap_safe);
  CHECK(LossModel::make(LossKind::least_squares, Vector::Zero(3)).zeta > 0.0);
}

TEST_CASE("loss names round-trip") {
  for (LossKind k : {LossKind::least_squares, LossKind::logistic, LossKind::poisson}) {
    CHECK(parse_loss(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_loss("hinge"), Error);
}

TEST_CASE("correlation at zero") {
  std::mt19937_64 rng(1);
  const Matrix m = oracle::gaussian_matrix(7, 3, rng);
  const Design x(m);
  const Vector y = response(LossKind::least_squares, 7, rng);
  CHECK((correlation(x, y, Vector::Zero(3), LossKind::least_squares) - m.transpose() * y).norm() <= 1e-12);
  const Vector yb = response(LossKind::logistic, 7, rng);
  const Vector expect = m.transpose() * (yb.array() - 0.5).matrix();
  CHECK((correlation(x, yb, Vector::Zero(3), LossKind::logistic) - expect).norm() <= 1e-12);
}

TEST_CASE("correlation matches central finite differences of the loss") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 0.3);
  for (LossKind k : {LossKind::least_squares, LossKind::logistic, LossKind::poisson}) {
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
      const Matrix m = oracle::gaussian_matrix(10, 4, rng);
      const Design x(m);
      const Vector y = response(k, 10, rng);
      Vector beta(4);
      for (Index j = 0; j < 4; ++j) beta[j] = z(rng);
      const Vector c = correlation(x, y, beta, k);
      const double h = 1e-6;
      for (Index j = 0; j < 4; ++j) {
        Vector up = beta, down = beta;
        up[j] += h;
        down[j] -= h;
        const double fd = -(loss_value(k, y, m * up) - loss_value(k, y, m * down)) / (2 * h);
        worst = std::max(worst, std::abs(fd - c[j]) / std::max(1.0, std::abs(c[j])));
      }
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("loss_value agrees with the reference objective") {
  std::mt19937_64 rng(3);
  for (LossKind k : {LossKind::least_squares, LossKind::logistic}) {
    const Matrix m = oracle::gaussian_matrix(9, 3, rng);
    const Vector y = response(k, 9, rng);
    const Vector b = Vector::Constant(3, 0.2);
    CHECK(loss_value(k, y, m * b) == doctest::Approx(oracle::smooth(family(k), m, y, b)).epsilon(1e-12));
  }
}

TEST_CASE("lambda_max") {
  SUBCASE("orthonormal read-off") {
    Matrix m = Matrix::Zero(4, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    Vector y(4);
    y << 3.0, -4.0, 0.0, 0.0;
    CHECK(lambda_max(Design(m), y, LossKind::least_squares) == doctest::Approx(4.0));
    CHECK(lambda_max(Design(m), Vector::Zero(4), LossKind::least_squares) == 0.0);
  }
  SUBCASE("all-zero design") {
    CHECK(lambda_max(Design(Matrix::Zero(5, 3)), Vector::Ones(5), LossKind::least_squares) == 0.0);
  }
  SUBCASE("KKT characterization") {
    std::mt19937_64 rng(4);
    for (LossKind k : {LossKind::least_squares, LossKind::logistic, LossKind::poisson}) {
      const Matrix m = oracle::standardized(oracle::gaussian_matrix(20, 10, rng));
      const Vector y = response(k, 20, rng);
      const double lmax = lambda_max(Design(m), y, k);
      REQUIRE(lmax > 0.0);
      const Vector zero = Vector::Zero(10);
      CHECK(oracle::kkt_violation(family(k), m, y, zero, lmax) <= 1e-12);
      CHECK(oracle::kkt_violation(family(k), m, y, zero, 0.999 * lmax) > 0.0);
      CHECK(oracle::kkt_violation(family(k), m, y, zero, lmax * (1 - 1e-6)) > 0.0);
    }
  }
}

TEST_CASE("duality gap") {
  std::mt19937_64 rng(5);
  const Matrix m = oracle::standardized(oracle::gaussian_matrix(15, 6, rng));
  const Design x(m);

  SUBCASE("null model at lambda_max has zero gap") {
    Vector y = response(LossKind::least_squares, 15, rng);
    y.array() -= y.mean();
    const double lmax = lambda_max(x, y, LossKind::least_squares);
    const auto g = duality_gap(x, y, Vector::Zero(6), lmax, LossKind::least_squares);
    CHECK(g.gap <= 1e-10 * y.squaredNorm());
    CHECK((g.theta - y / lmax).norm() <= 1e-12);
  }
  SUBCASE("matches the reference gap and is tiny at the optimum") {
    for (LossKind k : {LossKind::least_squares, LossKind::logistic}) {
      const Vector y = response(k, 15, rng);
      const double lambda = 0.3 * lambda_max(x, y, k);
      const Vector b = oracle::proximal_gradient(family(k), m, y, lambda, 1e-12);
      const auto g = duality_gap(x, y, b, lambda, k);
      CHECK(g.gap <= 1e-10);
      CHECK(g.gap == doctest::Approx(std::max(0.0, oracle::gap(family(k), m, y, b, lambda))).epsilon(1e-6));
      CHECK((m.transpose() * g.theta).cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    }
  }
  SUBCASE("weak duality for arbitrary coefficients") {
    std::normal_distribution<double> z;
    for (int draw = 0; draw < 100; ++draw) {
      for (LossKind k : {LossKind::least_squares, LossKind::logistic}) {
        const Vector y = response(k, 15, rng);
        Vector b(6);
        for (Index j = 0; j < 6; ++j) b[j] = z(rng);
        const double lambda = std::abs(z(rng)) + 0.1;
        const auto g = duality_gap(x, y, b, lambda, k);
        CHECK(g.primal - g.dual >= -1e-10);
        CHECK(g.gap >= 0.0);
        CHECK((m.transpose() * g.theta).cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
      }
    }
  }
  SUBCASE("Poisson is unsupported") {
    const Vector y = response(LossKind::poisson, 15, rng);
    CHECK_THROWS_AS(duality_gap(x, y, Vector::Zero(6), 1.0, LossKind::poisson), Error);
  }
}

TEST_CASE("curvature weights") {
  std::mt19937_64 rng(6);
  const Matrix m = oracle::gaussian_matrix(12, 3, rng);
  const Design x(m);
  const Vector y = response(LossKind::logistic, 12, rng);

  const auto logistic0 = curvature_weights(x, y, Vector::Zero(3), LossKind::logistic, false);
  CHECK((logistic0.weights.array() - 0.25).abs().maxCoeff() == 0.0);

  const auto ls = curvature_weights(x, y, Vector::Constant(3, 0.4), LossKind::least_squares, false);
  CHECK((ls.weights.array() - 1.0).abs().maxCoeff() == 0.0);

  Vector beta(3);
  beta << 0.3, -0.2, 0.1;
  const auto bounded = curvature_weights(x, y, beta, LossKind::logistic, true);
  CHECK((bounded.weights.array() - 0.25).abs().maxCoeff() == 0.0);
  const auto exact = curvature_weights(x, y, beta, LossKind::logistic, false);
  CHECK(exact.weights.maxCoeff() <= 0.25);
  CHECK(exact.weights.minCoeff() >= 0.0);

  const Vector yp = response(LossKind::poisson, 12, rng);
  const auto pois = curvature_weights(x, yp, beta, LossKind::poisson, false);
  const Vector eta = m * beta;
  const double h = 1e-4;
  for (Index i = 0; i < 12; ++i) {
    auto fi = [&](double t) { return std::exp(t) - yp[i] * t; };
    const double fd = (fi(eta[i] + h) - 2 * fi(eta[i]) + fi(eta[i] - h)) / (h * h);
    CHECK(pois.weights[i] == doctest::Approx(fd).epsilon(1e-5));
  }
  // Working response reproduces the Newton step target eta + r / w.
  CHECK((pois.working_response - (eta + (yp - eta.array().exp().matrix()).cwiseQuotient(pois.weights))).norm() <= 1e-10);
}

TEST_CASE("deviance statistics") {
  std::mt19937_64 rng(7);
  SUBCASE("null model with centered y") {
    const Matrix m = oracle::gaussian_matrix(10, 3, rng);
    Vector y = response(LossKind::least_squares, 10, rng);
    y.array() -= y.mean();
    const auto d = deviance_stats(Design(m), y, Vector::Zero(3), LossKind::least_squares);
    CHECK(d.ratio == doctest::Approx(0.0));
    CHECK(d.null_deviance == doctest::Approx(y.squaredNorm()));
  }
  SUBCASE("saturated least squares") {
    const Matrix m = oracle::gaussian_matrix(10, 3, rng);
    Vector beta(3);
    beta << 1.0, -2.0, 0.5;
    const Vector y = m * beta;
    const auto d = deviance_stats(Design(m), y, beta, LossKind::least_squares);
    CHECK(d.ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constant response") {
    const Matrix m = oracle::gaussian_matrix(6, 2, rng);
    const auto d = deviance_stats(Design(m), Vector::Constant(6, 3.0), Vector::Zero(2), LossKind::least_squares);
    CHECK(d.ratio == 1.0);
  }
  SUBCASE("separable logistic toy") {
    Matrix m(6, 2);
    m << -3, 1, -2, -1, -1, 0.5, 1, -0.5, 2, 1, 3, 0;
    Vector y(6);
    y << 0, 0, 0, 1, 1, 1;
    Vector beta(2);
    beta << 40.0, 0.0;
    const auto d = deviance_stats(Design(m), y, beta, LossKind::logistic);
    const double direct = 2.0 * oracle::smooth(oracle::Family::binomial, m, y, beta);
    CHECK(d.deviance == doctest::Approx(direct).epsilon(1e-9));
    CHECK(d.ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.null_deviance == doctest::Approx(12.0 * std::log(2.0)));
  }
  SUBCASE("poisson deviance is zero at the saturated fit") {
    Vector y(3);
    y << 1.0, 0.0, 4.0;
    Vector eta(3);
    eta << 0.0, -40.0, std::log(4.0);
    CHECK(deviance(LossKind::poisson, y, eta) == doctest::Approx(0.0).epsilon(1e-12));
  }
}
