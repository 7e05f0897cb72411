#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <numeric>

#include "hesslasso/solver.hpp"
#include "oracles.hpp"

using namespace hesslasso;

namespace {

IndexSet all_of(Index p) {
  IndexSet s(static_cast<std::size_t>(p));
  std::iota(s.begin(), s.end(), 0);
  return s;
}

Vector binary(Index n, std::mt19937_64& rng) {
  std::bernoulli_distribution b(0.5);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = b(rng) ? 1.0 : 0.0;
  return y;
}

}  // namespace

TEST_CASE("orthonormal least squares is solved by soft thresholding in one pass") {
  Matrix m = Matrix::Zero(5, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(2, 2) = 1.0;
  const Design x(m);
  Vector y(5);
  y << 2.0, -0.3, -1.5, 0.7, 0.1;
  Vector beta = Vector::Zero(3);
  auto ws = CdWorkspace::from(x, y, beta, LossKind::least_squares);
  Rng rng(1);
  SubproblemSpec spec;
  spec.working = all_of(3);
  spec.lambda = 0.5;
  spec.tolerance = 1e-12;
  const auto res = solve_subproblem(x, y, spec, LossKind::least_squares, beta, ws, rng);
  CHECK(res.converged);
  CHECK(res.passes == 1);
  CHECK(beta[0] == doctest::Approx(1.5));
  CHECK(beta[1] == 0.0);
  CHECK(beta[2] == doctest::Approx(-1.0));
}

TEST_CASE("an optimal start converges after a single pass") {
  std::mt19937_64 gen(2);
  const Matrix m = oracle::standardized(oracle::gaussian_matrix(30, 10, gen));
  const Design x(m);
  const Vector y = oracle::gaussian_matrix(30, 1, gen).col(0);
  const double lambda = 0.5 * (m.transpose() * y).cwiseAbs().maxCoeff();
  Vector beta = oracle::proximal_gradient(oracle::Family::gaussian, m, y, lambda, 1e-13);
  auto ws = CdWorkspace::from(x, y, beta, LossKind::least_squares);
  Rng rng(3);
  SubproblemSpec spec;
  spec.working = all_of(10);
  spec.lambda = lambda;
  spec.tolerance = 1e-4 * y.squaredNorm();
  const auto res = solve_subproblem(x, y, spec, LossKind::least_squares, beta, ws, rng);
  CHECK(res.converged);
  CHECK(res.passes == 1);
}

TEST_CASE("solve_subproblem matches the proximal gradient reference") {
  std::mt19937_64 gen(4);
  const Matrix m = oracle::standardized(oracle::gaussian_matrix(30, 10, gen));
  const Design x(m);

  SUBCASE("least squares") {
    const Vector y = oracle::gaussian_matrix(30, 1, gen).col(0);
    const double lambda = 0.5 * (m.transpose() * y).cwiseAbs().maxCoeff();
    const Vector ref = oracle::proximal_gradient(oracle::Family::gaussian, m, y, lambda, 1e-13);
    Vector beta = Vector::Zero(10);
    auto ws = CdWorkspace::from(x, y, beta, LossKind::least_squares);
    Rng rng(5);
    SubproblemSpec spec;
    spec.working = all_of(10);
    spec.lambda = lambda;
    spec.tolerance = 1e-10;
    const auto res = solve_subproblem(x, y, spec, LossKind::least_squares, beta, ws, rng);
    CHECK(res.converged);
    CHECK((beta - ref).cwiseAbs().maxCoeff() <= 1e-6);
    // Independent certificate.
    CHECK(oracle::gap(oracle::Family::gaussian, m, y, beta, lambda) < 1e-10);
  }
  SUBCASE("logistic with line search") {
    const Vector y = binary(30, gen);
    const double lambda = 0.3 * (m.transpose() * (y.array() - 0.5).matrix()).cwiseAbs().maxCoeff();
    const Vector ref = oracle::proximal_gradient(oracle::Family::binomial, m, y, lambda, 1e-13);
    Vector beta = Vector::Zero(10);
    auto ws = CdWorkspace::from(x, y, beta, LossKind::logistic);
    Rng rng(6);
    SubproblemSpec spec;
    spec.working = all_of(10);
    spec.lambda = lambda;
    spec.tolerance = 1e-10;
    spec.line_search = true;
    const auto res = solve_subproblem(x, y, spec, LossKind::logistic, beta, ws, rng);
    CHECK(res.converged);
    CHECK((beta - ref).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK(oracle::gap(oracle::Family::binomial, m, y, beta, lambda) < 1e-10);
  }
  SUBCASE("poisson") {
    std::poisson_distribution<int> pois(1.0);
    Vector y(30);
    for (Index i = 0; i < 30; ++i) y[i] = pois(gen);
    const double lambda = 0.3 * (m.transpose() * (y.array() - 1.0).matrix()).cwiseAbs().maxCoeff();
    const Vector ref = oracle::proximal_gradient(oracle::Family::poisson, m, y, lambda, 0.0);
    Vector beta = Vector::Zero(10);
    auto ws = CdWorkspace::from(x, y, beta, LossKind::poisson);
    Rng rng(7);
    SubproblemSpec spec;
    spec.working = all_of(10);
    spec.lambda = lambda;
    spec.tolerance = 1e-13;
    const auto res = solve_subproblem(x, y, spec, LossKind::poisson, beta, ws, rng);
    CHECK(res.converged);
    CHECK((beta - ref).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK(oracle::kkt_violation(oracle::Family::poisson, m, y, beta, lambda) <= 1e-5 * lambda);
  }
}

TEST_CASE("restricted subproblem leaves other coefficients at zero") {
  std::mt19937_64 gen(8);
  const Matrix m = oracle::standardized(oracle::gaussian_matrix(20, 6, gen));
  const Design x(m);
  const Vector y = oracle::gaussian_matrix(20, 1, gen).col(0);
  Vector beta = Vector::Zero(6);
  auto ws = CdWorkspace::from(x, y, beta, LossKind::least_squares);
  Rng rng(9);
  SubproblemSpec spec;
  spec.working = {1, 4};
  spec.lambda = 1.0;
  spec.tolerance = 1e-12;
  const auto res = solve_subproblem(x, y, spec, LossKind::least_squares, beta, ws, rng);
  CHECK(res.converged);
  CHECK(beta[0] == 0.0);
  CHECK(beta[2] == 0.0);
  CHECK(beta[3] == 0.0);
  CHECK(beta[5] == 0.0);
  const auto g = subproblem_gap(x, y, spec.working, spec.lambda, LossKind::least_squares, beta, ws);
  CHECK(g.gap < 1e-12);
  CHECK((ws.eta - m * beta).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("empty working set does no passes") {
  const Design x(Matrix::Identity(3, 2));
  const Vector y = Vector::Ones(3);
  Vector beta = Vector::Zero(2);
  auto ws = CdWorkspace::from(x, y, beta, LossKind::least_squares);
  Rng rng(1);
  SubproblemSpec spec;
  spec.lambda = 5.0;
  spec.tolerance = 1e-8;
  const auto res = solve_subproblem(x, y, spec, LossKind::least_squares, beta, ws, rng);
  CHECK(res.passes == 0);
  CHECK(res.converged);
}

TEST_CASE("max_passes exhaustion is reported, not thrown") {
  std::mt19937_64 gen(10);
  const Matrix m = oracle::standardized(oracle::gaussian_matrix(20, 8, gen));
  const Design x(m);
  const Vector y = oracle::gaussian_matrix(20, 1, gen).col(0);
  Vector beta = Vector::Zero(8);
  auto ws = CdWorkspace::from(x, y, beta, LossKind::least_squares);
  Rng rng(1);
  SubproblemSpec spec;
  spec.working = all_of(8);
  spec.lambda = 0.01;
  spec.tolerance = 1e-300;
  spec.max_passes = 3;
  const auto res = solve_subproblem(x, y, spec, LossKind::least_squares, beta, ws, rng);
  CHECK_FALSE(res.converged);
  CHECK(res.passes == 3);
}

TEST_CASE("cd_epoch") {
  std::mt19937_64 gen(11);
  SUBCASE("single coordinate is minimized exactly") {
    const Matrix m = oracle::gaussian_matrix(9, 1, gen);
    const Design x(m);
    const Vector y = oracle::gaussian_matrix(9, 1, gen).col(0);
    const double lambda = 0.2 * std::abs(m.col(0).dot(y));
    Vector beta = Vector::Zero(1);
    auto ws = CdWorkspace::from(x, y, beta, LossKind::least_squares);
    Rng rng(1);
    cd_epoch(x, y, {0}, lambda, LossKind::least_squares, beta, ws, rng);
    const double z = m.col(0).dot(y);
    const double expect = oracle::soft(z, lambda) / m.col(0).squaredNorm();
    CHECK(beta[0] == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("least-squares objective never increases") {
    const Matrix m = oracle::standardized(oracle::gaussian_matrix(25, 12, gen));
    const Design x(m);
    const Vector y = oracle::gaussian_matrix(25, 1, gen).col(0);
    Vector beta = Vector::Zero(12);
    auto ws = CdWorkspace::from(x, y, beta, LossKind::least_squares);
    Rng rng(2);
    double prev = oracle::objective(oracle::Family::gaussian, m, y, beta, 0.4);
    for (int e = 0; e < 30; ++e) {
      cd_epoch(x, y, all_of(12), 0.4, LossKind::least_squares, beta, ws, rng);
      const double now = oracle::objective(oracle::Family::gaussian, m, y, beta, 0.4);
      CHECK(now <= prev + 1e-12 * std::abs(prev));
      prev = now;
    }
  }
  SUBCASE("fixed seed is bit reproducible") {
    const Matrix m = oracle::standardized(oracle::gaussian_matrix(25, 12, gen));
    const Design x(m);
    const Vector y = binary(25, gen);
    auto run = [&] {
      Vector beta = Vector::Zero(12);
      auto ws = CdWorkspace::from(x, y, beta, LossKind::logistic);
      Rng rng(77);
      for (int e = 0; e < 5; ++e) cd_epoch(x, y, all_of(12), 0.5, LossKind::logistic, beta, ws, rng);
      return beta;
    };
    const Vector a = run();
    const Vector b = run();
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * 12) == 0);
  }
  SUBCASE("zero-curvature coordinate is frozen") {
    Matrix m = oracle::gaussian_matrix(6, 2, gen);
    m.col(1).setZero();
    const Design x(m);
    const Vector y = oracle::gaussian_matrix(6, 1, gen).col(0);
    Vector beta = Vector::Zero(2);
    auto ws = CdWorkspace::from(x, y, beta, LossKind::least_squares);
    Rng rng(3);
    cd_epoch(x, y, {0, 1}, 0.01, LossKind::least_squares, beta, ws, rng);
    CHECK(beta[1] == 0.0);
    CHECK(std::isfinite(beta[0]));
  }
}

TEST_CASE("line_search") {
  Matrix m(5, 2);
  m << 1.0, 0.5, -1.0, 0.2, 0.8, -0.4, -0.3, 1.0, 0.6, -0.9;
  const Design x(m);
  Vector y(5);
  y << 1, 0, 1, 0, 1;
  const double lambda = 0.1;
  auto objective = [&](const Vector& b) { return oracle::objective(oracle::Family::binomial, m, y, b, lambda); };

  SUBCASE("identity proposal") {
    Vector b(2);
    b << 0.3, -0.1;
    const auto r = line_search(x, y, b, b, lambda, LossKind::logistic);
    CHECK(r.beta == b);
  }
  SUBCASE("decreasing proposal is accepted at full step") {
    const Vector old = Vector::Zero(2);
    Vector prop(2);
    prop << 0.2, 0.0;
    REQUIRE(objective(prop) < objective(old));
    const auto r = line_search(x, y, old, prop, lambda, LossKind::logistic);
    CHECK(r.step == 1.0);
    CHECK(r.beta == prop);
  }
  SUBCASE("overshoot is cut back to a strict decrease") {
    const Vector old = Vector::Zero(2);
    Vector prop(2);
    prop << 60.0, -40.0;
    REQUIRE(objective(prop) > objective(old));
    const auto r = line_search(x, y, old, prop, lambda, LossKind::logistic);
    CHECK_FALSE(r.stalled);
    CHECK(r.step < 1.0);
    CHECK(objective(r.beta) < objective(old));
  }
  SUBCASE("ascent direction stalls and keeps the old point") {
    Vector old(2);
    old << 1.0, 0.0;
    const Vector c = m.transpose() * (y - oracle::mean(oracle::Family::binomial, m * old));
    // Move against the descent direction.
    const Vector prop = old - 5.0 * c - Vector::Constant(2, 3.0);
    const auto r = line_search(x, y, old, prop, lambda, LossKind::logistic);
    CHECK(objective(r.beta) <= objective(old));
  }
}
