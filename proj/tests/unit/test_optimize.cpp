#include <doctest.h>

#include "wifield/error.hpp"
#include "wifield/optimize.hpp"

using namespace wifield;

namespace {

// f(x) = 0.5 (x - c)^T D (x - c) with D diagonal.
Objective quadratic(Eigen::VectorXd d, Eigen::VectorXd c) {
  return [d = std::move(d), c = std::move(c)](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    const Eigen::VectorXd r = x - c;
    if (g != nullptr) {
      *g = d.cwiseProduct(r);
    }
    return 0.5 * r.dot(d.cwiseProduct(r));
  };
}

double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd* g) {
  const double a = 1.0 - x[0];
  const double b = x[1] - x[0] * x[0];
  if (g != nullptr) {
    g->resize(2);
    (*g)[0] = -2.0 * a - 400.0 * x[0] * b;
    (*g)[1] = 200.0 * b;
  }
  return a * a + 100.0 * b * b;
}

}  // namespace

TEST_SUITE("optimize") {
  TEST_CASE("Adam converges on a quadratic") {
    const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
    AdamOptions o;
    o.learning_rate = 0.05;
    o.max_iterations = 2000;
    const OptimizeResult r = adam(quadratic(Eigen::VectorXd::Constant(5, 2.0), c), Eigen::VectorXd::Zero(5), o);
    CHECK((r.x - c).norm() < 1e-3);
    CHECK(r.history.size() == static_cast<std::size_t>(r.iterations) + 1);
    if (r.stopped_early) {
      CHECK(r.history.back() == 0.0);
    } else {
      CHECK(r.iterations == 2000);
    }
    CHECK(r.history.back() < r.history.front());
  }

  TEST_CASE("Adam does nothing from a stationary point") {
    AdamOptions o;
    o.gradient_tolerance = 1e-10;
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(3, 0.25);
    const OptimizeResult r = adam(quadratic(Eigen::VectorXd::Ones(3), c), c, o);
    CHECK(r.stopped_early);
    CHECK(r.iterations == 0);
    CHECK(r.x == c);
  }

  TEST_CASE("Adam stops early under a tolerance") {
    AdamOptions o;
    o.learning_rate = 0.05;
    o.max_iterations = 100000;
    o.tolerance = 1e-12;
    const OptimizeResult r = adam(quadratic(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)),
                                  Eigen::VectorXd::Zero(3), o);
    CHECK(r.stopped_early);
    CHECK(r.iterations < 100000);
  }

  TEST_CASE("L-BFGS solves a quadratic and Rosenbrock monotonically") {
    Eigen::VectorXd d(4);
    d << 1.0, 10.0, 100.0, 1000.0;
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 0.5);
    const OptimizeResult q = lbfgs(quadratic(d, c), Eigen::VectorXd::Zero(4));
    CHECK((q.x - c).norm() < 1e-8);

    LbfgsOptions o;
    o.max_iterations = 500;
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const OptimizeResult r = lbfgs(rosenbrock, x0, o);
    CHECK(std::abs(r.x[0] - 1.0) < 1e-6);
    CHECK(std::abs(r.x[1] - 1.0) < 1e-6);
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      CHECK(r.history[i] <= r.history[i - 1]);
    }
  }

  TEST_CASE("divergence raises a numeric error") {
    const Objective grows = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      if (g != nullptr) {
        *g = -Eigen::VectorXd::Ones(x.size());
      }
      return 1.0 + std::exp(x.sum());
    };
    AdamOptions o;
    o.learning_rate = 1.0;
    CHECK_THROWS_AS(adam(grows, Eigen::VectorXd::Zero(2), o), NumericError);
    const Objective nan = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      if (g != nullptr) {
        *g = Eigen::VectorXd::Ones(x.size());
      }
      return x.sum() > -0.5 ? 1.0 : std::nan("");
    };
    CHECK_THROWS_AS(adam(nan, Eigen::VectorXd::Zero(2), o), NumericError);
  }
}
