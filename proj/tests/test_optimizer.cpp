#include <doctest.h>

#include <cmath>

#include "urbanplan/optimizer.hpp"

using urban::AdamOptimizer;
using urban::Parameter;
using urban::Tensor;

TEST_CASE("first adam step moves by about lr in the gradient direction") {
  Parameter p("p", Tensor({1, 2}, {1.0, -1.0}));
  p.grad = Tensor({1, 2}, {1.0, -1.0});
  AdamOptimizer opt;
  opt.step({&p});
  // Bias correction makes the first update lr * sign(g) up to epsilon.
  CHECK(p.value.at(0) == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
  CHECK(p.value.at(1) == doctest::Approx(-1.0 + 1e-3).epsilon(1e-6));
  CHECK(opt.step_count() == 1);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  Parameter p("p", Tensor({2, 2}, {1, 2, 3, 4}));
  AdamOptimizer opt;
  opt.step({&p});
  opt.step({&p});
  CHECK(p.value.at(0) == 1.0);
  CHECK(p.value.at(3) == 4.0);
}

TEST_CASE("identical state and gradients give identical trajectories") {
  Parameter a("a", Tensor({1, 3}, {0.5, -0.25, 2.0}));
  Parameter b("b", Tensor({1, 3}, {0.5, -0.25, 2.0}));
  AdamOptimizer oa, ob;
  for (int step = 0; step < 5; ++step) {
    for (std::size_t i = 0; i < 3; ++i) {
      const double g = std::sin(step + 1.0 + static_cast<double>(i));
      a.grad.at(i) = g;
      b.grad.at(i) = g;
    }
    oa.step({&a});
    ob.step({&b});
    a.reset_grad();
    b.reset_grad();
  }
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.value.at(i) == b.value.at(i));
}

TEST_CASE("gradients are left untouched by step") {
  Parameter p("p", Tensor({1, 1}, {1.0}));
  p.grad.at(0) = 2.5;
  AdamOptimizer opt;
  opt.step({&p});
  CHECK(p.grad.at(0) == 2.5);
}
