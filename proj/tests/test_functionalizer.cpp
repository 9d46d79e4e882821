#include <doctest.h>

#include <cmath>

#include "urbanplan/functionalizer.hpp"
#include "urbanplan/rng.hpp"

using namespace urban;

namespace {

ZonePlan random_plan(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  ZonePlan plan;
  plan.n = n;
  plan.labels.resize(static_cast<std::size_t>(n * n));
  for (int& l : plan.labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
  return plan;
}

}  // namespace

TEST_CASE("partition_zones builds binary masks that partition the grid") {
  ZonePlan uniform;
  uniform.n = 3;
  uniform.labels.assign(9, 0);
  const Tensor masks = partition_zones(uniform, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(masks.at(0, i, j) == 1.0);
      CHECK(masks.at(1, i, j) == 0.0);
    }
  }

  ZonePlan hand;
  hand.n = 2;
  hand.labels = {0, 1, 1, 1};
  const Tensor f = partition_zones(hand, 2);
  CHECK(f.at(0, 0, 0) == 1.0);
  CHECK(f.at(0, 0, 1) == 0.0);
  CHECK(f.at(0, 1, 0) == 0.0);
  CHECK(f.at(0, 1, 1) == 0.0);
  CHECK(f.at(1, 0, 0) == 0.0);
  CHECK(f.at(1, 0, 1) == 1.0);
  CHECK(f.at(1, 1, 0) == 1.0);
  CHECK(f.at(1, 1, 1) == 1.0);

  // Partition invariant on random plans.
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const ZonePlan plan = random_plan(4, 3, trial);
    const Tensor fm = partition_zones(plan, 3);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        double total = 0.0;
        for (std::size_t z = 0; z < 3; ++z) {
          const double v = fm.at(z, i, j);
          CHECK((v == 0.0 || v == 1.0));
          total += v;
        }
        CHECK(total == 1.0);
      }
    }
  }

  ZonePlan bad;
  bad.n = 1;
  bad.labels = {5};
  CHECK_THROWS(partition_zones(bad, 2));
}

TEST_CASE("avg_fusion averages along the first spatial axis") {
  CHECK(avg_fusion(Tensor::full({1, 2, 2}, 1.0)).at(0, 0) == 1.0);
  CHECK(avg_fusion(Tensor::full({1, 2, 2}, 1.0)).at(0, 1) == 1.0);
  CHECK(avg_fusion(Tensor({1, 2, 2})).at(0, 0) == 0.0);

  Tensor mask({1, 2, 2});
  mask.at(0, 0, 0) = 1.0;
  const Tensor fused = avg_fusion(mask);
  CHECK(fused.at(0, 0) == doctest::Approx(0.5));
  CHECK(fused.at(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("project with zero weights spreads z uniformly") {
  ZonePlan plan = random_plan(3, 2, 5);
  const Tensor masks = partition_zones(plan, 2);
  Parameter w_a("w_a", Tensor({3, 1}));
  const Tensor z({4}, {0.5, -1.0, 2.0, 0.25});
  const FunctionalityProjections fp = project(masks, z, w_a);
  CHECK(fp.proportions.at(0, 0) == doctest::Approx(0.5));
  CHECK(fp.proportions.at(1, 0) == doctest::Approx(0.5));
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t o = 0; o < 4; ++o) {
      CHECK(fp.projections.at(m, o) == doctest::Approx(z.at(o) / 2.0));
    }
  }
}

TEST_CASE("project matches the hand-evaluated softmax case") {
  // avg_fusion rows [1,0] and [0,1] with W_a = [1,0]^T -> scores [1,0].
  ZonePlan plan;
  plan.n = 2;
  plan.labels = {0, 1, 0, 1};  // column 0 -> zone 0, column 1 -> zone 1
  const Tensor masks = partition_zones(plan, 2);
  const Tensor fused = avg_fusion(masks);
  CHECK(fused.at(0, 0) == 1.0);
  CHECK(fused.at(0, 1) == 0.0);
  CHECK(fused.at(1, 0) == 0.0);
  CHECK(fused.at(1, 1) == 1.0);

  Parameter w_a("w_a", Tensor({2, 1}, {1.0, 0.0}));
  const Tensor z({3}, {2.0, -1.0, 0.5});
  const FunctionalityProjections fp = project(masks, z, w_a);
  const double e = std::exp(1.0);
  const double p0 = e / (e + 1.0);
  CHECK(fp.proportions.at(0, 0) == doctest::Approx(p0).epsilon(1e-9));
  CHECK(fp.proportions.at(1, 0) == doctest::Approx(1.0 - p0).epsilon(1e-9));
  CHECK(fp.proportions.at(0, 0) == doctest::Approx(0.7311).epsilon(1e-4));
  for (std::size_t o = 0; o < 3; ++o) {
    CHECK(fp.projections.at(0, o) == doctest::Approx(p0 * z.at(o)).epsilon(1e-12));
  }
}

TEST_CASE("projection rows sum back to z exactly") {
  Rng rng(9);
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const ZonePlan plan = random_plan(5, 4, 100 + trial);
    const Tensor masks = partition_zones(plan, 4);
    Parameter w_a("w_a", Tensor({5, 1}));
    for (double& v : w_a.value.values()) v = rng.normal();
    Tensor z({6});
    for (double& v : z.values()) v = rng.normal();
    const FunctionalityProjections fp = project(masks, z, w_a);

    double psum = 0.0;
    for (std::size_t m = 0; m < 4; ++m) {
      CHECK(fp.proportions.at(m, 0) > 0.0);  // softmax keeps empty zones positive
      psum += fp.proportions.at(m, 0);
    }
    CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));

    for (std::size_t o = 0; o < 6; ++o) {
      double col = 0.0;
      for (std::size_t m = 0; m < 4; ++m) col += fp.projections.at(m, o);
      CHECK(std::abs(col - z.at(o)) <= 1e-9);
    }
  }
}
