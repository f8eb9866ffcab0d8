#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ecostream/model.hpp"

using namespace ecostream;

namespace {

ModelConstants small_range() {
  ModelConstants c;
  c.x_max = 5000.0;
  return c;
}

}  // namespace

TEST(Mos, EndpointsAreExact) {
  const auto c = small_range();
  for (double gamma : {1.0, 1.5, 2.0, 3.7, 5.0}) {
    EXPECT_NEAR(mos(c.x_min, gamma, c).value, 1.0, 1e-12);
    EXPECT_NEAR(mos(c.x_max / gamma, gamma, c).value, 5.0, 1e-12);
  }
}

TEST(Mos, FrozenMidpoint) {
  // 1 + 4 ln(1200/300) / ln(2500/300), evaluated at 30 digits.
  EXPECT_NEAR(mos(1200.0, 2.0, small_range()).value, 3.61532462819105870, 1e-13);
  EXPECT_NEAR(utility(1200.0, 2.0, small_range()).value, 0.72306492563821174, 1e-14);
}

TEST(Mos, ClampsOutsideSatisfactionRange) {
  const auto c = small_range();
  EXPECT_EQ(mos(100.0, 1.0, c).value, 1.0);
  EXPECT_EQ(mos(4000.0, 2.0, c).value, 5.0);
  EXPECT_GT(mos_unclamped(4000.0, 2.0, c), 5.0);
  EXPECT_LT(mos_unclamped(100.0, 1.0, c), 1.0);
}

TEST(Mos, RejectsInvalidInput) {
  const auto c = small_range();
  EXPECT_THROW(mos(0.0, 1.0, c), DomainError);
  EXPECT_THROW(mos(-5.0, 1.0, c), DomainError);
  EXPECT_THROW(mos(1000.0, 0.5, c), DomainError);
  EXPECT_THROW(mos(1000.0, 20.0, c), DomainError);  // x_max / gamma <= x_min
}

TEST(Utility, Endpoints) {
  const auto c = small_range();
  EXPECT_NEAR(utility(c.x_min, 1.0, c).value, 0.2, 1e-12);
  EXPECT_NEAR(utility(c.x_max / 3.0, 3.0, c).value, 1.0, 1e-12);
}

TEST(DeltaUtility, Examples) {
  const auto c = small_range();
  EXPECT_NEAR(delta_utility(5000.0, 300.0, 1.0, c), 0.8, 1e-12);
  EXPECT_EQ(delta_utility(4000.0, 3000.0, 2.0, c), 0.0);  // both above x_max / gamma
  EXPECT_THROW(delta_utility(1000.0, 1000.0, 1.0, c), DomainError);
  EXPECT_THROW(delta_utility(900.0, 1000.0, 1.0, c), DomainError);
  double prev = delta_utility(2000.0, 1000.0, 1.0, c);
  for (double eps : {100.0, 10.0, 1.0, 0.1, 0.001}) {
    const double du = delta_utility(2000.0, 2000.0 - eps, 1.0, c);
    EXPECT_LT(du, prev);
    prev = du;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(Energy, Examples) {
  const ModelConstants c;
  EXPECT_EQ(session_energy(0.0, c), c.p0);
  EXPECT_DOUBLE_EQ(session_energy(3500.0, c), 710.0);
  EXPECT_EQ(energy_reduction(3500.0, 3500.0, c), 0.0);
  EXPECT_DOUBLE_EQ(energy_reduction(3500.0, 900.0, c), 520.0);
  EXPECT_EQ(bitrate_from_energy(c.p0, c), 0.0);
  EXPECT_DOUBLE_EQ(bitrate_from_energy(710.0, c), 3500.0);
  EXPECT_EQ(co2(0.0, c), 0.0);
  EXPECT_DOUBLE_EQ(co2(1000.0, c), 0.388);
  EXPECT_THROW(session_energy(-1.0, c), DomainError);
  EXPECT_THROW(energy_reduction(1000.0, 2000.0, c), DomainError);
  EXPECT_THROW(bitrate_from_energy(5.0, c), DomainError);
}

TEST(Energy, InverseRoundTrip) {
  const ModelConstants c;
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> bitrate(0.0, 20000.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = bitrate(gen);
    const double back = bitrate_from_energy(session_energy(x, c), c);
    EXPECT_LE(std::abs(back - x), 1e-9 * std::max(x, 1.0));
  }
}

TEST(DeltaUOfDeltaE, CompositionIdentity) {
  const auto c = small_range();
  EXPECT_EQ(delta_u_of_delta_e(0.0, 3000.0, 2.0, c), 0.0);
  for (double xh : {2000.0, 3000.0, 5000.0}) {
    for (double xl : {300.0, 600.0, 1500.0}) {
      for (double g : {1.0, 2.5}) {
        EXPECT_NEAR(delta_u_of_delta_e(c.alpha * (xh - xl), xh, g, c),
                    delta_utility(xh, xl, g, c), 1e-12);
      }
    }
  }
  EXPECT_THROW(delta_u_of_delta_e(-1.0, 3000.0, 1.0, c), DomainError);
}

TEST(ModelConstants, Validate) {
  ModelConstants c;
  EXPECT_NO_THROW(c.validate());
  c.x_min = c.x_max;
  EXPECT_THROW(c.validate(), ConfigError);
}
