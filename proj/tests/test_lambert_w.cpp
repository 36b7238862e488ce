#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "d2dcache/lambert_w.hpp"

using namespace d2dcache;

TEST(LambertW0, KnownValues) {
  EXPECT_EQ(lambert_w0(0.0), 0.0);
  EXPECT_NEAR(lambert_w0(std::numbers::e), 1.0, 1e-15);
  EXPECT_EQ(lambert_w0(-1.0 / std::numbers::e), -1.0);
  // Omega constant.
  EXPECT_NEAR(lambert_w0(1.0), 0.567143290409783873, 1e-15);
}

TEST(LambertW0, ForwardMapOverWGrid) {
  for (int k = 0; k <= 2100; ++k) {
    const double w = -1.0 + 0.01 * k;
    const double x = w * std::exp(w);
    EXPECT_NEAR(lambert_w0(x), w, 1e-10) << "w=" << w;
    EXPECT_GE(lambert_w0(x), -1.0);
  }
}

TEST(LambertW0, ResidualOverLogGrid) {
  for (int k = 0; k <= 360; ++k) {
    const double x = std::pow(10.0, -12.0 + 0.05 * k);
    const double w = lambert_w0(x);
    EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-12 * std::max(1.0, x)) << "x=" << x;
  }
}

TEST(LambertW0, NegativeBranchResidual) {
  for (int k = 1; k < 100; ++k) {
    const double x = -k / (100.0 * std::numbers::e);
    const double w = lambert_w0(x);
    EXPECT_GE(w, -1.0);
    EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-12);
  }
}

TEST(LambertW0, DomainError) {
  try {
    lambert_w0(-0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainError);
  }
  EXPECT_THROW(lambert_w0(NAN), Error);
}

TEST(LambertW0OfExp, AgreesWithDirectEvaluationAndExtendsPastOverflow) {
  for (double l : {-20.0, -1.0, 0.0, 3.0, 50.0, 400.0, 499.0}) {
    EXPECT_NEAR(lambert_w0_of_exp(l), lambert_w0(std::exp(l)), 1e-12 * std::max(1.0, l));
  }
  for (double l : {500.0, 800.0, 1e4, 1e8}) {
    const double w = lambert_w0_of_exp(l);
    EXPECT_NEAR(w + std::log(w), l, 1e-12 * l);
  }
}
