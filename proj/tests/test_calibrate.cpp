#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "viewrace/calibrate.hpp"
#include "viewrace/errors.hpp"

using namespace viewrace;

TEST(EstimateLambda, NoiselessRoundTrip) {
  const double M = 1e6;
  std::vector<Observation> s;
  for (int k = 0; k <= 30; ++k) {
    const double t = 0.001 * k;
    s.push_back({t, M * -std::expm1(-100.0 * t)});
  }
  const auto fit = estimate_lambda(s, M, 1.0);
  EXPECT_NEAR(fit.lambda_hat, 100.0, 1e-6);
  EXPECT_NEAR(fit.z_hat, 0.0, 1e-9);
  EXPECT_LE(fit.rms_residual, 1e-9);

  // Level scaling and a nonzero start.
  std::vector<Observation> z;
  for (int k = 0; k < 10; ++k) {
    const double t = 0.002 * k;
    z.push_back({t, M * (1.0 - 0.9 * std::exp(-40.0 * 5.0 * t))});
  }
  const auto fz = estimate_lambda(z, M, 5.0);
  EXPECT_NEAR(fz.lambda_hat, 40.0, 40.0 * 1e-6);
  EXPECT_NEAR(fz.z_hat, 0.1, 1e-9);
}

TEST(EstimateLambda, NoisyFractions) {
  const double M = 1e6;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int seed = 0; seed < 100; ++seed) {
    std::vector<Observation> s;
    for (int k = 1; k <= 40; ++k) {
      const double t = 0.0005 * k;
      const double x = std::clamp(-std::expm1(-100.0 * t) + noise(rng), 0.0, 0.999);
      s.push_back({t, M * x});
    }
    EXPECT_NEAR(estimate_lambda(s, M, 1.0).lambda_hat, 100.0, 5.0) << seed;
  }
}

TEST(EstimateLambda, Errors) {
  const std::vector<Observation> flat{{0.0, 10.0}, {1.0, 10.0}, {2.0, 10.0}};
  EXPECT_THROW(estimate_lambda(flat, 100.0, 1.0), DegenerateSeries);
  const std::vector<Observation> full{{0.0, 10.0}, {1.0, 50.0}, {2.0, 100.0}};
  EXPECT_THROW(estimate_lambda(full, 100.0, 1.0), DegenerateSeries);
  const std::vector<Observation> two{{0.0, 10.0}, {1.0, 20.0}};
  EXPECT_THROW(estimate_lambda(two, 100.0, 1.0), PreconditionError);
  const std::vector<Observation> back{{0.0, 10.0}, {1.0, 20.0}, {0.5, 30.0}};
  EXPECT_THROW(estimate_lambda(back, 100.0, 1.0), PreconditionError);
  const std::vector<Observation> over{{0.0, 10.0}, {1.0, 20.0}, {2.0, 300.0}};
  EXPECT_THROW(estimate_lambda(over, 100.0, 1.0), PreconditionError);
}

TEST(ReadSeriesCsv, ColumnsInAnyOrder) {
  std::istringstream in("views,note,t\n1,a,0\n5,b,0.5\n9,c,1\n");
  const auto s = read_series_csv(in);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[1].t, 0.5);
  EXPECT_DOUBLE_EQ(s[1].views, 5.0);
  std::istringstream bad("time,count\n0,1\n");
  EXPECT_ANY_THROW(read_series_csv(bad));
}
