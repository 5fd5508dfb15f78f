#include <cmath>

#include <gtest/gtest.h>

#include "sneakbp/detector/detect.hpp"

namespace sneakbp {
namespace {

TEST(Ese, ZeroRateCollapsesToTwoLevelRatio) {
  ChannelParams p;
  const LevelLikelihood lik(p);
  for (double y : {80.0, 300.0, 700.0})
    EXPECT_NEAR(ese_llr(y, 0.0, lik),
                std::log(gaussian_likelihood(y, 1000, 40) / gaussian_likelihood(y, 100, 40)), 1e-9);
}

TEST(Ese, MixtureFormula) {
  ChannelParams p;
  const LevelLikelihood lik(p);
  const double y = 180;
  const double eps = 0.3;
  const double mix = eps * gaussian_likelihood(y, p.r_sneak(), 40) + (1 - eps) * gaussian_likelihood(y, 1000, 40);
  EXPECT_NEAR(ese_llr(y, eps, lik), std::log(mix / gaussian_likelihood(y, 100, 40)), 1e-9);
  EXPECT_LT(ese_llr(100, 0.1, lik), 0.0);
}

TEST(Ese, NoSneakNoNoiseIsExact) {
  ChannelParams p;
  p.sigma = 1;
  p.p_sf = 0;
  Rng rng(41);
  const auto x = sample_data(p, rng);
  const auto y = read_array(x, sample_selector_failures(p, rng), p, rng);
  const auto r = ese_detector(y.signal(), p);
  EXPECT_EQ(r.sneak_rate, 0.0);
  EXPECT_EQ(r.x_hat, x);
}

TEST(Ese, DegenerateRateEstimate) {
  ChannelParams p;
  const LevelLikelihood lik(p);
  EXPECT_EQ(estimate_sneak_rate(Grid<double>(3, 3, 100.0), lik), 0.0);
  Grid<double> y(1, 4, 1000.0);
  y(0, 0) = 230;
  EXPECT_DOUBLE_EQ(estimate_sneak_rate(y, lik), 0.25);
}

TEST(Threshold, TwoLevelDecisions) {
  ChannelParams p;
  Grid<double> y(1, 4);
  y(0, 0) = 100;
  y(0, 1) = 1000;
  y(0, 2) = 230.769;
  y(0, 3) = 551;
  const auto x = threshold_detector(y, p);
  EXPECT_EQ(x(0, 0), 1);
  EXPECT_EQ(x(0, 1), 0);
  EXPECT_EQ(x(0, 2), 1);
  EXPECT_EQ(x(0, 3), 0);
}

TEST(Threshold, LowNoiseErrorRateIsSneakRateTimesZeros) {
  ChannelParams p;
  p.sigma = 1;
  p.p_sf = 0.01;
  Rng rng(42);
  long errors = 0;
  long bits = 0;
  for (int t = 0; t < 20000; ++t) {
    const auto y = read_array(sample_data(p, rng), sample_selector_failures(p, rng), p, rng);
    const auto x = threshold_detector(y.signal(), p);
    for (std::size_t k = 0; k < x.size(); ++k) errors += x.at_flat(k) != y.truth().data.at_flat(k);
    bits += static_cast<long>(x.size());
  }
  const double expect = theoretical_sneak_rate(p) * (1 - p.q);
  // Cells of one array are dependent; compare the point estimate loosely.
  EXPECT_NEAR(static_cast<double>(errors) / static_cast<double>(bits), expect, 0.1 * expect);
}

TEST(Lognormal, DetectorsUseMaximumLikelihoodLevels) {
  ChannelParams p;
  p.noise = NoiseModel::lognormal;
  p.sigma = 60;
  const LevelLikelihood lik(p);
  Grid<double> y(1, 3);
  y(0, 0) = 95;
  y(0, 1) = 990;
  y(0, 2) = 240;
  const auto labels = pre_detect(y, p);
  EXPECT_EQ(labels(0, 0), CellLabel::uncertain);
  EXPECT_EQ(labels(0, 1), CellLabel::high);
  EXPECT_EQ(labels(0, 2), CellLabel::uncertain);
  EXPECT_TRUE(std::isfinite(ese_llr(240, 0.2, lik)));
}

}  // namespace
}  // namespace sneakbp
