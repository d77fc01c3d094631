#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "erto/geometry.hpp"
#include "support/oracles.hpp"

using namespace erto;

TEST(TransmissionRange, CalibrationAnchor) {
  EXPECT_NEAR(transmission_range(0.1, ChannelParams::defaults()), 100.0, 1e-9);
}

TEST(TransmissionRange, MaxPowerDoublesRange) {
  EXPECT_NEAR(transmission_range(0.8, ChannelParams::defaults()), 200.0, 1e-9);
}

TEST(TransmissionRange, PowerLaw) {
  auto ch = ChannelParams::defaults();
  for (double eta : {2.0, 3.0, 4.0}) {
    ch.eta = eta;
    ch.calibrate();
    EXPECT_NEAR(transmission_range(0.4, ch) / transmission_range(0.2, ch), std::pow(2.0, 1.0 / eta), 1e-12);
  }
}

TEST(TransmissionRange, InverseRoundTrip) {
  const auto ch = ChannelParams::defaults();
  EXPECT_NEAR(power_for_range(transmission_range(0.37, ch), ch), 0.37, 1e-12);
}

TEST(CandidateArea, EmptyCircle) { EXPECT_EQ(candidate_relay_area(0.0, 50.0), 0.0); }

TEST(CandidateArea, FullContainment) {
  EXPECT_NEAR(candidate_relay_area(100.0, 50.0), std::numbers::pi * 2500.0, 1e-9);
  EXPECT_NEAR(candidate_relay_area(300.0, 50.0), std::numbers::pi * 2500.0, 1e-9);
}

TEST(CandidateArea, EqualRadiiLens) {
  const double expected = 2.0 * std::numbers::pi / 3.0 - std::sqrt(3.0) / 2.0;
  EXPECT_NEAR(candidate_relay_area(1.0, 1.0), expected, 1e-12);
  EXPECT_NEAR(candidate_relay_area(1.0, 1.0), 1.22837, 1e-5);
  EXPECT_NEAR(oracle::lens_area_mc(1.0, 1.0, 1'000'000, 5), expected, 0.01 * expected);
}

TEST(CandidateArea, ContinuousAtContainment) {
  const double d = 40.0;
  EXPECT_NEAR(candidate_relay_area(2.0 * d * (1 - 1e-9), d), std::numbers::pi * d * d, 1e-4);
}

TEST(CandidateArea, MonotoneInRange) {
  double prev = 0.0;
  for (double r = 1.0; r <= 250.0; r += 1.0) {
    const double a = candidate_relay_area(r, 100.0);
    ASSERT_GE(a, prev);
    prev = a;
  }
}

TEST(CandidateArea, RejectsBadInputs) {
  EXPECT_THROW(candidate_relay_area(-1.0, 10.0), DomainError);
  EXPECT_THROW(candidate_relay_area(10.0, 0.0), DomainError);
}

TEST(HalfAngle, Examples) {
  EXPECT_NEAR(dsa_half_angle(50.0, 50.0), std::numbers::pi / 3.0, 1e-12);
  EXPECT_NEAR(dsa_half_angle(std::sqrt(2.0) * 50.0, 50.0), std::numbers::pi / 4.0, 1e-12);
  EXPECT_NEAR(dsa_half_angle(100.0 * (1 - 1e-12), 50.0), 0.0, 1e-5);
  EXPECT_THROW(dsa_half_angle(100.0, 50.0), GeometryDegenerate);
}

TEST(Poisson, Examples) {
  EXPECT_NEAR(poisson_pmf(2.5, 0), std::exp(-2.5), 1e-15);
  EXPECT_NEAR(poisson_pmf(1.0, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(poisson_pmf(1.0, 1), 0.36788, 1e-5);
  double sum = 0.0;
  for (int n = 0; n < 200; ++n) sum += poisson_pmf(17.3, n);
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(poisson_pmf(0.0, 0), 1.0);
  EXPECT_EQ(poisson_pmf(0.0, 3), 0.0);
  EXPECT_THROW(poisson_pmf(1.0, -1), DomainError);
}

TEST(RelayDegree, UsesLensAtTransmitRange) {
  const auto ch = ChannelParams::defaults();
  const double rho = 1e-4, d_sd = 150.0;
  const double lambda = rho * candidate_relay_area(transmission_range(0.3, ch), d_sd);
  for (int n = 0; n < 6; ++n)
    EXPECT_NEAR(relay_degree_pmf(0.3, d_sd, n, {rho}, ch),
                std::pow(lambda, n) * std::exp(-lambda) / std::tgamma(n + 1.0), 1e-14);
}
