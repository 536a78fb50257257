#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "risbf/channel.hpp"

using namespace risbf;

namespace {

SystemConfig cfg_small() { return oracle::small_config(2, 2, 1, 4, 8); }

Realization fixed_realization(const SystemConfig& cfg, const GeometryConfig& geo, std::uint64_t seed) {
  return draw_realization(cfg, geo, seed);
}

}  // namespace

TEST(PathLoss, Examples) {
  EXPECT_NEAR(path_loss_db(10.0, true), 57.6, 1e-12);
  EXPECT_NEAR(path_loss_db(10.0, false), 69.3, 1e-12);
  EXPECT_NEAR(path_loss_db(200.0, true), 35.6 + 22.0 * std::log10(200.0), 1e-12);
  EXPECT_NEAR(path_loss_db(200.0, true), 86.222, 1e-3);
}

TEST(PathLoss, NonPositiveDistanceIsADomainError) {
  EXPECT_THROW(path_loss_db(0.0, true), DomainError);
  EXPECT_THROW(path_loss_db(-3.0, false), DomainError);
}

TEST(PathLoss, GainIsAttenuation) {
  EXPECT_NEAR(path_loss_gain(10.0, true), std::pow(10.0, -5.76), 1e-18);
  EXPECT_LT(path_loss_gain(1.0, true), 1.0);
}

TEST(SteeringVector, Examples) {
  const CVec a = steering_vector(4, 0.0);
  for (int m = 0; m < 4; ++m) EXPECT_NEAR(std::abs(a[m] - 1.0), 0.0, 1e-15);
  const CVec b = steering_vector(2, std::numbers::pi / 2);
  EXPECT_EQ(b[0], cplx(1.0));
  EXPECT_NEAR(std::abs(b[1] - cplx(-1.0)), 0.0, 1e-15);
  const CVec c = steering_vector(3, std::numbers::pi / 6);
  EXPECT_EQ(c[0], cplx(1.0));
  EXPECT_NEAR(std::abs(c[1] - cplx(0.0, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c[2] - cplx(-1.0)), 0.0, 1e-15);
}

TEST(GenerateChannels, ZeroRicianFactorIsScaledRayleigh) {
  SystemConfig cfg = cfg_small();
  GeometryConfig geo;
  geo.rician_k = 0.0;
  Rng rng(5);
  const auto pos = sample_user_positions(geo, cfg.n_users, rng);
  const auto ang = sample_steering_angles(geo, cfg.n_users, rng);
  const ChannelSet ch = generate_channels(cfg, geo, ang, pos, 77);
  Rng ref(77);
  const CMat g_bar = ref.complex_gaussian(cfg.n_ris, cfg.n_tx);
  const double l1 = path_loss_gain(200.0, true);
  EXPECT_LT((ch.bs_ris - std::sqrt(l1) * g_bar).norm(), 1e-12 * ch.bs_ris.norm());
}

TEST(GenerateChannels, HugeRicianFactorIsRankOne) {
  SystemConfig cfg = SystemConfig::desk_preset();
  GeometryConfig geo;
  geo.rician_k = 1e12;
  const Realization r = draw_realization(cfg, geo, 3);
  Eigen::JacobiSVD<CMat> svd(r.channels.bs_ris);
  const auto& s = svd.singularValues();
  EXPECT_LT(s[1], 1e-5 * s[0]);
}

TEST(GenerateChannels, SameSeedIsBitIdentical) {
  const SystemConfig cfg = SystemConfig::desk_preset();
  const Realization a = draw_realization(cfg, GeometryConfig{}, 42);
  const Realization b = draw_realization(cfg, GeometryConfig{}, 42);
  EXPECT_TRUE(a.channels.bs_ris == b.channels.bs_ris);
  for (int k = 0; k < cfg.n_users; ++k) {
    EXPECT_TRUE(a.channels.ris_user[k] == b.channels.ris_user[k]);
    EXPECT_TRUE(a.channels.direct[k] == b.channels.direct[k]);
  }
  EXPECT_TRUE(a.theta0.values() == b.theta0.values());
  const Realization c = draw_realization(cfg, GeometryConfig{}, 43);
  EXPECT_FALSE(a.channels.bs_ris == c.channels.bs_ris);
}

TEST(GenerateChannels, ShapesMatchConfig) {
  const SystemConfig cfg = SystemConfig::desk_preset();
  const Realization r = draw_realization(cfg, GeometryConfig{}, 1);
  EXPECT_NO_THROW(r.channels.validate(cfg));
  EXPECT_EQ(r.channels.n_ris(), 64);
  EXPECT_EQ(r.channels.n_tx(), 16);
  EXPECT_EQ(r.channels.n_rx(), 2);
  EXPECT_EQ(r.theta0.size(), 64);
}

TEST(GenerateChannels, RejectsWrongPerUserInputs) {
  const SystemConfig cfg = SystemConfig::desk_preset();
  GeometryConfig geo;
  Rng rng(1);
  auto ang = sample_steering_angles(geo, cfg.n_users, rng);
  std::vector<Point2> pos = {{200.0, 30.0}};
  EXPECT_THROW(generate_channels(cfg, geo, ang, pos, 1), std::invalid_argument);
}

// Rician mixture keeps E||G||^2 = L1 Ns Nt.
TEST(GenerateChannels, MeanPowerOfBsRisLink) {
  const SystemConfig cfg = SystemConfig::desk_preset();
  GeometryConfig geo;
  double acc = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) acc += draw_realization(cfg, geo, s).channels.bs_ris.squaredNorm();
  const double expect = path_loss_gain(200.0, true) * cfg.n_ris * cfg.n_tx;
  EXPECT_NEAR(acc / 1000.0 / expect, 1.0, 0.05);
}

TEST(GenerateChannels, DirectLinkUsesAmplitudeOfNlosLoss) {
  SystemConfig cfg = oracle::small_config(1, 1, 1, 8, 4);
  GeometryConfig geo;
  geo.user_radius = 0.0;   // user exactly at the disk center
  const double l3 = path_loss_gain(distance(geo.bs_pos, geo.user_center), false);
  double acc = 0.0;
  for (std::uint64_t s = 0; s < 2000; ++s) acc += draw_realization(cfg, geo, s).channels.direct[0].squaredNorm();
  EXPECT_NEAR(acc / 2000.0 / (l3 * 8), 1.0, 0.05);
}

TEST(SampleUserPositions, InsideTheDisk) {
  GeometryConfig geo;
  Rng rng(9);
  const auto pos = sample_user_positions(geo, 5000, rng);
  double mean_r2 = 0.0;
  for (const auto& p : pos) {
    const double d = distance(p, geo.user_center);
    EXPECT_LE(d, geo.user_radius + 1e-12);
    mean_r2 += d * d;
  }
  // uniform on the disk: E r^2 = R^2 / 2
  EXPECT_NEAR(mean_r2 / 5000.0, 50.0, 2.0);
}

TEST(SampleSteeringAngles, BoresightAndRange) {
  GeometryConfig geo;
  Rng rng(2);
  const auto ang = sample_steering_angles(geo, 100, rng);
  EXPECT_EQ(ang.bs_ris_aod, 0.0);
  EXPECT_EQ(ang.bs_ris_aoa, 0.0);
  for (double a : ang.ris_user_aod) {
    EXPECT_GT(a, -std::numbers::pi / 2);
    EXPECT_LT(a, std::numbers::pi / 2);
  }
}

TEST(CompositeChannel, NoReflectedPathGivesDirectLink) {
  const SystemConfig cfg = cfg_small();
  const ChannelSet ch = fixed_realization(cfg, GeometryConfig{}, 4).channels.without_reflection();
  Rng rng(1);
  const PhaseVector th = random_phase_vector(cfg.n_ris, rng);
  EXPECT_TRUE(composite_channel(ch, th, 1) == ch.direct[1]);
}

TEST(CompositeChannel, AllOnesWithoutDirectLinkIsUG) {
  const SystemConfig cfg = cfg_small();
  ChannelSet ch = fixed_realization(cfg, GeometryConfig{}, 4).channels;
  for (auto& d : ch.direct) d.setZero();
  const CMat h = composite_channel(ch, PhaseVector::ones(cfg.n_ris), 0);
  EXPECT_LT((h - ch.ris_user[0] * ch.bs_ris).norm(), 1e-14 * h.norm());
}

TEST(CompositeChannel, MatchesTripleLoop) {
  const SystemConfig cfg = oracle::small_config(2, 2, 1, 2, 3);
  Rng rng(12);
  const ChannelSet ch = oracle::gaussian_channels(cfg, rng);
  const PhaseVector th = random_phase_vector(3, rng);
  for (int k = 0; k < 2; ++k)
    EXPECT_LT((composite_channel(ch, th, k) - oracle::composite(ch, th.values(), k)).norm(), 1e-13);
}

// U_k diag(theta) G with theta kept on the torus: a common phase rotation
// scales it, and it splits into the sum over disjoint element subsets.
TEST(CompositeChannel, HomogeneousPartIsLinearInTheta) {
  const SystemConfig cfg = cfg_small();
  Rng rng(8);
  ChannelSet ch = oracle::gaussian_channels(cfg, rng);
  for (auto& d : ch.direct) d.setZero();
  const PhaseVector p = random_phase_vector(cfg.n_ris, rng);
  const cplx rot = std::polar(1.0, 0.7);
  const CMat h = composite_channel(ch, p, 0);
  EXPECT_LT((composite_channel(ch, PhaseVector::from_unit(rot * p.values()), 0) - rot * h).norm(),
            1e-13 * h.norm());

  ChannelSet lo = ch, hi = ch;
  const int half = cfg.n_ris / 2;
  lo.ris_user[0].rightCols(cfg.n_ris - half).setZero();
  hi.ris_user[0].leftCols(half).setZero();
  EXPECT_LT((composite_channel(lo, p, 0) + composite_channel(hi, p, 0) - h).norm(), 1e-13 * h.norm());
}

TEST(CompositeChannel, AffineInThetaWithDirectLink) {
  const SystemConfig cfg = cfg_small();
  Rng rng(18);
  const ChannelSet ch = oracle::gaussian_channels(cfg, rng);
  const PhaseVector p1 = random_phase_vector(cfg.n_ris, rng), p2 = random_phase_vector(cfg.n_ris, rng);
  const double a = 0.25, b = 0.75;   // convex combination; the result is off the torus
  const CMat mixed = oracle::composite(ch, a * p1.values() + b * p2.values(), 1);
  const CMat expect = a * composite_channel(ch, p1, 1) + b * composite_channel(ch, p2, 1) -
                      (a + b - 1.0) * ch.direct[1];
  EXPECT_LT((mixed - expect).norm(), 1e-12 * mixed.norm());
}

TEST(StackChannels, BlocksAreCompositeChannels) {
  const SystemConfig cfg = oracle::small_config(3, 2, 1, 4, 8);
  Rng rng(3);
  const ChannelSet ch = oracle::gaussian_channels(cfg, rng);
  const PhaseVector th = random_phase_vector(8, rng);
  const CMat h = stack_channels(ch, th);
  EXPECT_EQ(h.rows(), 6);
  EXPECT_EQ(h.cols(), 4);
  for (int k = 0; k < 3; ++k) EXPECT_TRUE(h.middleRows(2 * k, 2) == composite_channel(ch, th, k));
}

TEST(StackChannels, SingleUserEqualsComposite) {
  const SystemConfig cfg = oracle::small_config(1, 2, 1, 4, 8);
  Rng rng(4);
  const ChannelSet ch = oracle::gaussian_channels(cfg, rng);
  const PhaseVector th = random_phase_vector(8, rng);
  EXPECT_TRUE(stack_channels(ch, th) == composite_channel(ch, th, 0));
}

TEST(CompositeChannel, RejectsWrongThetaLength) {
  const SystemConfig cfg = cfg_small();
  Rng rng(4);
  const ChannelSet ch = oracle::gaussian_channels(cfg, rng);
  EXPECT_THROW(composite_channel(ch, PhaseVector::ones(3), 0), std::invalid_argument);
}

TEST(ChannelSet, ValidateCatchesShapesAndNonFinite) {
  const SystemConfig cfg = cfg_small();
  Rng rng(4);
  ChannelSet ch = oracle::gaussian_channels(cfg, rng);
  EXPECT_NO_THROW(ch.validate(cfg));
  SystemConfig other = cfg;
  other.n_ris = 9;
  EXPECT_THROW(ch.validate(other), std::invalid_argument);
  ch.direct[1](0, 0) = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
  EXPECT_THROW(ch.validate(cfg), DomainError);
}
