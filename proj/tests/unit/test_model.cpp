#include <gtest/gtest.h>

#include <numbers>
#include <vector>

#include "risbf/model.hpp"
#include "risbf/rng.hpp"

using namespace risbf;

TEST(DbmToWatts, Examples) {
  EXPECT_DOUBLE_EQ(dbm_to_watts(30.0), 1.0);
  EXPECT_NEAR(dbm_to_watts(0.0), 1e-3, 1e-18);
  EXPECT_NEAR(dbm_to_watts(-90.0), 1e-12, 1e-27);
}

TEST(DbmToWatts, RoundTripOverFifteenDecades) {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::pow(10.0, rng.uniform(-15.0, 3.0));
    EXPECT_NEAR(dbm_to_watts(watts_to_dbm(x)) / x, 1.0, 1e-12);
  }
  EXPECT_NEAR(dbm_to_watts(watts_to_dbm(1e-15)) / 1e-15, 1.0, 1e-12);
  EXPECT_NEAR(dbm_to_watts(watts_to_dbm(1e3)) / 1e3, 1.0, 1e-12);
}

TEST(NatsToBits, DividesByLn2) { EXPECT_NEAR(nats_to_bits(std::log(2.0) * 3.0), 3.0, 1e-15); }

TEST(ValidateConfig, ReferenceDefaultsAreValid) {
  const SystemConfig cfg = SystemConfig::full_scale();
  EXPECT_EQ(cfg.n_tx, 64);
  EXPECT_EQ(cfg.n_ris, 400);
  EXPECT_EQ(cfg.n_users, 4);
  EXPECT_EQ(cfg.weights, (std::vector<double>{0.2449, 0.2509, 0.2570, 0.2472}));
  EXPECT_NEAR(cfg.power_bs, dbm_to_watts(30.0), 1e-15);
  EXPECT_NEAR(cfg.noise_power, dbm_to_watts(-90.0), 1e-27);
  EXPECT_EQ(cfg.ls_shrink, 0.5);
  EXPECT_EQ(cfg.ao_tol, 1e-5);
  EXPECT_EQ(cfg.ls_beta, 1e-7);
  const auto rep = validate_config(cfg);
  EXPECT_TRUE(rep.ok());
  EXPECT_FALSE(rep.has_warnings());
}

TEST(ValidateConfig, DeskPresetIsValid) {
  const SystemConfig cfg = SystemConfig::desk_preset();
  EXPECT_EQ(cfg.n_tx, 16);
  EXPECT_EQ(cfg.n_ris, 64);
  EXPECT_EQ(cfg.n_users, 2);
  EXPECT_EQ(cfg.n_rx, 2);
  EXPECT_EQ(cfg.n_streams, 2);
  EXPECT_TRUE(validate_config(cfg).issues.empty());
}

TEST(ValidateConfig, TooManyStreams) {
  SystemConfig cfg;
  cfg.n_streams = 3;
  cfg.n_rx = 2;
  const auto rep = validate_config(cfg);
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(rep.mentions("n_streams exceeds n_rx"));
}

TEST(ValidateConfig, WeightSumIsOnlyAWarning) {
  SystemConfig cfg = SystemConfig::desk_preset();
  cfg.weights = {0.45, 0.45};
  const auto rep = validate_config(cfg);
  EXPECT_TRUE(rep.ok());
  EXPECT_TRUE(rep.has_warnings());
  EXPECT_TRUE(rep.mentions("weights must sum to 1"));
}

TEST(ValidateConfig, ReportsEveryViolationWithItsField) {
  SystemConfig cfg = SystemConfig::desk_preset();
  cfg.n_rx = 32;            // > n_tx
  cfg.power_bs = 0.0;
  cfg.noise_power = -1.0;
  cfg.ls_shrink = 1.0;
  cfg.weights = {1.0, -0.1};
  const auto rep = validate_config(cfg);
  EXPECT_FALSE(rep.ok());
  std::vector<std::string> fields;
  for (const auto& i : rep.issues) fields.push_back(i.field);
  for (const char* f : {"n_rx", "power_bs", "noise_power", "ls_shrink", "weights"})
    EXPECT_NE(std::find(fields.begin(), fields.end(), f), fields.end()) << f;
  EXPECT_THROW(require_valid(cfg), std::invalid_argument);
}

TEST(ValidateConfig, WrongWeightCount) {
  SystemConfig cfg = SystemConfig::desk_preset();
  cfg.weights = {1.0};
  EXPECT_FALSE(validate_config(cfg).ok());
}

TEST(PhaseVector, FromAnglesIsExactlyUnitModulus) {
  Rng rng(3);
  std::vector<double> phi;
  for (int i = 0; i < 500; ++i) phi.push_back(rng.uniform(-100.0, 100.0));
  const PhaseVector p = PhaseVector::from_angles(phi);
  ASSERT_EQ(p.size(), 500);
  for (int n = 0; n < p.size(); ++n) EXPECT_NEAR(std::abs(p[n]), 1.0, 1e-15);
  EXPECT_NO_THROW(PhaseVector::from_unit(p.values()));
}

TEST(PhaseVector, FromUnitRejectsOffCircleEntries) {
  CVec v = CVec::Ones(3);
  v[1] = 1.001;
  EXPECT_THROW(PhaseVector::from_unit(v), DomainError);
}

TEST(PrecoderSet, TotalPowerIsFrobeniusSum) {
  PrecoderSet w;
  w.w.push_back(CMat::Constant(2, 1, cplx(1.0, 1.0)));
  w.w.push_back(CMat::Constant(2, 1, cplx(0.0, 2.0)));
  EXPECT_DOUBLE_EQ(w.total_power(), 4.0 + 8.0);
}

TEST(AuxPrecoderSet, MatchedFilterLayout) {
  SystemConfig cfg = SystemConfig::desk_preset();
  cfg.n_streams = 1;
  const AuxPrecoderSet f = AuxPrecoderSet::matched_filter(cfg);
  ASSERT_EQ(f.f.size(), 2u);
  EXPECT_TRUE(f.nontrivial());
  EXPECT_EQ(f.f[1].rows(), 4);
  EXPECT_EQ(f.f[1].cols(), 1);
  EXPECT_EQ(f.f[1](2, 0), cplx(1.0));
  EXPECT_NEAR(f.f[1].squaredNorm(), 1.0, 0.0);
  AuxPrecoderSet z;
  z.f.assign(2, CMat::Zero(4, 1));
  EXPECT_FALSE(z.nontrivial());
}

TEST(Seeds, MixSeedIsPureAndSpreads) {
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
  EXPECT_NE(mix_seed(0, 0), mix_seed(0, 1));
}

TEST(Rng, ComplexGaussianHasUnitVarianceSplitEvenly) {
  Rng rng(11);
  double re2 = 0.0, im2 = 0.0, mean_re = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const cplx z = rng.complex_gaussian();
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
    mean_re += z.real();
  }
  EXPECT_NEAR(re2 / n, 0.5, 0.01);
  EXPECT_NEAR(im2 / n, 0.5, 0.01);
  EXPECT_NEAR(mean_re / n, 0.0, 0.01);
}
