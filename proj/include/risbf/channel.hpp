#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "risbf/linalg.hpp"
#include "risbf/metrics.hpp"
#include "risbf/model.hpp"
#include "risbf/rng.hpp"

namespace risbf {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Deployment geometry and large-scale fading parameters.
struct GeometryConfig {
  Point2 bs_pos{0.0, 0.0};
  Point2 ris_pos{200.0, 0.0};
  Point2 user_center{200.0, 30.0};
  double user_radius = 10.0;
  double rician_k = 10.0;     // linear
  bool ris_user_los = true;   // LoS (true) or NLoS path-loss law on RIS->user links

  void validate() const {
    if (!(user_radius >= 0.0)) throw std::invalid_argument("GeometryConfig: user_radius < 0");
    if (!(rician_k >= 0.0)) throw std::invalid_argument("GeometryConfig: rician_k < 0");
  }
};

/// Angular parameters of the LoS components.
struct SteeringAngles {
  double bs_ris_aod = 0.0;            // at the BS towards the RIS
  double bs_ris_aoa = 0.0;            // at the RIS from the BS
  std::vector<double> ris_user_aod;   // at the RIS towards user k
  std::vector<double> ris_user_aoa;   // at user k from the RIS
};

/// 3GPP UMi-style path loss in dB.
inline double path_loss_db(double distance_m, bool los) {
  if (!(distance_m > 0.0)) throw DomainError("path_loss_db: distance must be positive");
  return los ? 35.6 + 22.0 * std::log10(distance_m) : 32.6 + 36.7 * std::log10(distance_m);
}

/// Linear power attenuation 10^(-PL/10).
inline double path_loss_gain(double distance_m, bool los) {
  return std::pow(10.0, -path_loss_db(distance_m, los) / 10.0);
}

/// Half-wavelength ULA response; entry m is exp(j pi m sin(angle)).
inline CVec steering_vector(int n, double angle) {
  CVec a(n);
  const double s = std::sin(angle);
  a[0] = 1.0;
  for (int m = 1; m < n; ++m) a[m] = std::polar(1.0, std::numbers::pi * m * s);
  return a;
}

/// Users uniform in the disk around geo.user_center (radius ~ R sqrt(u)).
inline std::vector<Point2> sample_user_positions(const GeometryConfig& geo, int n_users, Rng& rng) {
  std::vector<Point2> out;
  out.reserve(n_users);
  for (int k = 0; k < n_users; ++k) {
    const double r = geo.user_radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    out.push_back({geo.user_center.x + r * std::cos(phi), geo.user_center.y + r * std::sin(phi)});
  }
  return out;
}

/// BS and RIS arrays face each other (broadside along the BS-RIS axis), so
/// the BS-RIS angles follow from geometry; per-user angles are drawn
/// uniformly in (-pi/2, pi/2).
inline SteeringAngles sample_steering_angles(const GeometryConfig& geo, int n_users, Rng& rng) {
  SteeringAngles ang;
  // Angles are measured from the array normal, which is the BS-RIS axis, so
  // the link arrives and departs at boresight regardless of the positions.
  (void)geo;
  ang.bs_ris_aod = 0.0;
  ang.bs_ris_aoa = 0.0;
  const double half_pi = std::numbers::pi / 2.0;
  for (int k = 0; k < n_users; ++k) {
    ang.ris_user_aod.push_back(rng.uniform(-half_pi, half_pi));
    ang.ris_user_aoa.push_back(rng.uniform(-half_pi, half_pi));
  }
  return ang;
}

/// Rician BS-RIS and RIS-user links, Rayleigh direct links. Random draws are
/// taken in the order G_bar, then (U_bar_k, D_bar_k) for k = 0..K-1, each
/// matrix column-major.
inline ChannelSet generate_channels(const SystemConfig& cfg, const GeometryConfig& geo,
                                    const SteeringAngles& angles,
                                    const std::vector<Point2>& user_positions,
                                    std::uint64_t rng_seed) {
  require_valid(cfg);
  geo.validate();
  if (user_positions.size() != static_cast<std::size_t>(cfg.n_users) ||
      angles.ris_user_aod.size() != static_cast<std::size_t>(cfg.n_users) ||
      angles.ris_user_aoa.size() != static_cast<std::size_t>(cfg.n_users))
    throw std::invalid_argument("generate_channels: per-user inputs must have K entries");

  Rng rng(rng_seed);
  const double kappa2 = 1.0 / (1.0 + geo.rician_k);
  const double kappa1 = 1.0 - kappa2;

  ChannelSet ch;
  const double l1 = path_loss_gain(distance(geo.bs_pos, geo.ris_pos), true);
  const CMat g_bar = rng.complex_gaussian(cfg.n_ris, cfg.n_tx);
  ch.bs_ris = std::sqrt(l1 * kappa1) * steering_vector(cfg.n_ris, angles.bs_ris_aoa) *
                  steering_vector(cfg.n_tx, angles.bs_ris_aod).adjoint() +
              std::sqrt(l1 * kappa2) * g_bar;

  for (int k = 0; k < cfg.n_users; ++k) {
    const double l2 = path_loss_gain(distance(geo.ris_pos, user_positions[k]), geo.ris_user_los);
    const double l3 = path_loss_gain(distance(geo.bs_pos, user_positions[k]), false);
    const CMat u_bar = rng.complex_gaussian(cfg.n_rx, cfg.n_ris);
    const CMat d_bar = rng.complex_gaussian(cfg.n_rx, cfg.n_tx);
    ch.ris_user.push_back(std::sqrt(l2 * kappa1) * steering_vector(cfg.n_rx, angles.ris_user_aoa[k]) *
                              steering_vector(cfg.n_ris, angles.ris_user_aod[k]).adjoint() +
                          std::sqrt(l2 * kappa2) * u_bar);
    ch.direct.push_back(std::sqrt(l3) * d_bar);
  }
  return ch;
}

/// Everything random about one realization, drawn from a single seed:
/// user positions, per-user angles, the channel matrices and theta0.
struct Realization {
  std::vector<Point2> user_positions;
  SteeringAngles angles;
  ChannelSet channels;
  PhaseVector theta0;
};

inline PhaseVector random_phase_vector(int n, Rng& rng) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.unit_phasor();
  return PhaseVector::from_unit(std::move(v));
}

inline Realization draw_realization(const SystemConfig& cfg, const GeometryConfig& geo,
                                    std::uint64_t seed) {
  Rng rng(seed);
  Realization r;
  r.user_positions = sample_user_positions(geo, cfg.n_users, rng);
  r.angles = sample_steering_angles(geo, cfg.n_users, rng);
  r.channels = generate_channels(cfg, geo, r.angles, r.user_positions, mix_seed(seed, 1));
  Rng theta_rng(mix_seed(seed, 2));
  r.theta0 = random_phase_vector(cfg.n_ris, theta_rng);
  return r;
}

/// H_k(theta) = D_k + U_k diag(theta) G, formed by scaling the columns of U_k.
inline CMat composite_channel(const ChannelSet& ch, const PhaseVector& theta, int k,
                              Tally tally = {}) {
  const CMat& u = ch.ris_user.at(k);
  if (theta.size() != ch.n_ris()) throw std::invalid_argument("composite_channel: theta size");
  tally.add(static_cast<std::uint64_t>(u.rows()) * u.cols());
  const CMat u_scaled = u * theta.values().asDiagonal();
  return ch.direct[k] + linalg::mul(u_scaled, ch.bs_ris, tally);
}

/// H = [H_1; ...; H_K], (K n_rx) x n_tx.
inline CMat stack_channels(const ChannelSet& ch, const PhaseVector& theta, Tally tally = {}) {
  const int nr = ch.n_rx();
  CMat h(static_cast<Eigen::Index>(ch.n_users()) * nr, ch.n_tx());
  for (int k = 0; k < ch.n_users(); ++k)
    h.middleRows(static_cast<Eigen::Index>(k) * nr, nr) = composite_channel(ch, theta, k, tally);
  return h;
}

}  // namespace risbf
