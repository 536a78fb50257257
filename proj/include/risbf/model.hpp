#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "risbf/types.hpp"

namespace risbf {

// ---------------------------------------------------------------------------
// Unit conversions. Everything inside the solvers is linear (watts); dBm only
// appears at the configuration boundary.
// ---------------------------------------------------------------------------

inline double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double p_watts) { return 10.0 * std::log10(p_watts) + 30.0; }

/// nats/s/Hz -> bits/s/Hz, display only.
inline double nats_to_bits(double nats) { return nats / std::log(2.0); }

// ---------------------------------------------------------------------------
// SystemConfig
// ---------------------------------------------------------------------------

/// Dimensions, powers, weights and solver tolerances of one experiment.
/// Defaults reproduce the large-scale reference setting (64 BS antennas,
/// 400 RIS elements, 4 users with 2 antennas / 2 streams each).
struct SystemConfig {
  int n_tx = 64;
  int n_ris = 400;
  int n_users = 4;
  int n_rx = 2;
  int n_streams = 2;
  double power_bs = 1.0;         // watts (30 dBm)
  double noise_power = 1e-12;    // watts (-90 dBm)
  std::vector<double> weights = {0.2449, 0.2509, 0.2570, 0.2472};
  double sca_tol = 1e-4;
  int sca_max_iters = 100;
  double ao_tol = 1e-5;
  double ls_shrink = 0.5;
  double ls_beta = 1e-7;
  int ls_max_steps = 60;
  int ao_max_iters = 500;

  static SystemConfig full_scale() { return {}; }

  /// CI-sized variant: 16 BS antennas, 64 RIS elements, two users.
  static SystemConfig desk_preset() {
    SystemConfig cfg;
    cfg.n_tx = 16;
    cfg.n_ris = 64;
    cfg.n_users = 2;
    cfg.weights = {0.5, 0.5};
    return cfg;
  }

  [[nodiscard]] int stacked_rx() const { return n_users * n_rx; }
};

struct ConfigIssue {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string field;
  std::string message;
};

/// Every violated invariant of a SystemConfig. Weight normalization is only a
/// warning: the algorithms never rely on sum(weights) == 1.
struct ValidationReport {
  std::vector<ConfigIssue> issues;

  [[nodiscard]] bool ok() const {
    for (const auto& i : issues)
      if (i.severity == ConfigIssue::Severity::error) return false;
    return true;
  }
  [[nodiscard]] bool has_warnings() const {
    for (const auto& i : issues)
      if (i.severity == ConfigIssue::Severity::warning) return true;
    return false;
  }
  [[nodiscard]] bool mentions(const std::string& text) const {
    for (const auto& i : issues)
      if (i.message.find(text) != std::string::npos) return true;
    return false;
  }
};

inline ValidationReport validate_config(const SystemConfig& cfg) {
  ValidationReport rep;
  auto error = [&](std::string field, std::string msg) {
    rep.issues.push_back({ConfigIssue::Severity::error, std::move(field), std::move(msg)});
  };
  auto warn = [&](std::string field, std::string msg) {
    rep.issues.push_back({ConfigIssue::Severity::warning, std::move(field), std::move(msg)});
  };

  if (cfg.n_tx < 1) error("n_tx", "n_tx must be positive");
  if (cfg.n_ris < 1) error("n_ris", "n_ris must be positive");
  if (cfg.n_users < 1) error("n_users", "n_users must be positive");
  if (cfg.n_rx < 1) error("n_rx", "n_rx must be positive");
  if (cfg.n_streams < 1) error("n_streams", "n_streams must be positive");
  if (cfg.n_streams > cfg.n_rx) error("n_streams", "n_streams exceeds n_rx");
  if (cfg.n_rx > cfg.n_tx) error("n_rx", "n_rx exceeds n_tx");

  if (!(cfg.power_bs > 0.0) || !std::isfinite(cfg.power_bs))
    error("power_bs", "power_bs must be positive");
  if (!(cfg.noise_power > 0.0) || !std::isfinite(cfg.noise_power))
    error("noise_power", "noise_power must be positive");

  if (cfg.n_users >= 1 && cfg.weights.size() != static_cast<std::size_t>(cfg.n_users)) {
    error("weights", "weights must have one entry per user");
  } else {
    bool positive = true;
    for (double w : cfg.weights)
      if (!(w > 0.0) || !std::isfinite(w)) positive = false;
    if (!positive) error("weights", "weights must be strictly positive");
    const double sum = std::accumulate(cfg.weights.begin(), cfg.weights.end(), 0.0);
    if (positive && std::abs(sum - 1.0) > 1e-9) warn("weights", "weights must sum to 1");
  }

  if (!(cfg.sca_tol > 0.0)) error("sca_tol", "sca_tol must be positive");
  if (cfg.sca_max_iters < 1) error("sca_max_iters", "sca_max_iters must be positive");
  if (!(cfg.ao_tol > 0.0)) error("ao_tol", "ao_tol must be positive");
  if (!(cfg.ls_shrink > 0.0 && cfg.ls_shrink < 1.0))
    error("ls_shrink", "ls_shrink must lie in (0,1)");
  if (!(cfg.ls_beta > 0.0)) error("ls_beta", "ls_beta must be positive");
  if (cfg.ls_max_steps < 1) error("ls_max_steps", "ls_max_steps must be positive");
  if (cfg.ao_max_iters < 1) error("ao_max_iters", "ao_max_iters must be positive");
  return rep;
}

inline void require_valid(const SystemConfig& cfg) {
  const auto rep = validate_config(cfg);
  if (rep.ok()) return;
  std::string msg = "invalid SystemConfig:";
  for (const auto& i : rep.issues)
    if (i.severity == ConfigIssue::Severity::error) msg += " [" + i.field + "] " + i.message + ";";
  throw std::invalid_argument(msg);
}

// ---------------------------------------------------------------------------
// Channels and optimization variables
// ---------------------------------------------------------------------------

/// One channel realization: G (BS->RIS), U_k (RIS->user k), D_k (BS->user k).
struct ChannelSet {
  CMat bs_ris;                  // n_ris x n_tx
  std::vector<CMat> ris_user;   // K of n_rx x n_ris
  std::vector<CMat> direct;     // K of n_rx x n_tx

  [[nodiscard]] int n_users() const { return static_cast<int>(direct.size()); }
  [[nodiscard]] int n_tx() const { return static_cast<int>(bs_ris.cols()); }
  [[nodiscard]] int n_ris() const { return static_cast<int>(bs_ris.rows()); }
  [[nodiscard]] int n_rx() const { return direct.empty() ? 0 : static_cast<int>(direct[0].rows()); }

  /// Checks shapes against cfg and finiteness of all entries.
  void validate(const SystemConfig& cfg) const {
    if (bs_ris.rows() != cfg.n_ris || bs_ris.cols() != cfg.n_tx)
      throw std::invalid_argument("ChannelSet: G has wrong shape");
    if (ris_user.size() != static_cast<std::size_t>(cfg.n_users) ||
        direct.size() != static_cast<std::size_t>(cfg.n_users))
      throw std::invalid_argument("ChannelSet: wrong number of users");
    for (int k = 0; k < cfg.n_users; ++k) {
      if (ris_user[k].rows() != cfg.n_rx || ris_user[k].cols() != cfg.n_ris)
        throw std::invalid_argument("ChannelSet: U_k has wrong shape");
      if (direct[k].rows() != cfg.n_rx || direct[k].cols() != cfg.n_tx)
        throw std::invalid_argument("ChannelSet: D_k has wrong shape");
    }
    auto finite = [](const CMat& m) { return m.allFinite(); };
    bool ok = finite(bs_ris);
    for (int k = 0; k < cfg.n_users; ++k) ok = ok && finite(ris_user[k]) && finite(direct[k]);
    if (!ok) throw DomainError("ChannelSet: non-finite entry");
  }

  /// Copy with every reflected link removed (U_k = 0).
  [[nodiscard]] ChannelSet without_reflection() const {
    ChannelSet out = *this;
    for (auto& u : out.ris_user) u.setZero();
    return out;
  }
};

/// RIS reflection vector; every entry lies on the unit circle.
class PhaseVector {
 public:
  PhaseVector() = default;

  static PhaseVector from_angles(std::span<const double> phi) {
    PhaseVector p;
    p.theta_.resize(static_cast<Eigen::Index>(phi.size()));
    for (std::size_t n = 0; n < phi.size(); ++n)
      p.theta_[static_cast<Eigen::Index>(n)] = std::polar(1.0, phi[n]);
    return p;
  }

  static PhaseVector ones(int n) {
    PhaseVector p;
    p.theta_ = CVec::Ones(n);
    return p;
  }

  /// Adopts an already unit-modulus vector. Throws if any |theta_n| deviates
  /// from 1 by more than tol.
  static PhaseVector from_unit(CVec v, double tol = 1e-12) {
    for (Eigen::Index n = 0; n < v.size(); ++n)
      if (!(std::abs(std::abs(v[n]) - 1.0) <= tol))
        throw DomainError("PhaseVector: entry is not unit modulus");
    PhaseVector p;
    p.theta_ = std::move(v);
    return p;
  }

  [[nodiscard]] const CVec& values() const { return theta_; }
  [[nodiscard]] int size() const { return static_cast<int>(theta_.size()); }
  [[nodiscard]] cplx operator[](int n) const { return theta_[n]; }

 private:
  CVec theta_;
};

/// Physical precoders W_k (n_tx x n_streams).
struct PrecoderSet {
  std::vector<CMat> w;

  [[nodiscard]] double total_power() const {
    double p = 0.0;
    for (const auto& wk : w) p += wk.squaredNorm();
    return p;
  }

  static PrecoderSet zeros(const SystemConfig& cfg) {
    PrecoderSet out;
    out.w.assign(cfg.n_users, CMat::Zero(cfg.n_tx, cfg.n_streams));
    return out;
  }
};

/// Low-dimensional variables F_k ((K n_rx) x n_streams) of the equivalent
/// unconstrained problem; W = sqrt(xi) H^H F.
struct AuxPrecoderSet {
  std::vector<CMat> f;

  [[nodiscard]] bool nontrivial() const {
    for (const auto& fk : f)
      if (fk.squaredNorm() > 0.0) return true;
    return false;
  }

  /// F_k = columns [k n_rx, k n_rx + n_streams) of the (K n_rx) identity,
  /// so that W is proportional to the matched filter H^H.
  static AuxPrecoderSet matched_filter(const SystemConfig& cfg) {
    AuxPrecoderSet out;
    const int m = cfg.stacked_rx();
    for (int k = 0; k < cfg.n_users; ++k) {
      CMat fk = CMat::Zero(m, cfg.n_streams);
      for (int d = 0; d < cfg.n_streams; ++d) fk(k * cfg.n_rx + d, d) = 1.0;
      out.f.push_back(std::move(fk));
    }
    return out;
  }
};

/// Per-iteration record of one AO run.
struct SolveTrace {
  std::vector<double> wsr_per_outer_iter;   // nats/s/Hz
  std::vector<double> step_sizes;           // accepted alpha (0 when no theta step)
  std::vector<int> line_search_steps;       // candidates evaluated
  std::vector<int> sca_iters;               // I_w per outer iteration
  std::vector<std::uint64_t> cum_cmul;      // cumulative complex multiplications
  std::vector<double> elapsed_sec;          // wall time since start
  std::vector<std::vector<double>> sca_histories;  // equivalent-rate sequence per W-update
  std::uint64_t complex_mult_count = 0;
  double wall_time_sec = 0.0;
  int stalls = 0;

  [[nodiscard]] int outer_iters() const { return static_cast<int>(wsr_per_outer_iter.size()); }
};

}  // namespace risbf
