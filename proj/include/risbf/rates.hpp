#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "risbf/channel.hpp"
#include "risbf/linalg.hpp"
#include "risbf/model.hpp"

namespace risbf {

namespace detail {

inline void require_finite(const PrecoderSet& w) {
  for (const auto& wk : w.w)
    if (!wk.allFinite()) throw DomainError("non-finite precoder entry");
}

inline Eigen::Index rx_rows(const CMat& h_stack, int n_users) {
  if (n_users < 1 || h_stack.rows() % n_users != 0)
    throw std::invalid_argument("stacked channel rows are not a multiple of K");
  return h_stack.rows() / n_users;
}

}  // namespace detail

/// Rate of user k given its composite channel H_k:
/// log det(s I + sum_j E_j E_j^H) - log det(s I + sum_{j!=k} E_j E_j^H),
/// with E_j = H_k W_j formed first so nothing of size n_tx x n_tx appears.
inline double user_rate_from_channel(const CMat& hk, const PrecoderSet& w, int k, double noise,
                                     Tally tally = {}) {
  const Eigen::Index nr = hk.rows();
  CMat z_all = noise * CMat::Identity(nr, nr);
  CMat z_int = z_all;
  for (std::size_t j = 0; j < w.w.size(); ++j) {
    const CMat e = linalg::mul(hk, w.w[j], tally);
    const CMat m = linalg::gram(e, tally);
    z_all += m;
    if (static_cast<int>(j) != k) z_int += m;
  }
  const double r = linalg::logdet_hpd(z_all, tally) - linalg::logdet_hpd(z_int, tally);
  return std::max(0.0, r);
}

/// Weighted sum rate from a precomputed stacked channel H.
inline double wsr_from_stack(const CMat& h_stack, const PrecoderSet& w, const SystemConfig& cfg,
                             Tally tally = {}) {
  detail::require_finite(w);
  const Eigen::Index nr = detail::rx_rows(h_stack, cfg.n_users);
  double acc = 0.0;
  for (int k = 0; k < cfg.n_users; ++k)
    acc += cfg.weights[k] *
           user_rate_from_channel(h_stack.middleRows(k * nr, nr), w, k, cfg.noise_power, tally);
  return acc;
}

/// Achievable rate of user k in nats/s/Hz (interference treated as noise).
inline double user_rate(const ChannelSet& ch, const PhaseVector& theta, const PrecoderSet& w, int k,
                        double noise, Tally tally = {}) {
  detail::require_finite(w);
  const CMat hk = composite_channel(ch, theta, k, tally);
  if (!hk.allFinite()) throw DomainError("user_rate: non-finite channel entry");
  return user_rate_from_channel(hk, w, k, noise, tally);
}

/// Weighted sum rate sum_k w_k R_k(W, theta).
inline double wsr(const ChannelSet& ch, const PhaseVector& theta, const PrecoderSet& w,
                  const SystemConfig& cfg, Tally tally = {}) {
  const CMat h = stack_channels(ch, theta, tally);
  if (!h.allFinite()) throw DomainError("wsr: non-finite channel entry");
  return wsr_from_stack(h, w, cfg, tally);
}

/// H H^H for a stacked channel.
inline CMat stacked_gram(const CMat& h_stack, Tally tally = {}) {
  return linalg::gram(h_stack, tally);
}

/// sum_i ||H^H F_i||^2 = sum_i tr(F_i^H Hbar F_i).
inline double aux_signal_power(const CMat& hbar, const AuxPrecoderSet& f, Tally tally = {}) {
  double s = 0.0;
  for (const auto& fi : f.f) {
    const CMat hf = linalg::mul(hbar, fi, tally);
    tally.add(static_cast<std::uint64_t>(fi.rows()) * fi.cols());
    s += (fi.adjoint() * hf).trace().real();
  }
  return s;
}

/// Equivalent-problem objective sum_k w_k R~_k(F) given Hbar = H H^H.
inline double equivalent_rate_gram(const CMat& hbar, const AuxPrecoderSet& f,
                                   const SystemConfig& cfg, Tally tally = {}) {
  const int kk = cfg.n_users;
  if (static_cast<int>(f.f.size()) != kk) throw std::invalid_argument("equivalent_rate: |F| != K");
  const Eigen::Index nr = detail::rx_rows(hbar, kk);
  const double s = aux_signal_power(hbar, f, tally);
  if (!(s > 0.0)) throw DomainError("equivalent_rate: degenerate precoder (H^H F = 0)");
  const double noise_term = cfg.noise_power / cfg.power_bs * s;

  double acc = 0.0;
  for (int k = 0; k < kk; ++k) {
    const CMat hbar_k = hbar.middleRows(k * nr, nr);
    CMat y = noise_term * CMat::Identity(nr, nr);
    CMat x_kk;
    for (int j = 0; j < kk; ++j) {
      const CMat x = linalg::mul(hbar_k, f.f[j], tally);
      if (j == k)
        x_kk = x;
      else
        y += linalg::gram(x, tally);
    }
    const CMat p = y + linalg::gram(x_kk, tally);
    acc += cfg.weights[k] * (linalg::logdet_hpd(p, tally) - linalg::logdet_hpd(y, tally));
  }
  return acc;
}

/// Equivalent-problem objective for a stacked channel H.
inline double equivalent_rate(const CMat& h_stack, const AuxPrecoderSet& f, const SystemConfig& cfg,
                              Tally tally = {}) {
  return equivalent_rate_gram(stacked_gram(h_stack, tally), f, cfg, tally);
}

/// W_k = sqrt(xi) H^H F_k with xi = P_BS / ||H^H F||^2 (power constraint tight).
inline PrecoderSet recover_precoder(const CMat& h_stack, const AuxPrecoderSet& f,
                                    const SystemConfig& cfg, Tally tally = {}) {
  PrecoderSet out;
  double total = 0.0;
  const CMat hh = h_stack.adjoint();
  for (const auto& fk : f.f) {
    out.w.push_back(linalg::mul(hh, fk, tally));
    total += out.w.back().squaredNorm();
  }
  if (!(total > 0.0)) throw DomainError("recover_precoder: ||H^H F|| = 0");
  const double scale = std::sqrt(cfg.power_bs / total);
  for (auto& wk : out.w) wk *= scale;
  return out;
}

}  // namespace risbf
