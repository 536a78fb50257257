#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "risbf/linalg.hpp"
#include "risbf/metrics.hpp"
#include "risbf/model.hpp"
#include "risbf/rates.hpp"

namespace risbf {

/// Quantities of the concave quadratic minorant built at an expansion point
/// F_hat of the equivalent objective.
struct ScaIntermediates {
  std::vector<CMat> x_hat;   // Hbar_k F_hat_k, n_rx x n_streams
  std::vector<CMat> y_hat;   // interference + scaled noise, n_rx x n_rx, HPD
  std::vector<CMat> a_hat;   // Y^-1 - (X X^H + Y)^-1, n_rx x n_rx, PSD
  std::vector<CMat> b_hat;   // X^H Y^-1, n_streams x n_rx
  double mu = 0.0;           // (s2/P) sum_k w_k tr(A_k)
  double value = 0.0;        // equivalent rate at the expansion point, sum_k w_k log det(I + B X)
};

namespace detail {

/// Symmetrize and clip eigenvalues below zero.
inline CMat clip_psd(const CMat& a, Tally tally) {
  tally.add(count_cubic(a.rows()));
  Eigen::SelfAdjointEigenSolver<CMat> es(linalg::hermitian_part(a));
  RVec ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

inline ScaIntermediates build_intermediates(const CMat& hbar, const AuxPrecoderSet& f,
                                            const SystemConfig& cfg, Tally tally = {}) {
  const int kk = cfg.n_users;
  const Eigen::Index nr = detail::rx_rows(hbar, kk);
  // Hbar F_j in full; its row blocks are the X_kj = Hbar_k F_j and it also
  // gives ||H^H F||^2 = sum_j tr(F_j^H Hbar F_j).
  std::vector<CMat> hf;
  double s = 0.0;
  for (const auto& fj : f.f) {
    hf.push_back(linalg::mul(hbar, fj, tally));
    tally.add(static_cast<std::uint64_t>(fj.rows()) * fj.cols());
    s += fj.conjugate().cwiseProduct(hf.back()).sum().real();
  }
  if (!(s > 0.0)) throw DomainError("sca: degenerate expansion point (H^H F = 0)");
  const double noise_term = cfg.noise_power / cfg.power_bs * s;

  ScaIntermediates in;
  for (int k = 0; k < kk; ++k) {
    CMat y = noise_term * CMat::Identity(nr, nr);
    CMat x_kk;
    for (int j = 0; j < kk; ++j) {
      CMat x = hf[j].middleRows(k * nr, nr);
      if (j == k)
        x_kk = std::move(x);
      else
        y += linalg::gram(x, tally);
    }
    // B = X^H Y^-1 and, via the matrix inversion lemma,
    // A = Y^-1 - (X X^H + Y)^-1 = B^H (I + B X)^-1 B, which is PSD by construction.
    const CMat b = linalg::solve_hpd(y, x_kk, tally).adjoint();
    const CMat bx = linalg::mul(b, x_kk, tally);
    const CMat core = CMat::Identity(bx.rows(), bx.cols()) + bx;
    const CMat a = linalg::mul(b.adjoint(), linalg::solve_hpd(core, b, tally), tally);
    in.value += cfg.weights[k] * linalg::logdet_hpd(core, tally);
    in.x_hat.push_back(std::move(x_kk));
    in.y_hat.push_back(std::move(y));
    in.a_hat.push_back(detail::clip_psd(a, tally));
    in.b_hat.push_back(b);
  }
  double tr = 0.0;
  for (int k = 0; k < kk; ++k) tr += cfg.weights[k] * in.a_hat[k].trace().real();
  in.mu = cfg.noise_power / cfg.power_bs * tr;
  return in;
}

/// sum_k w_k g_k(F): the minorant of the equivalent objective at F, built
/// from intermediates at some expansion point. Equals the objective there.
inline double minorant_value_gram(const AuxPrecoderSet& f, const ScaIntermediates& in,
                                  const CMat& hbar, const SystemConfig& cfg) {
  const int kk = cfg.n_users;
  const Eigen::Index nr = detail::rx_rows(hbar, kk);
  const double s = aux_signal_power(hbar, f);
  double acc = 0.0;
  for (int k = 0; k < kk; ++k) {
    const CMat hbar_k = hbar.middleRows(k * nr, nr);
    const CMat& a = in.a_hat[k];
    const CMat& b = in.b_hat[k];
    const CMat bx = linalg::hermitian_part(b * in.x_hat[k]);
    const CMat core = CMat::Identity(bx.rows(), bx.cols()) + bx;
    double g = linalg::logdet_hpd(core) - bx.trace().real();
    g += 2.0 * (b * hbar_k * f.f[k]).trace().real();
    for (int j = 0; j < kk; ++j) {
      const CMat x = hbar_k * f.f[j];
      g -= (x.adjoint() * a * x).trace().real();
    }
    g -= cfg.noise_power / cfg.power_bs * a.trace().real() * s;
    acc += cfg.weights[k] * g;
  }
  return acc;
}

inline double minorant_value(const AuxPrecoderSet& f, const ScaIntermediates& in,
                             const CMat& h_stack, const SystemConfig& cfg) {
  return minorant_value_gram(f, in, stacked_gram(h_stack), cfg);
}

/// Complex gradient (d/dF_j^*) of sum_k w_k g_k:
/// w_j Hbar_j^H B_j^H - mu Hbar F_j - sum_k w_k Hbar_k^H A_k Hbar_k F_j.
inline std::vector<CMat> minorant_gradient(const AuxPrecoderSet& f, const ScaIntermediates& in,
                                           const CMat& hbar, const SystemConfig& cfg) {
  const int kk = cfg.n_users;
  const Eigen::Index nr = detail::rx_rows(hbar, kk);
  CMat curvature = in.mu * hbar;
  for (int k = 0; k < kk; ++k) {
    const CMat hbar_k = hbar.middleRows(k * nr, nr);
    curvature += cfg.weights[k] * hbar_k.adjoint() * in.a_hat[k] * hbar_k;
  }
  std::vector<CMat> grad;
  for (int j = 0; j < kk; ++j) {
    const CMat hbar_j = hbar.middleRows(j * nr, nr);
    grad.push_back(cfg.weights[j] * hbar_j.adjoint() * in.b_hat[j].adjoint() - curvature * f.f[j]);
  }
  return grad;
}

/// Block-diagonal Atilde = diag(w_k A_k) and Btilde = diag(w_k B_k^H).
inline CMat block_a_tilde(const ScaIntermediates& in, const SystemConfig& cfg) {
  const int nr = cfg.n_rx, m = cfg.stacked_rx();
  CMat a = CMat::Zero(m, m);
  for (int k = 0; k < cfg.n_users; ++k)
    a.block(k * nr, k * nr, nr, nr) = cfg.weights[k] * in.a_hat[k].adjoint();
  return a;
}

inline CMat block_b_tilde(const ScaIntermediates& in, const SystemConfig& cfg) {
  const int nr = cfg.n_rx, nd = cfg.n_streams, m = cfg.stacked_rx();
  CMat b = CMat::Zero(m, static_cast<Eigen::Index>(cfg.n_users) * nd);
  for (int k = 0; k < cfg.n_users; ++k)
    b.block(k * nr, k * nd, nr, nd) = cfg.weights[k] * in.b_hat[k].adjoint();
  return b;
}

struct ScaStep {
  AuxPrecoderSet f;
  bool fallback = false;   // least-squares solve used (singular system)
};

/// Closed-form maximizer of the minorant: F = (mu I + Atilde Hbar)^-1 Btilde.
inline ScaStep maximize_minorant(const ScaIntermediates& in, const CMat& hbar,
                                 const SystemConfig& cfg, Tally tally = {}) {
  const int nr = cfg.n_rx, nd = cfg.n_streams, m = cfg.stacked_rx();

  // Atilde is block diagonal: only the n_rx row blocks of Hbar are multiplied.
  CMat sys = in.mu * CMat::Identity(m, m);
  for (int k = 0; k < cfg.n_users; ++k)
    sys.middleRows(k * nr, nr) +=
        cfg.weights[k] * linalg::mul(in.a_hat[k].adjoint(), hbar.middleRows(k * nr, nr), tally);
  const CMat rhs = block_b_tilde(in, cfg);

  tally.add(count_cubic(m) + count_matmul(m, m, rhs.cols()));
  ScaStep step;
  CMat sol;
  Eigen::FullPivLU<CMat> lu(sys);
  if (lu.isInvertible()) {
    sol = lu.solve(rhs);
  } else {
    step.fallback = true;
    sol = sys.completeOrthogonalDecomposition().solve(rhs);
  }
  for (int k = 0; k < cfg.n_users; ++k) step.f.f.push_back(sol.middleCols(k * nd, nd));
  return step;
}

inline ScaStep sca_update_gram(const AuxPrecoderSet& f_prev, const CMat& hbar,
                               const SystemConfig& cfg, Tally tally = {}) {
  return maximize_minorant(build_intermediates(hbar, f_prev, cfg, tally), hbar, cfg, tally);
}

inline AuxPrecoderSet sca_update(const AuxPrecoderSet& f_prev, const CMat& h_stack,
                                 const SystemConfig& cfg, Tally tally = {}) {
  return sca_update_gram(f_prev, stacked_gram(h_stack, tally), cfg, tally).f;
}

struct PrecoderSolution {
  PrecoderSet w;
  AuxPrecoderSet f;
  int iters = 0;
  std::vector<double> objective_history;   // equivalent rate, starting at f0
  bool fallback_used = false;
};

/// SCA loop on the equivalent problem for a fixed stacked channel. Stops when
/// the relative improvement drops below sca_tol or after sca_max_iters
/// updates, then maps F back to W with the power constraint met exactly.
inline PrecoderSolution solve_precoder_gram(const AuxPrecoderSet& f0, const CMat& h_stack,
                                            const CMat& hbar, const SystemConfig& cfg,
                                            Tally tally = {}) {
  PrecoderSolution sol;
  sol.f = f0;
  // The intermediates at F carry the objective value at F, so each
  // iteration builds them once and uses them for both the stop test and the
  // next update.
  ScaIntermediates in = build_intermediates(hbar, sol.f, cfg, tally);
  double r = in.value;
  sol.objective_history.push_back(r);
  for (int n = 1; n <= cfg.sca_max_iters; ++n) {
    ScaStep step = maximize_minorant(in, hbar, cfg, tally);
    in = build_intermediates(hbar, step.f, cfg, tally);
    const double r_new = in.value;
    sol.fallback_used = sol.fallback_used || step.fallback;
    sol.objective_history.push_back(r_new);
    sol.iters = n;
    const double rel = (r_new - r) / std::max(r, 1e-12);
    sol.f = std::move(step.f);
    r = r_new;
    if (rel < cfg.sca_tol) break;
  }
  sol.w = recover_precoder(h_stack, sol.f, cfg, tally);
  return sol;
}

inline PrecoderSolution solve_precoder(const AuxPrecoderSet& f0, const CMat& h_stack,
                                       const SystemConfig& cfg, Tally tally = {}) {
  if (!f0.nontrivial()) throw DomainError("solve_precoder: F0 is zero");
  return solve_precoder_gram(f0, h_stack, stacked_gram(h_stack, tally), cfg, tally);
}

/// F with H^H F_k equal to the projection of W_k onto the row space of H,
/// i.e. F_k = Hbar^-1 H W_k. Its equivalent rate is at least the WSR of W
/// on the same channel.
inline AuxPrecoderSet aux_from_precoder(const CMat& h_stack, const CMat& hbar, const PrecoderSet& w,
                                        Tally tally = {}) {
  AuxPrecoderSet out;
  Eigen::LLT<CMat> llt(linalg::hermitian_part(hbar));
  const bool hpd = llt.info() == Eigen::Success;
  tally.add(count_cubic(hbar.rows()));
  for (const auto& wk : w.w) {
    if (hpd) {
      const CMat hw = linalg::mul(h_stack, wk, tally);
      tally.add(count_matmul(hbar.rows(), hbar.rows(), hw.cols()));
      out.f.push_back(llt.solve(hw));
    } else {
      out.f.push_back(h_stack.adjoint().completeOrthogonalDecomposition().solve(wk));
    }
  }
  return out;
}

/// Upper bound sum_k w_k N_r log(1 + P/s2 ||H_k||^2) on the equivalent objective.
inline double equivalent_rate_upper_bound(const CMat& h_stack, const SystemConfig& cfg) {
  const Eigen::Index nr = detail::rx_rows(h_stack, cfg.n_users);
  double acc = 0.0;
  for (int k = 0; k < cfg.n_users; ++k)
    acc += cfg.weights[k] * static_cast<double>(nr) *
           std::log1p(cfg.power_bs / cfg.noise_power * h_stack.middleRows(k * nr, nr).squaredNorm());
  return acc;
}

}  // namespace risbf
