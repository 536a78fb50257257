#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "risbf/channel.hpp"
#include "risbf/linalg.hpp"
#include "risbf/metrics.hpp"
#include "risbf/model.hpp"
#include "risbf/rates.hpp"
#include "risbf/rng.hpp"

namespace risbf {

// Gradients below use the convention grad f = (df/dRe + j df/dIm) / 2, so a
// central difference along Re(theta_n) approximates 2 Re(grad_n) and one
// along Im(theta_n) approximates 2 Im(grad_n).

/// Gradient of the WSR with respect to theta for a fixed W, given the stacked
/// channel at theta. Per user k:
///   E_j = H_k W_j, Z = sum_j E_j E_j^H + s2 I, Z~ = Z - E_k E_k^H,
///   J = sum_j E_j W_j^H, J~ = J - E_k W_k^H,
///   grad += w_k diag(U_k^H (Z^-1 J - Z~^-1 J~) G^H).
/// Nothing larger than n_rx x n_tx is formed before the final product with G^H.
inline CVec grad_wsr_theta_stack(const ChannelSet& ch, const CMat& h_stack, const PrecoderSet& w,
                                 const SystemConfig& cfg, Tally tally = {}) {
  const int kk = cfg.n_users;
  const Eigen::Index nr = detail::rx_rows(h_stack, kk);
  const Eigen::Index ns = ch.n_ris(), nt = ch.n_tx();
  CVec grad = CVec::Zero(ns);
  for (int k = 0; k < kk; ++k) {
    const CMat hk = h_stack.middleRows(k * nr, nr);
    CMat z = cfg.noise_power * CMat::Identity(nr, nr);
    CMat z_tilde = z;
    CMat j_all = CMat::Zero(nr, nt);
    CMat j_tilde = j_all;
    for (int j = 0; j < kk; ++j) {
      const CMat e = linalg::mul(hk, w.w[j], tally);
      const CMat m = linalg::gram(e, tally);
      const CMat n = linalg::mul(e, w.w[j].adjoint(), tally);
      z += m;
      j_all += n;
      if (j != k) {
        z_tilde += m;
        j_tilde += n;
      }
    }
    const CMat q = cfg.weights[k] * (linalg::solve_hpd(z, j_all, tally) -
                                     linalg::solve_hpd(z_tilde, j_tilde, tally));
    const CMat qg = linalg::mul(q, ch.bs_ris.adjoint(), tally);   // nr x ns
    const CMat& u = ch.ris_user[k];
    tally.add(static_cast<std::uint64_t>(nr) * ns);
    grad += (u.conjugate().cwiseProduct(qg)).colwise().sum().transpose();
  }
  return grad;
}

inline CVec grad_wsr_theta(const ChannelSet& ch, const PhaseVector& theta, const PrecoderSet& w,
                           const SystemConfig& cfg, Tally tally = {}) {
  return grad_wsr_theta_stack(ch, stack_channels(ch, theta, tally), w, cfg, tally);
}

/// Diagonal of Xi: 1/|grad_n|, with coordinates of (numerically) zero
/// gradient frozen at scale 0.
inline RVec scaling_matrix(const CVec& grad) {
  RVec xi(grad.size());
  for (Eigen::Index n = 0; n < grad.size(); ++n) {
    const double a = std::abs(grad[n]);
    xi[n] = a < 1e-300 ? 0.0 : 1.0 / a;
  }
  return xi;
}

/// Radial projection onto the unit circle; entries too small to normalize
/// keep the fallback phase.
inline PhaseVector project_unit_modulus(const CVec& v, const PhaseVector& fallback) {
  if (fallback.size() != v.size()) throw std::invalid_argument("project_unit_modulus: size mismatch");
  CVec out(v.size());
  for (Eigen::Index n = 0; n < v.size(); ++n) {
    const double a = std::abs(v[n]);
    out[n] = a > 1e-12 ? v[n] / a : fallback[static_cast<int>(n)];
  }
  // Renormalizing once more absorbs the last-ulp error of the division.
  for (Eigen::Index n = 0; n < out.size(); ++n) out[n] /= std::abs(out[n]);
  return PhaseVector::from_unit(std::move(out));
}

inline PhaseVector spg_step(const PhaseVector& theta, const CVec& grad, const RVec& xi, double alpha) {
  return project_unit_modulus(theta.values() + alpha * xi.cwiseProduct(grad), theta);
}

/// Plain projected gradient step (no scaling).
inline PhaseVector pg_step(const PhaseVector& theta, const CVec& grad, double alpha) {
  return project_unit_modulus(theta.values() + alpha * grad, theta);
}

struct LineSearchResult {
  PhaseVector theta;
  double alpha = 0.0;
  int steps = 0;            // step sizes tried, including the accepted one
  bool stalled = false;     // nothing accepted within ls_max_steps; theta unchanged
  double value = 0.0;       // objective at the returned theta
  CMat h_stack;             // stacked channel at the accepted theta (empty if stalled)
};

/// First trial step 1/R(theta), or 1 if R is not positive.
inline double initial_step(double r_current) { return r_current > 0.0 ? 1.0 / r_current : 1.0; }

namespace detail {

/// Objective value and the stacked channel it was computed from.
struct Trial {
  double value;
  CMat h_stack;
};

template <class Candidate, class Evaluate, class Accept>
LineSearchResult backtrack(const PhaseVector& theta, double r_current, const SystemConfig& cfg,
                           Candidate&& candidate, Evaluate&& evaluate, Accept&& accept) {
  LineSearchResult res;
  double alpha = initial_step(r_current);
  for (int s = 1; s <= cfg.ls_max_steps; ++s) {
    PhaseVector next = candidate(alpha);
    Trial t = evaluate(next);
    if (accept(next, t.value, alpha)) {
      res.theta = std::move(next);
      res.alpha = alpha;
      res.steps = s;
      res.value = t.value;
      res.h_stack = std::move(t.h_stack);
      return res;
    }
    alpha *= cfg.ls_shrink;
  }
  res.theta = theta;
  res.alpha = 0.0;
  res.steps = cfg.ls_max_steps;
  res.stalled = true;
  res.value = r_current;
  return res;
}

inline auto wsr_evaluator(const ChannelSet& ch, const PrecoderSet& w, const SystemConfig& cfg,
                          Tally tally) {
  return [&ch, &w, &cfg, tally](const PhaseVector& th) {
    CMat h = stack_channels(ch, th, tally);
    const double v = wsr_from_stack(h, w, cfg, tally);
    return Trial{v, std::move(h)};
  };
}

}  // namespace detail

/// Scaled projected gradient step with backtracking until
/// R(theta+) >= R(theta) + beta/(2 N_s) ||theta+ - theta||^2.
inline LineSearchResult line_search_proposed(const ChannelSet& ch, const PrecoderSet& w,
                                             const PhaseVector& theta, const CVec& grad,
                                             const RVec& xi, const SystemConfig& cfg,
                                             double r_current, Tally tally = {}) {
  const double c = cfg.ls_beta / (2.0 * theta.size());
  return detail::backtrack(
      theta, r_current, cfg, [&](double a) { return spg_step(theta, grad, xi, a); },
      detail::wsr_evaluator(ch, w, cfg, tally),
      [&](const PhaseVector& next, double r, double) {
        return r >= r_current + c * (next.values() - theta.values()).squaredNorm();
      });
}

/// Conventional projected gradient step with the acceptance test
/// R(theta+) >= R(theta) + 2 Re{grad^H d} + (alpha/2) ||d||^2, d = theta+ - theta,
/// taken literally (note the + sign on the curvature term).
inline bool armijo_accepts(double r_next, double r_current, const CVec& grad, const CVec& d,
                           double alpha) {
  return r_next >= r_current + 2.0 * grad.dot(d).real() + 0.5 * alpha * d.squaredNorm();
}

inline LineSearchResult line_search_armijo(const ChannelSet& ch, const PrecoderSet& w,
                                           const PhaseVector& theta, const CVec& grad,
                                           const SystemConfig& cfg, double r_current,
                                           Tally tally = {}) {
  return detail::backtrack(
      theta, r_current, cfg, [&](double a) { return pg_step(theta, grad, a); },
      detail::wsr_evaluator(ch, w, cfg, tally),
      [&](const PhaseVector& next, double r, double a) {
        return armijo_accepts(r, r_current, grad, next.values() - theta.values(), a);
      });
}

// ---------------------------------------------------------------------------
// Equivalent formulation as a function of theta (F fixed).

inline double equivalent_rate_theta(const ChannelSet& ch, const PhaseVector& theta,
                                    const AuxPrecoderSet& f, const SystemConfig& cfg,
                                    Tally tally = {}) {
  return equivalent_rate(stack_channels(ch, theta, tally), f, cfg, tally);
}

/// Gradient of the equivalent objective with respect to theta for a
/// single-antenna-user system, given the stacked channel H (K x n_tx).
///
/// With v_j = H^H f_j, a_kj = h_k v_j, S = sum_j ||v_j||^2 and
/// E_i = diag(u_i) G (so h_i = d_i + theta^T E_i):
///   grad |a_kj|^2 = a_kj conj(E_k v_j) + conj(a_kj) sum_i f_j[i] conj(E_i h_k^H)
///   grad S        = sum_j sum_i f_j[i] conj(E_i v_j)
/// and the objective is sum_k w_k [log(P_k) - log(P_k - |a_kk|^2)] with
/// P_k = sum_j |a_kj|^2 + (s2/P) S. E_i x is evaluated as u_i .* (G x).
inline CVec grad_equiv_theta_miso_stack(const ChannelSet& ch, const CMat& h_stack,
                                        const AuxPrecoderSet& f, const SystemConfig& cfg,
                                        Tally tally = {}) {
  if (cfg.n_rx != 1 || ch.n_rx() != 1)
    throw UnsupportedConfiguration("equivalent-objective theta gradient requires n_rx = 1");
  // n_streams <= n_rx = 1, so every F_j is a single K-vector.
  const int kk = cfg.n_users;
  const Eigen::Index ns = ch.n_ris(), nt = ch.n_tx();
  const double c = cfg.noise_power / cfg.power_bs;

  std::vector<CVec> v(kk), gv(kk), gh(kk), uf(kk);
  double s = 0.0;
  for (int j = 0; j < kk; ++j) {
    tally.add(count_matmul(nt, kk, 1) + 2 * count_matmul(ns, nt, 1));
    v[j] = h_stack.adjoint() * f.f[j].col(0);
    s += v[j].squaredNorm();
    gv[j] = ch.bs_ris * v[j];
    gh[j] = ch.bs_ris * h_stack.row(j).adjoint();
  }
  if (!(s > 0.0)) throw DomainError("equivalent gradient: degenerate precoder (H^H F = 0)");

  // uf[j] = sum_i f_j[i] conj(u_i), so sum_i f_j[i] conj(E_i x) = uf[j] .* conj(G x).
  for (int j = 0; j < kk; ++j) {
    uf[j] = CVec::Zero(ns);
    for (int i = 0; i < kk; ++i) uf[j] += f.f[j](i, 0) * ch.ris_user[i].row(0).transpose().conjugate();
    tally.add(static_cast<std::uint64_t>(ns) * kk);
  }
  CVec grad_s = CVec::Zero(ns);
  for (int j = 0; j < kk; ++j) grad_s += uf[j].cwiseProduct(gv[j].conjugate());

  CVec grad = CVec::Zero(ns);
  for (int k = 0; k < kk; ++k) {
    const CVec uk_conj = ch.ris_user[k].row(0).transpose().conjugate();
    double p_all = c * s, p_int = c * s;
    CVec g_all = c * grad_s, g_int = c * grad_s;
    for (int j = 0; j < kk; ++j) {
      const cplx a = (h_stack.row(k) * v[j]).value();   // h_k v_j
      const CVec g = a * uk_conj.cwiseProduct(gv[j].conjugate()) +
                     std::conj(a) * uf[j].cwiseProduct(gh[k].conjugate());
      tally.add(static_cast<std::uint64_t>(ns) * 4);
      p_all += std::norm(a);
      g_all += g;
      if (j != k) {
        p_int += std::norm(a);
        g_int += g;
      }
    }
    grad += cfg.weights[k] * (g_all / p_all - g_int / p_int);
  }
  return grad;
}

inline CVec grad_equiv_theta_miso(const ChannelSet& ch, const PhaseVector& theta,
                                  const AuxPrecoderSet& f, const SystemConfig& cfg,
                                  Tally tally = {}) {
  if (cfg.n_rx != 1 || ch.n_rx() != 1)
    throw UnsupportedConfiguration("equivalent-objective theta gradient requires n_rx = 1");
  return grad_equiv_theta_miso_stack(ch, stack_channels(ch, theta, tally), f, cfg, tally);
}

/// Proposed line search applied to the equivalent objective with F fixed.
inline LineSearchResult line_search_proposed_equiv(const ChannelSet& ch, const AuxPrecoderSet& f,
                                                   const PhaseVector& theta, const CVec& grad,
                                                   const RVec& xi, const SystemConfig& cfg,
                                                   double r_current, Tally tally = {}) {
  const double c = cfg.ls_beta / (2.0 * theta.size());
  return detail::backtrack(
      theta, r_current, cfg, [&](double a) { return spg_step(theta, grad, xi, a); },
      [&](const PhaseVector& th) {
        CMat h = stack_channels(ch, th, tally);
        const double v = equivalent_rate(h, f, cfg, tally);
        return detail::Trial{v, std::move(h)};
      },
      [&](const PhaseVector& next, double r, double) {
        return r >= r_current + c * (next.values() - theta.values()).squaredNorm();
      });
}

// ---------------------------------------------------------------------------
// Empirical Lipschitz constant of the theta-gradient.

enum class LipschitzObjective { original, equivalent };

/// max over n_pairs i.i.d. pairs (theta1, theta2) of
/// ||grad(theta1) - grad(theta2)|| / ||theta1 - theta2||. Pairs are drawn in
/// sequence from one stream, so the first m pairs are the same for any
/// n_pairs >= m.
inline double estimate_lipschitz(const std::function<CVec(const PhaseVector&)>& gradient, int n_ris,
                                 int n_pairs, std::uint64_t seed) {
  if (n_pairs < 2) throw std::invalid_argument("estimate_lipschitz: need at least 2 sample pairs");
  Rng rng(seed);
  double best = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const PhaseVector a = random_phase_vector(n_ris, rng);
    const PhaseVector b = random_phase_vector(n_ris, rng);
    const double dist = (a.values() - b.values()).norm();
    if (!(dist > 0.0)) continue;
    best = std::max(best, (gradient(a) - gradient(b)).norm() / dist);
  }
  return best;
}

inline double estimate_lipschitz(const ChannelSet& ch, const PrecoderSet& w, const SystemConfig& cfg,
                                 int n_pairs, std::uint64_t seed) {
  return estimate_lipschitz([&](const PhaseVector& th) { return grad_wsr_theta(ch, th, w, cfg); },
                            ch.n_ris(), n_pairs, seed);
}

inline double estimate_lipschitz(const ChannelSet& ch, const AuxPrecoderSet& f,
                                 const SystemConfig& cfg, int n_pairs, std::uint64_t seed) {
  return estimate_lipschitz(
      [&](const PhaseVector& th) { return grad_equiv_theta_miso(ch, th, f, cfg); }, ch.n_ris(),
      n_pairs, seed);
}

inline double estimate_lipschitz(const ChannelSet& ch, const PrecoderSet& w, const AuxPrecoderSet& f,
                                 const SystemConfig& cfg, int n_pairs, LipschitzObjective which,
                                 std::uint64_t seed) {
  return which == LipschitzObjective::original ? estimate_lipschitz(ch, w, cfg, n_pairs, seed)
                                               : estimate_lipschitz(ch, f, cfg, n_pairs, seed);
}

}  // namespace risbf
