#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "risbf/channel.hpp"
#include "risbf/metrics.hpp"
#include "risbf/model.hpp"
#include "risbf/precoder_sca.hpp"
#include "risbf/rates.hpp"
#include "risbf/ris_spgm.hpp"

namespace risbf {

enum class Variant { proposed, bls1_conventional_pg, bls2_equivalent_theta, random_phase, without_ris };

inline constexpr std::array<Variant, 5> kAllVariants = {
    Variant::proposed, Variant::bls1_conventional_pg, Variant::bls2_equivalent_theta,
    Variant::random_phase, Variant::without_ris};

inline constexpr std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::proposed: return "proposed";
    case Variant::bls1_conventional_pg: return "bls1_conventional_pg";
    case Variant::bls2_equivalent_theta: return "bls2_equivalent_theta";
    case Variant::random_phase: return "random_phase";
    case Variant::without_ris: return "without_ris";
  }
  return "unknown";
}

/// Accepts the full tag or the short aliases bls1 / bls2.
inline std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : kAllVariants)
    if (s == to_string(v)) return v;
  if (s == "bls1") return Variant::bls1_conventional_pg;
  if (s == "bls2") return Variant::bls2_equivalent_theta;
  return std::nullopt;
}

struct SolveResult {
  PrecoderSet w_final;
  PhaseVector theta_final;
  double wsr_final = 0.0;
  SolveTrace trace;
  OpCounter ops;
};

namespace detail {

class AoRecorder {
 public:
  explicit AoRecorder(SolveResult& res) : res_(res), start_(std::chrono::steady_clock::now()) {}

  void record(double wsr, double alpha, int ls_steps, const PrecoderSolution& sol) {
    auto& t = res_.trace;
    t.wsr_per_outer_iter.push_back(wsr);
    t.step_sizes.push_back(alpha);
    t.line_search_steps.push_back(ls_steps);
    t.sca_iters.push_back(sol.iters);
    t.sca_histories.push_back(sol.objective_history);
    t.cum_cmul.push_back(res_.ops.total());
    t.elapsed_sec.push_back(elapsed());
  }

  void finish() {
    res_.trace.complex_mult_count = res_.ops.total();
    res_.trace.wall_time_sec = elapsed();
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  SolveResult& res_;
  std::chrono::steady_clock::time_point start_;
};

/// Single W-update at a fixed theta (random_phase and without_ris).
inline SolveResult solve_fixed_theta(const ChannelSet& ch, const SystemConfig& cfg,
                                     const PhaseVector& theta) {
  SolveResult res;
  AoRecorder rec(res);
  const Tally t{&res.ops, Phase::channel_stack};
  const CMat h = stack_channels(ch, theta, t);
  const PrecoderSolution sol =
      solve_precoder(AuxPrecoderSet::matched_filter(cfg), h, cfg, t.as(Phase::w_update));
  res.w_final = sol.w;
  res.theta_final = theta;
  res.wsr_final = wsr_from_stack(h, sol.w, cfg, t.as(Phase::w_update));
  rec.record(res.wsr_final, 0.0, 0, sol);
  rec.finish();
  return res;
}

/// Outer loop shared by proposed, bls1 and bls2.
inline SolveResult solve_alternating(const ChannelSet& ch, const SystemConfig& cfg, Variant variant,
                                     const PhaseVector& theta0) {
  SolveResult res;
  AoRecorder rec(res);
  const Tally t_stack{&res.ops, Phase::channel_stack};
  const Tally t_w = t_stack.as(Phase::w_update);
  const Tally t_grad = t_stack.as(Phase::theta_gradient);
  const Tally t_ls = t_stack.as(Phase::line_search);

  PhaseVector theta = theta0;
  CMat h = stack_channels(ch, theta, t_stack);
  CMat hbar = stacked_gram(h, t_w);

  // Reference value for the first stop test: matched filter at theta0.
  const AuxPrecoderSet f_mf = AuxPrecoderSet::matched_filter(cfg);
  double r_prev = equivalent_rate_gram(hbar, f_mf, cfg, t_w);

  PrecoderSet w;
  AuxPrecoderSet f_start = f_mf;
  int stall_run = 0;
  double r_new = r_prev;
  for (int it = 1; it <= cfg.ao_max_iters; ++it) {
    const PrecoderSolution sol = solve_precoder_gram(f_start, h, hbar, cfg, t_w);
    w = sol.w;

    // R(W, theta) of the recovered W equals the final equivalent rate; for
    // bls2 the value on the equivalent objective is the same number.
    const double r_cur = sol.objective_history.back();
    const CVec g = variant == Variant::bls2_equivalent_theta
                       ? grad_equiv_theta_miso_stack(ch, h, sol.f, cfg, t_grad)
                       : grad_wsr_theta_stack(ch, h, w, cfg, t_grad);
    if (g.isZero(0.0)) {
      // Every coordinate frozen: theta cannot move, and another round would
      // only rerun the precoder solve where it has already converged.
      r_new = r_cur;
      rec.record(r_new, 0.0, 0, sol);
      break;
    }
    LineSearchResult ls;
    if (variant == Variant::bls2_equivalent_theta)
      ls = line_search_proposed_equiv(ch, sol.f, theta, g, scaling_matrix(g), cfg, r_cur, t_ls);
    else if (variant == Variant::proposed)
      ls = line_search_proposed(ch, w, theta, g, scaling_matrix(g), cfg, r_cur, t_ls);
    else
      ls = line_search_armijo(ch, w, theta, g, cfg, r_cur, t_ls);
    r_new = ls.value;
    if (!ls.stalled) {
      theta = std::move(ls.theta);
      h = std::move(ls.h_stack);
      hbar = stacked_gram(h, t_w);
    } else {
      ++res.trace.stalls;
    }

    if (variant == Variant::bls2_equivalent_theta) {
      // F stays valid across the theta change; W is re-derived from it.
      f_start = sol.f;
      w = recover_precoder(h, sol.f, cfg, t_w);
    } else {
      // Warm start: the F whose H^H F is the projection of the current W onto
      // the row space of the new H; its equivalent rate is >= R(W, theta).
      f_start = aux_from_precoder(h, hbar, w, t_w);
      if (!f_start.nontrivial()) f_start = f_mf;
    }

    rec.record(r_new, ls.stalled ? 0.0 : ls.alpha, ls.steps, sol);

    const bool small = r_new - r_prev <= cfg.ao_tol;
    if (ls.stalled) {
      stall_run = small ? stall_run + 1 : 0;
      if (stall_run >= 2) break;
    } else {
      stall_run = 0;
      if (small) break;
    }
    r_prev = r_new;
  }
  res.w_final = std::move(w);
  res.theta_final = std::move(theta);
  res.wsr_final = r_new;
  rec.finish();
  return res;
}

}  // namespace detail

/// Runs one algorithm variant from theta0 on a fixed channel realization.
inline SolveResult solve(const ChannelSet& ch, const SystemConfig& cfg, Variant variant,
                         const PhaseVector& theta0) {
  require_valid(cfg);
  ch.validate(cfg);
  if (theta0.size() != cfg.n_ris) throw std::invalid_argument("solve: theta0 has wrong length");
  if (variant == Variant::bls2_equivalent_theta && cfg.n_rx != 1)
    throw UnsupportedConfiguration("bls2_equivalent_theta requires single-antenna users (n_rx = 1)");
  switch (variant) {
    case Variant::random_phase: return detail::solve_fixed_theta(ch, cfg, theta0);
    case Variant::without_ris: return detail::solve_fixed_theta(ch.without_reflection(), cfg, theta0);
    default: return detail::solve_alternating(ch, cfg, variant, theta0);
  }
}

}  // namespace risbf
