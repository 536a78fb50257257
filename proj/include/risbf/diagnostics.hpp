#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "risbf/channel.hpp"
#include "risbf/rng.hpp"
#include "risbf/ris_spgm.hpp"

namespace risbf {

/// Central-difference check of a complex gradient (convention
/// (d/dRe + j d/dIm) / 2). For each coordinate n in `coords`, the real and
/// imaginary perturbations of size delta give estimates of 2 Re(grad_n) and
/// 2 Im(grad_n). Returns ||fd - analytic||_inf / ||analytic||_inf over all
/// sampled real components (absolute error if the analytic part is zero).
inline double fd_gradient_error(const std::function<double(const CVec&)>& f, const CVec& x,
                                const CVec& grad, const std::vector<int>& coords, double delta) {
  double err = 0.0, scale = 0.0;
  for (int n : coords) {
    for (const cplx dir : {cplx(1.0, 0.0), cplx(0.0, 1.0)}) {
      CVec xp = x, xm = x;
      xp[n] += delta * dir;
      xm[n] -= delta * dir;
      const double fd = (f(xp) - f(xm)) / (2.0 * delta);
      const double an = dir.real() != 0.0 ? 2.0 * grad[n].real() : 2.0 * grad[n].imag();
      err = std::max(err, std::abs(fd - an));
      scale = std::max(scale, std::abs(an));
    }
  }
  return scale > 0.0 ? err / scale : err;
}

/// theta as a raw vector; the objectives extend to all of C^N_s.
inline PhaseVector unchecked_phase(const CVec& v) { return PhaseVector::from_unit(v, 1.0); }

struct GradCheckReport {
  int instances = 0;
  double max_rel_error = 0.0;
};

/// `n_coords` random coordinates of `grad_wsr_theta` on `instances` random
/// realizations of cfg with random W of full power.
inline GradCheckReport gradcheck_wsr(const SystemConfig& cfg, const GeometryConfig& geo, int instances,
                                     int n_coords, double delta, std::uint64_t seed) {
  GradCheckReport rep;
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = mix_seed(seed, i);
    const Realization real = draw_realization(cfg, geo, s);
    Rng rng(mix_seed(s, 7));
    PrecoderSet w;
    for (int k = 0; k < cfg.n_users; ++k) w.w.push_back(rng.complex_gaussian(cfg.n_tx, cfg.n_streams));
    const double scale = std::sqrt(cfg.power_bs / w.total_power());
    for (auto& wk : w.w) wk *= scale;
    const CVec g = grad_wsr_theta(real.channels, real.theta0, w, cfg);
    std::vector<int> coords;
    for (int c = 0; c < std::min(n_coords, cfg.n_ris); ++c)
      coords.push_back(static_cast<int>(rng.uniform() * cfg.n_ris) % cfg.n_ris);
    auto f = [&](const CVec& th) { return wsr(real.channels, unchecked_phase(th), w, cfg); };
    rep.max_rel_error =
        std::max(rep.max_rel_error, fd_gradient_error(f, real.theta0.values(), g, coords, delta));
    ++rep.instances;
  }
  return rep;
}

/// Same check for the equivalent-objective gradient (cfg must have n_rx = 1);
/// F is drawn at random.
inline GradCheckReport gradcheck_equivalent(const SystemConfig& cfg, const GeometryConfig& geo,
                                            int instances, int n_coords, double delta,
                                            std::uint64_t seed) {
  GradCheckReport rep;
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = mix_seed(seed, i);
    const Realization real = draw_realization(cfg, geo, s);
    Rng rng(mix_seed(s, 7));
    AuxPrecoderSet f;
    for (int k = 0; k < cfg.n_users; ++k)
      f.f.push_back(rng.complex_gaussian(cfg.stacked_rx(), cfg.n_streams));
    const CVec g = grad_equiv_theta_miso(real.channels, real.theta0, f, cfg);
    std::vector<int> coords;
    for (int c = 0; c < std::min(n_coords, cfg.n_ris); ++c)
      coords.push_back(static_cast<int>(rng.uniform() * cfg.n_ris) % cfg.n_ris);
    auto obj = [&](const CVec& th) {
      return equivalent_rate_theta(real.channels, unchecked_phase(th), f, cfg);
    };
    rep.max_rel_error =
        std::max(rep.max_rel_error, fd_gradient_error(obj, real.theta0.values(), g, coords, delta));
    ++rep.instances;
  }
  return rep;
}

}  // namespace risbf
