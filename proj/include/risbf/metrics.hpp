#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "risbf/model.hpp"

namespace risbf {

/// Cost buckets for complex-multiplication accounting.
enum class Phase : int { channel_stack = 0, w_update, theta_gradient, line_search };

inline constexpr std::array<Phase, 4> kAllPhases = {Phase::channel_stack, Phase::w_update,
                                                    Phase::theta_gradient, Phase::line_search};

inline constexpr std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::channel_stack: return "channel_stack";
    case Phase::w_update: return "w_update";
    case Phase::theta_gradient: return "theta_gradient";
    case Phase::line_search: return "line_search";
  }
  return "unknown";
}

/// Complex multiplications of an (m x k) by (k x n) product.
inline constexpr std::uint64_t count_matmul(std::uint64_t m, std::uint64_t k, std::uint64_t n) {
  return m * k * n;
}

/// Charge for a determinant, factorization or inverse of an n x n matrix.
inline constexpr std::uint64_t count_cubic(std::uint64_t n) { return n * n * n; }

/// Counts complex multiplications per phase. Only multiplications are
/// counted; additions and scalar transcendentals are free.
class OpCounter {
 public:
  void add(Phase p, std::uint64_t n) { per_phase_[static_cast<int>(p)] += n; }

  [[nodiscard]] std::uint64_t phase(Phase p) const { return per_phase_[static_cast<int>(p)]; }

  [[nodiscard]] std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto v : per_phase_) t += v;
    return t;
  }

  OpCounter& operator+=(const OpCounter& o) {
    for (std::size_t i = 0; i < per_phase_.size(); ++i) per_phase_[i] += o.per_phase_[i];
    return *this;
  }

 private:
  std::array<std::uint64_t, 4> per_phase_{};
};

/// Optional counter handle threaded through the numerical kernels. A
/// default-constructed Tally counts nothing.
struct Tally {
  OpCounter* counter = nullptr;
  Phase phase = Phase::w_update;

  void add(std::uint64_t n) const {
    if (counter) counter->add(phase, n);
  }
  [[nodiscard]] Tally as(Phase p) const { return {counter, p}; }
};

/// Dominant-term cost model of one outer AO iteration:
/// Nt Nr Nd K^2 + I_theta (Ns Nt Nr K) + I_w (Nr^3 K^3).
inline std::uint64_t predicted_outer_cost(const SystemConfig& cfg, std::uint64_t i_theta,
                                          std::uint64_t i_w) {
  const std::uint64_t nt = cfg.n_tx, ns = cfg.n_ris, k = cfg.n_users, nr = cfg.n_rx,
                      nd = cfg.n_streams;
  return nt * nr * nd * k * k + i_theta * (ns * nt * nr * k) + i_w * (nr * nr * nr * k * k * k);
}

}  // namespace risbf
