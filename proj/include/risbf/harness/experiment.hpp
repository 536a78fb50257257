#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "risbf/ao.hpp"
#include "risbf/channel.hpp"
#include "risbf/channel_io.hpp"
#include "risbf/harness/experiment_spec.hpp"
#include "risbf/precoder_sca.hpp"
#include "risbf/ris_spgm.hpp"

namespace risbf::harness {

/// "%.12g"; the only number format used in CSV output.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Runs fn(0..n-1) on up to `jobs` threads. Each index runs exactly once;
/// callers write results into per-index slots, so the outcome does not
/// depend on scheduling.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct RunRecord {
  std::size_t sweep_index = 0;
  std::size_t realization = 0;
  Variant variant = Variant::proposed;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double wsr = 0.0;
  int outer_iters = 0;
  std::uint64_t cmul = 0;
  double time_sec = 0.0;
};

struct SummaryRow {
  std::string sweep_param;
  std::string sweep_value;
  Variant variant = Variant::proposed;
  double mean_wsr = 0.0;
  double std_wsr = 0.0;
  double mean_cmul = 0.0;
  double mean_outer_iters = 0.0;
  double mean_time_sec = 0.0;
  int n_ok = 0;
  int n_failed = 0;
};

struct ExperimentSummary {
  std::vector<RunRecord> runs;    // sweep point, realization, variant order
  std::vector<SummaryRow> rows;   // sweep point, variant order
  int n_failed = 0;
};

inline std::string trace_file_name(std::size_t sweep_index, std::size_t realization, Variant v) {
  return "s" + std::to_string(sweep_index) + "_r" + std::to_string(realization) + "_" +
         std::string(to_string(v)) + ".csv";
}

inline std::string channel_file_name(std::size_t sweep_index, std::size_t realization) {
  return "s" + std::to_string(sweep_index) + "_r" + std::to_string(realization) + ".txt";
}

inline void write_trace_csv(const std::filesystem::path& path, const SolveTrace& t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "outer_iter,wsr_nats,wsr_bits,alpha,ls_steps,sca_iters,cum_cmul,elapsed_sec\n";
  for (int i = 0; i < t.outer_iters(); ++i)
    os << i + 1 << ',' << fmt(t.wsr_per_outer_iter[i]) << ',' << fmt(nats_to_bits(t.wsr_per_outer_iter[i]))
       << ',' << fmt(t.step_sizes[i]) << ',' << t.line_search_steps[i] << ',' << t.sca_iters[i] << ','
       << t.cum_cmul[i] << ',' << fmt(t.elapsed_sec[i]) << '\n';
}

inline std::string sweep_value_label(const ExperimentSpec& spec, std::size_t i) {
  return spec.sweep ? fmt(spec.sweep->values[i]) : "";
}

inline void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "sweep_param,sweep_value,variant,mean_wsr,std_wsr,mean_cmul,mean_outer_iters,mean_time_sec,"
        "n_ok,n_failed\n";
  for (const auto& r : rows)
    os << r.sweep_param << ',' << r.sweep_value << ',' << to_string(r.variant) << ',' << fmt(r.mean_wsr)
       << ',' << fmt(r.std_wsr) << ',' << fmt(r.mean_cmul) << ',' << fmt(r.mean_outer_iters) << ','
       << fmt(r.mean_time_sec) << ',' << r.n_ok << ',' << r.n_failed << '\n';
}

/// Per-run outcomes, including the error text of failed runs.
inline void write_runs_csv(const std::filesystem::path& path, const ExperimentSpec& spec,
                           const std::vector<RunRecord>& runs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "sweep_value,realization,variant,seed,status,wsr_nats,outer_iters,cmul,time_sec,error\n";
  for (const auto& r : runs) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << sweep_value_label(spec, r.sweep_index) << ',' << r.realization << ',' << to_string(r.variant)
       << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << fmt(r.wsr) << ',' << r.outer_iters
       << ',' << r.cmul << ',' << fmt(r.time_sec) << ',' << err << '\n';
  }
}

/// Channel and theta0 of one realization: regenerated from the seed, or the
/// channel read back from replay_dir (theta0 always comes from the seed).
inline Realization realization_for(const ExperimentSpec& spec, const SystemConfig& cfg,
                                   std::size_t sweep_index, std::size_t r, std::uint64_t seed) {
  Realization real = draw_realization(cfg, spec.geometry, seed);
  if (spec.replay_dir) {
    real.channels =
        load_channels(*spec.replay_dir / "channels" / channel_file_name(sweep_index, r));
    real.channels.validate(cfg);
  }
  return real;
}

/// Monte-Carlo driver: every (sweep point, realization) draws one channel
/// and theta0 and runs every requested variant on it. Writes
///   <output_dir>/traces/s<i>_r<r>_<variant>.csv   one per run
///   <output_dir>/runs.csv                         one line per run
///   <output_dir>/summary.csv                      one line per (sweep point, variant)
///   <output_dir>/channels/s<i>_r<r>.txt           if save_channels
/// A failing run is recorded and does not stop the others.
inline ExperimentSummary run_experiment(const ExperimentSpec& spec) {
  const ValidationReport rep = validate_spec(spec);
  if (!rep.ok()) throw std::invalid_argument("invalid experiment spec: " + rep.issues.front().message);

  namespace fs = std::filesystem;
  fs::create_directories(spec.output_dir / "traces");
  if (spec.save_channels) fs::create_directories(spec.output_dir / "channels");

  const std::size_t n_pts = spec.n_points(), n_real = spec.n_realizations,
                    n_var = spec.variants.size();
  ExperimentSummary out;
  out.runs.resize(n_pts * n_real * n_var);

  parallel_for(n_pts * n_real, spec.jobs, [&](std::size_t job) {
    const std::size_t i = job / n_real, r = job % n_real;
    const SystemConfig cfg = spec.config_at(i);
    const std::uint64_t seed = realization_seed(spec.master_seed, i, r);
    RunRecord* slots = &out.runs[job * n_var];
    for (std::size_t v = 0; v < n_var; ++v) {
      slots[v].sweep_index = i;
      slots[v].realization = r;
      slots[v].variant = spec.variants[v];
      slots[v].seed = seed;
    }

    Realization real;
    try {
      real = realization_for(spec, cfg, i, r, seed);
      if (spec.save_channels)
        save_channels(spec.output_dir / "channels" / channel_file_name(i, r), real.channels);
    } catch (const std::exception& e) {
      for (std::size_t v = 0; v < n_var; ++v) slots[v].error = e.what();
      return;
    }
    for (std::size_t v = 0; v < n_var; ++v) {
      RunRecord& rec = slots[v];
      try {
        const SolveResult res = solve(real.channels, cfg, rec.variant, real.theta0);
        write_trace_csv(spec.output_dir / "traces" / trace_file_name(i, r, rec.variant), res.trace);
        rec.ok = true;
        rec.wsr = res.wsr_final;
        rec.outer_iters = res.trace.outer_iters();
        rec.cmul = res.trace.complex_mult_count;
        rec.time_sec = res.trace.wall_time_sec;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  });

  for (std::size_t i = 0; i < n_pts; ++i)
    for (std::size_t v = 0; v < n_var; ++v) {
      SummaryRow row;
      row.sweep_param = spec.sweep ? std::string(to_string(spec.sweep->param)) : "none";
      row.sweep_value = sweep_value_label(spec, i);
      row.variant = spec.variants[v];
      std::vector<double> wsr;
      for (std::size_t r = 0; r < n_real; ++r) {
        const RunRecord& rec = out.runs[(i * n_real + r) * n_var + v];
        if (!rec.ok) {
          ++row.n_failed;
          continue;
        }
        ++row.n_ok;
        wsr.push_back(rec.wsr);
        row.mean_cmul += static_cast<double>(rec.cmul);
        row.mean_outer_iters += rec.outer_iters;
        row.mean_time_sec += rec.time_sec;
      }
      if (row.n_ok > 0) {
        const double n = row.n_ok;
        for (double x : wsr) row.mean_wsr += x;
        row.mean_wsr /= n;
        row.mean_cmul /= n;
        row.mean_outer_iters /= n;
        row.mean_time_sec /= n;
        // sample standard deviation; 0 for a single run
        if (row.n_ok > 1) {
          double ss = 0.0;
          for (double x : wsr) ss += (x - row.mean_wsr) * (x - row.mean_wsr);
          row.std_wsr = std::sqrt(ss / (n - 1.0));
        }
      }
      out.n_failed += row.n_failed;
      out.rows.push_back(std::move(row));
    }

  write_runs_csv(spec.output_dir / "runs.csv", spec, out.runs);
  write_summary_csv(spec.output_dir / "summary.csv", out.rows);
  return out;
}

// ---------------------------------------------------------------------------

struct LipschitzRow {
  std::size_t realization = 0;
  std::uint64_t seed = 0;
  double l_original = 0.0;
  double l_equivalent = 0.0;
  double ratio = 0.0;   // l_equivalent / l_original
};

struct LipschitzSummary {
  std::vector<LipschitzRow> rows;
  double median_ratio = 0.0;
  double median_original = 0.0;
  double median_equivalent = 0.0;
  double fraction_equivalent_larger = 0.0;
  // Both estimates on the same channel with every reflected link removed,
  // where neither objective depends on theta.
  double sanity_original = 0.0;
  double sanity_equivalent = 0.0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Empirical gradient Lipschitz constants of the original and equivalent
/// objectives (single-antenna users). For each realization W comes from one
/// precoder solve at theta0 and F is the matching auxiliary variable; both
/// estimates use the same sample pairs. Writes <output_dir>/lipschitz.csv with
/// one row per realization and a final median row.
inline LipschitzSummary experiment_lipschitz(const ExperimentSpec& spec) {
  const SystemConfig& cfg = spec.base_config;
  if (cfg.n_rx != 1 || cfg.n_streams != 1)
    throw UnsupportedConfiguration("lipschitz experiment requires n_rx = n_streams = 1");
  const ValidationReport rep = validate_spec(spec);
  if (!rep.ok()) throw std::invalid_argument("invalid experiment spec: " + rep.issues.front().message);

  LipschitzSummary out;
  out.rows.resize(spec.n_realizations);
  parallel_for(out.rows.size(), spec.jobs, [&](std::size_t r) {
    const std::uint64_t seed = realization_seed(spec.master_seed, 0, r);
    const Realization real = realization_for(spec, cfg, 0, r, seed);
    const CMat h = stack_channels(real.channels, real.theta0);
    const PrecoderSolution sol = solve_precoder(AuxPrecoderSet::matched_filter(cfg), h, cfg);
    const std::uint64_t sample_seed = mix_seed(seed, 3);
    LipschitzRow& row = out.rows[r];
    row.realization = r;
    row.seed = seed;
    row.l_original = estimate_lipschitz(real.channels, sol.w, cfg, spec.lipschitz_pairs, sample_seed);
    row.l_equivalent = estimate_lipschitz(real.channels, sol.f, cfg, spec.lipschitz_pairs, sample_seed);
    row.ratio = row.l_original > 0.0 ? row.l_equivalent / row.l_original : 0.0;
  });

  std::vector<double> ratios, lo, le;
  int larger = 0;
  for (const auto& row : out.rows) {
    ratios.push_back(row.ratio);
    lo.push_back(row.l_original);
    le.push_back(row.l_equivalent);
    if (row.l_equivalent > row.l_original) ++larger;
  }
  out.median_ratio = median(ratios);
  out.median_original = median(lo);
  out.median_equivalent = median(le);
  out.fraction_equivalent_larger = static_cast<double>(larger) / static_cast<double>(out.rows.size());

  {
    const std::uint64_t seed = realization_seed(spec.master_seed, 0, 0);
    const Realization real = realization_for(spec, cfg, 0, 0, seed);
    const ChannelSet flat = real.channels.without_reflection();
    const CMat h = stack_channels(flat, real.theta0);
    const PrecoderSolution sol = solve_precoder(AuxPrecoderSet::matched_filter(cfg), h, cfg);
    const int pairs = std::min(spec.lipschitz_pairs, 100);
    out.sanity_original = estimate_lipschitz(flat, sol.w, cfg, pairs, seed);
    out.sanity_equivalent = estimate_lipschitz(flat, sol.f, cfg, pairs, seed);
  }

  std::filesystem::create_directories(spec.output_dir);
  std::ofstream os(spec.output_dir / "lipschitz.csv");
  if (!os) throw std::runtime_error("cannot write lipschitz.csv");
  os << "row,realization,seed,l_original,l_equivalent,ratio\n";
  for (const auto& row : out.rows)
    os << "realization," << row.realization << ',' << row.seed << ',' << fmt(row.l_original) << ','
       << fmt(row.l_equivalent) << ',' << fmt(row.ratio) << '\n';
  os << "median,,," << fmt(out.median_original) << ',' << fmt(out.median_equivalent) << ','
     << fmt(out.median_ratio) << '\n';
  return out;
}

}  // namespace risbf::harness
