#include "commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "cgm/biorth_lab.hpp"
#include "cgm/errors.hpp"
#include "cgm/memory_dynamics.hpp"
#include "cgm/moment_assembler.hpp"

namespace cgmlab {

using json = nlohmann::ordered_json;
using namespace cgm;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Bounded-norm verdict: max/min of the last six sweep values within this ratio.
constexpr int kBoundedWindow = 6;
constexpr double kBoundedRatio = 2.0;

ArtifactSet start(const ExperimentConfig& cfg) {
  ArtifactSet out;
  out.add("config.resolved.yaml", cfg.to_yaml());
  return out;
}

void finish(ArtifactSet& out, const json& summary) { out.add("summary.json", summary.dump(2) + "\n"); }

std::vector<Mode> modes_for(const ExperimentConfig& cfg, double a) {
  std::vector<Mode> v;
  for (int n = 1; n <= cfg.modes; ++n) v.push_back(make_mode(n, a));
  return v;
}

std::vector<Mode> positive(std::vector<Mode> modes) {
  std::erase_if(modes, [](const Mode& m) { return m.mu2 <= 0.0; });
  if (modes.empty()) throw InvalidArgument("no configured mode has mu_n^2 > 0; raise 'modes'");
  return modes;
}

json kernel_json(const ExperimentConfig& cfg) { return cfg.kernel.build().describe(); }

}  // namespace

ArtifactSet cmd_resolvent(const ExperimentConfig& cfg) {
  auto out = start(cfg);
  const auto M = cfg.kernel.build();
  const auto grid = TimeGrid::make(cfg.T, cfg.steps);
  const auto rt = resolvent_of(M, grid);
  const auto Ms = M.sample(grid);
  const auto cf = M.closed_form_resolvent();

  std::vector<std::string> header{"t", "M", "R", "L"};
  if (cf) header.insert(header.end(), {"R_exact", "L_exact"});
  CsvTable csv(header);
  double errR = 0.0, errL = 0.0;
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const double t = grid->node(k);
    std::vector<double> row{t, Ms[k], rt.R[k], rt.L[k]};
    if (cf) {
      row.push_back(cf->R(t));
      row.push_back(cf->dR(t));
      errR = std::max(errR, std::abs(rt.R[k] - row[4]));
      errL = std::max(errL, std::abs(rt.L[k] - row[5]));
    }
    csv.row(row);
  }
  out.add("resolvent.csv", csv.str());

  json s;
  s["command"] = "resolvent";
  s["kernel"] = kernel_json(cfg);
  s["T"] = cfg.T;
  s["steps"] = cfg.steps;
  s["a"] = rt.a;
  s["R_T"] = rt.R.back();
  s["sup_R"] = rt.R.sup_norm();
  s["identity_residual"] = sup_distance(rt.R + convolve(Ms, rt.R), Ms);
  if (cf)
    s["oracle"] = {{"sup_error_R", errR}, {"sup_error_L", errL}};
  else
    s["oracle"] = nullptr;
  finish(out, s);
  return out;
}

namespace {

struct SimulationRun {
  std::vector<ModalTrajectory> trajectories;
  std::vector<double> discrepancy;  ///< solve_mode vs explicit_mode, per mode
  double heat_gap = kNaN;           ///< memoryless only: solve_mode vs heat_mode
  double sup_R = 0.0;
  double a = 0.0;
};

SimulationRun simulate(const ExperimentConfig& cfg, std::size_t steps) {
  const auto M = cfg.kernel.build();
  const auto grid = TimeGrid::make(cfg.T, steps);
  const auto rt = resolvent_of(M, grid);
  const auto f = cfg.boundary(grid);
  SimulationRun run;
  run.sup_R = rt.R.sup_norm();
  run.a = rt.a;
  if (M.is_zero()) run.heat_gap = 0.0;
  for (const auto& m : modes_for(cfg, rt.a)) {
    const double xi = cfg.initial_data(m.n);
    const auto g = trace_pairing(m, f);
    auto w = solve_mode(m, rt, xi, g);
    const auto we = explicit_mode(m, rt, H_direct(rt.L, m.mu2), xi, g);
    run.discrepancy.push_back(sup_distance(w.w, we.w));
    if (M.is_zero()) run.heat_gap = std::max(run.heat_gap, sup_distance(w.w, heat_mode(m, xi, g).w));
    run.trajectories.push_back(std::move(w));
  }
  return run;
}

}  // namespace

ArtifactSet cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts) {
  auto out = start(cfg);
  const auto run = simulate(cfg, static_cast<std::size_t>(cfg.steps));
  const auto& grid = run.trajectories.front().w.grid();

  std::vector<std::string> header{"t"};
  for (const auto& tr : run.trajectories) header.push_back("w_" + std::to_string(tr.mode.n));
  CsvTable traj(header);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    std::vector<double> row{grid->node(k)};
    for (const auto& tr : run.trajectories) row.push_back(tr.w[k]);
    traj.row(row);
  }
  out.add("trajectories.csv", traj.str());

  const FieldSolution field(run.trajectories);
  const auto def = deficiency_series(field);
  CsvTable dcsv({"t", "deficiency"});
  for (std::size_t k = 0; k < grid->size(); ++k) dcsv.row({grid->node(k), def[k]});
  out.add("deficiency.csv", dcsv.str());

  json s;
  s["command"] = "simulate";
  s["kernel"] = kernel_json(cfg);
  s["T"] = cfg.T;
  s["steps"] = cfg.steps;
  s["modes"] = cfg.modes;
  s["max_discrepancy"] = *std::max_element(run.discrepancy.begin(), run.discrepancy.end());
  s["discrepancy"] = run.discrepancy;
  s["heat_baseline_gap"] = std::isnan(run.heat_gap) ? json(nullptr) : json(run.heat_gap);
  s["deficiency_T"] = def.back();
  s["tail_bound"] = tail_bound(cfg.modes, run.a, cfg.T, run.sup_R, cfg.initial_data);

  if (opts.refine) {
    // w_n(T) on grids halved three times; differences of consecutive levels
    constexpr int kLevels = 4;
    std::vector<std::vector<double>> ends;
    for (int l = 0; l < kLevels; ++l) {
      const auto r = l == 0 ? run : simulate(cfg, static_cast<std::size_t>(cfg.steps) << l);
      std::vector<double> e;
      for (const auto& tr : r.trajectories) e.push_back(tr.w.back());
      ends.push_back(std::move(e));
    }
    CsvTable conv({"steps", "dt", "max_difference", "ratio"});
    json rows = json::array();
    double prev = kNaN;
    for (int l = 0; l + 1 < kLevels; ++l) {
      double diff = 0.0;
      for (std::size_t i = 0; i < ends[l].size(); ++i) diff = std::max(diff, std::abs(ends[l][i] - ends[l + 1][i]));
      const double steps = static_cast<double>(cfg.steps << l);
      const double ratio = prev / diff;
      conv.row({steps, cfg.T / steps, diff, ratio});
      rows.push_back({{"steps", steps}, {"max_difference", diff}, {"ratio", std::isnan(ratio) ? json(nullptr) : json(ratio)}});
      prev = diff;
    }
    out.add("convergence.csv", conv.str());
    s["convergence"] = rows;
  }
  finish(out, s);
  return out;
}

ArtifactSet cmd_moment(const ExperimentConfig& cfg) {
  auto out = start(cfg);
  const auto grid = TimeGrid::make(cfg.T, cfg.steps);
  const auto rt = resolvent_of(cfg.kernel.build(), grid);
  const auto modes = positive(modes_for(cfg, rt.a));
  const auto rep = dn_asymptotic_check(modes, rt);
  const auto mp = build_moment_problem(modes, rt, cfg.initial_data);
  const auto scope = cfg.scope ? cfg.scope : scope_threshold(rep);

  CsvTable csv({"n", "mu2", "xi", "d", "c", "scaled", "limit", "residual", "residual_scaled"});
  json entries = json::array();
  for (std::size_t i = 0; i < mp.entries.size(); ++i) {
    const auto& e = mp.entries[i];
    const auto& r = rep.rows[i];
    csv.row({static_cast<double>(e.mode.n), e.mode.mu2, e.xi, e.d, e.target(), r.scaled, -rep.R_T, r.residual,
             r.residual_scaled});
    entries.push_back({{"n", e.mode.n},
                       {"lambda2", e.mode.lambda2},
                       {"mu2", e.mode.mu2},
                       {"trace_factors", e.mode.traces},
                       {"xi", e.xi},
                       {"d_unit", e.d_unit},
                       {"d_n", e.d},
                       {"c", e.target()},
                       {"sup_H", e.H.sup_norm()},
                       {"kernel_at_0", {e.kernel.profile(0).front(), e.kernel.profile(1).front()}},
                       {"kernel_at_T", {e.kernel.profile(0).back(), e.kernel.profile(1).back()}}});
  }
  out.add("moment.csv", csv.str());

  json dump;
  dump["T"] = cfg.T;
  dump["grid"] = {{"T", cfg.T}, {"steps", cfg.steps}, {"dt", grid->dt()}};
  dump["kernel"] = kernel_json(cfg);
  dump["a"] = rt.a;
  dump["R_T"] = rep.R_T;
  dump["regime"] = rep.memoryless ? "memoryless" : "memory";
  dump["modes"] = entries;
  out.add("moment.json", dump.dump(2) + "\n");

  json s;
  s["command"] = "moment";
  s["kernel"] = kernel_json(cfg);
  s["regime"] = rep.memoryless ? "memoryless" : "memory";
  s["R_T"] = rep.R_T;
  s["limit"] = -rep.R_T;
  s["scope_threshold"] = scope ? json(*scope) : json(nullptr);
  s["scope_policy"] = cfg.scope ? "fixed" : "auto";
  s["sup_residual_scaled"] = rep.sup_residual_scaled;
  s["last_scaled"] = rep.rows.back().scaled;
  finish(out, s);
  return out;
}

ArtifactSet cmd_biorth(const ExperimentConfig& cfg) {
  auto out = start(cfg);
  const auto& b = cfg.biorth;

  const auto family = ExponentFamily::dirichlet(b.family, b.shift);
  std::vector<std::size_t> pos;
  for (int n = 1; n <= b.fit[1]; ++n) pos.push_back(static_cast<std::size_t>(n - 1));
  const auto logs = cauchy_log_diag(family, pos, cfg.precision);
  CsvTable growth({"n", "norm", "log_norm"});
  std::vector<double> x, y;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const double ln = 0.5 * logs[i];
    x.push_back(static_cast<double>(i + 1));
    y.push_back(ln);
    growth.row({x.back(), std::exp(ln), ln});
  }
  out.add("growth.csv", growth.str());
  const auto fit = fit_line(x, y, b.fit[0], b.fit[1]);

  const auto small = ExponentFamily::dirichlet(b.gram_size, b.shift);
  const auto horizon = b.horizon == "finite" ? Horizon::finite(cfg.T) : Horizon::infinite();
  BiorthOptions bo;
  bo.bits = cfg.precision;
  bo.max_bits = cfg.max_bits;
  const auto rep = min_norm_biorth(small, horizon, bo);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  CsvTable csv({"n", "norm", "log_norm", "residual"});
  for (std::size_t i = 0; i < rep.n.size(); ++i)
    csv.row({static_cast<double>(rep.n[i]), std::sqrt(rep.norm2[i]), rep.log_norm[i], rep.residual[i]});
  out.add("biorth.csv", csv.str());

  json gram;
  gram["horizon"] = horizon.describe();
  gram["size"] = b.gram_size;
  gram["bits_used"] = rep.bits_used;
  gram["max_residual"] = rep.max_residual;
  gram["log10_condition"] = rep.log10_condition;
  if (horizon.is_infinite()) {
    const auto exact = cauchy_diag(small, {}, cfg.precision);
    double worst = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(rep.norm2[i] / exact[i] - 1.0));
    gram["max_rel_vs_closed_form"] = worst;
  }
  gram["warnings"] = rep.warnings;

  json s;
  s["command"] = "biorth";
  s["shift"] = b.shift;
  s["growth"] = {{"family", b.family},
                 {"horizon", "(0,inf)"},
                 {"window", b.fit},
                 {"slope", fit.slope},
                 {"slope_over_pi", fit.slope / kPi},
                 {"rms_residual", fit.rms_residual}};
  s["gram"] = gram;
  finish(out, s);
  return out;
}

ArtifactSet cmd_control(const ExperimentConfig& cfg) {
  auto out = start(cfg);
  const auto grid = TimeGrid::make(cfg.T, static_cast<std::size_t>(cfg.steps) * cfg.control.refine);
  ControlOptions co;
  co.bits = cfg.precision;
  co.max_bits = cfg.max_bits;
  co.endpoints = cfg.control.endpoints;

  auto sweep = [&](const MemoryKernel& M) {
    const auto rt = resolvent_of(M, grid);
    const auto modes = modes_for(cfg, rt.a);
    if (modes.front().mu2 <= 0.0) throw InvalidArgument("mu_1^2 <= 0 for the configured kernel; every mode must be positive");
    const auto mp = build_moment_problem(modes, rt, cfg.initial_data);
    std::vector<ControlResult> v;
    for (int k = 1; k <= cfg.modes; ++k) {
      v.push_back(min_norm_control(mp, k, co));
      for (const auto& w : v.back().warnings) std::cerr << "warning: N_active = " << k << ": " << w << "\n";
    }
    return v;
  };
  const auto heat = sweep(MemoryKernel::zero());
  const auto mem = sweep(cfg.kernel.build());

  CsvTable csv({"kernel", "N_active", "norm", "log_norm", "residual", "deficiency", "worst_case_cost"});
  for (const auto* set : {&heat, &mem}) {
    const std::string label = set == &heat ? "memoryless" : "configured";
    for (const auto& r : *set) {
      const double row[] = {static_cast<double>(r.N_active), r.norm, r.log_norm, r.moment_residual, r.deficiency,
                            r.worst_case_cost};
      csv.row(label, row);
    }
  }
  out.add("control.csv", csv.str());

  const int from = std::max(0, cfg.modes - kBoundedWindow);
  double lo = INFINITY, hi = 0.0;
  for (int k = from; k < cfg.modes; ++k) {
    lo = std::min(lo, heat[k].norm);
    hi = std::max(hi, heat[k].norm);
  }
  std::vector<double> x, y;
  bool monotone = true;
  for (int k = 0; k < cfg.modes; ++k) {
    x.push_back(k + 1);
    y.push_back(mem[k].log_norm);
    if (k > 0 && mem[k].norm < mem[k - 1].norm) monotone = false;
  }
  const double slope = cfg.modes >= 2 ? fit_line(x, y, 1, cfg.modes).slope : kNaN;

  json verdict;
  verdict["memoryless_bounded"] = hi / lo <= kBoundedRatio;
  verdict["memory_blowup_slope"] = std::isnan(slope) ? json(nullptr) : json(slope);
  out.add("verdict.json", verdict.dump(2) + "\n");

  json s;
  s["command"] = "control";
  s["kernel"] = kernel_json(cfg);
  s["control_steps"] = grid->steps();
  s["memoryless_ratio_last"] = hi / lo;
  s["memoryless_window"] = cfg.modes - from;
  s["configured_monotone"] = monotone;
  s["verdict"] = verdict;
  finish(out, s);
  return out;
}

}  // namespace cgmlab
