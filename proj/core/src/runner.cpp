#include "panelflow/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "panelflow/errors.hpp"
#include "panelflow/parallel.hpp"

namespace panelflow {

namespace {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "Converged";
    case Verdict::Growing: return "Growing";
    case Verdict::Wandering: return "Wandering";
  }
  return "Wandering";
}

}  // namespace

TrajectoryRecord run(const SimConfig& config, const PlateGrid& grid, const ScalarField& u0,
                     const ScalarField& u1, const RunProbes& probes) {
  if (probes.record_stride < 1) throw ValidationError("record stride must be at least 1");
  if (probes.trace_stride < 0) throw ValidationError("trace stride must be nonnegative");

  Simulator sim(config, grid, u0, u1);
  DiagnosticsAccumulator acc(sim.config(), grid, sim.airy_solver(), probes.catalog);

  const double dt = sim.config().dt;
  const long n_steps = std::lround(std::ceil(sim.config().t_end / dt - 1e-9));

  TrajectoryRecord out;
  out.records.reserve(static_cast<size_t>(n_steps / probes.record_stride) + 2);

  auto take_record = [&](bool with_trace) {
    const ScalarField q = sim.current_q();
    DiagnosticsRecord r = acc.record(sim.state(), &q);
    if (with_trace)
      r.trace_residual =
          trace_residual(sim.state().hist, sim.config().aero, grid, sim.state().t);
    out.records.push_back(r);
  };

  take_record(probes.trace_stride > 0);
  for (long s = 1; s <= n_steps; ++s) {
    try {
      sim.step();
    } catch (const NumericalError& e) {
      // Keep what we have: flag the last valid state and stop.
      out.aborted = true;
      out.abort_reason = e.what();
      if (!out.records.empty() && out.records.back().t == sim.state().t) {
        out.records.back().flags |= kFlagNonFinite;
      } else {
        DiagnosticsRecord r = acc.record(sim.state());
        r.flags |= kFlagNonFinite;
        out.records.push_back(r);
      }
      break;
    }
    const bool last = s == n_steps;
    if (s % probes.record_stride == 0 || last) {
      const bool with_trace =
          probes.trace_stride > 0 && (s % probes.trace_stride == 0 || last);
      take_record(with_trace);
    }
  }

  out.final_u = sim.state().u;
  out.final_ut = sim.state().ut;
  out.final_t = sim.state().t;
  out.steps = sim.state().step_index;
  return out;
}

SummaryRow run_cell(const ExperimentManifest& m, std::ostream* log) {
  const PlateGrid grid = manifest_grid(m);
  const SimConfig config = resolve_config(m, grid);
  ScalarField u0(grid), u1(grid);
  resolve_initial(m, grid, config, u0, u1);
  const std::string echo = serialize_manifest(m);
  const std::string dir = m.output.directory;

  std::optional<EquilibriumSet> catalog;
  const std::string catalog_path = dir + "/" + m.output.catalog;
  if (file_exists(catalog_path)) {
    std::istringstream is(read_text_file(catalog_path));
    EquilibriumSet loaded = read_catalog_json(is);
    if (!loaded.empty() && !(loaded.members().front().u.grid() == grid))
      throw ValidationError("catalog at '" + catalog_path + "' lives on a different grid");
    catalog = std::move(loaded);
    if (log)
      *log << m.name << ": distance catalog with " << catalog->size() << " member(s)\n";
  }

  RunProbes probes;
  probes.record_stride = m.probes.record_stride;
  probes.trace_stride = m.probes.trace_stride;
  probes.catalog = catalog ? &*catalog : nullptr;
  TrajectoryRecord result = run(config, grid, u0, u1, probes);

  {
    std::ostringstream os;
    write_records_csv(os, result.records, echo);
    write_text_file(dir + "/" + m.output.records, os.str());
  }
  {
    std::ostringstream os;
    write_snapshot(os, result.final_u, result.final_t, echo);
    write_text_file(dir + "/" + m.output.snapshot, os.str());
  }

  SummaryRow row;
  row.cell = m.name;
  row.U = m.U;
  row.k = m.k;
  row.beta = m.beta;
  row.load_scale = m.load_scale;
  row.final_dist = result.records.back().dist_to_equilibria;
  row.decay_rate = std::numeric_limits<double>::quiet_NaN();
  row.diss_total = result.records.back().diss_integral;

  if (result.aborted) {
    row.verdict = "Aborted";
  } else {
    try {
      const ConvergenceReport rep =
          convergence_detector(result.records, kSummaryWindow, kSummaryUtTol, kSummaryDistTol);
      row.verdict = verdict_name(rep.verdict);
    } catch (const ValidationError&) {
      row.verdict = "Wandering";  // shorter than the detection window
    }
  }

  // Tail decay rate of the squared velocity norm; NaN when the run is too
  // short past burn-in or touches exact zero.
  try {
    std::vector<std::pair<double, double>> series;
    series.reserve(result.records.size());
    for (const DiagnosticsRecord& r : result.records)
      series.emplace_back(r.t, r.u_t_norm * r.u_t_norm);
    const double burn_in = 2.0 * t_star(grid, config.U);
    row.decay_rate = fit_decay_rate(series, burn_in).rate;
  } catch (const ValidationError&) {
  }

  if (log) {
    *log << m.name << ": " << result.records.size() << " records to t=" << result.final_t
         << ", verdict " << row.verdict;
    if (result.aborted) *log << " (" << result.abort_reason << ")";
    *log << "\n";
  }
  return row;
}

void run_simulate(const ExperimentManifest& m, std::ostream* log) {
  const SummaryRow row = run_cell(m, log);
  if (row.verdict == "Aborted")
    throw NumericalError("trajectory aborted on a non-finite state; partial records kept in '" +
                         m.output.directory + "/" + m.output.records + "'");
}

EquilibriumSet run_stationary(const ExperimentManifest& m, std::ostream* log) {
  const PlateGrid grid = manifest_grid(m);
  const SimConfig config = resolve_config(m, grid);
  const BiharmonicSolver solver(grid);
  const NewtonOptions options;

  EquilibriumSet set;
  auto attempt = [&](const ScalarField& guess, const SimConfig& cfg, const std::string& label) {
    const NewtonReport rep = newton_solve(guess, cfg, grid, solver, options);
    if (log) {
      *log << m.name << ": " << label << ": "
           << (rep.converged ? "converged" : "failed") << " after " << rep.iterations
           << " iteration(s), |r| = " << format_g17(rep.residual_norm)
           << (rep.line_search_stalled ? " (line search stalled)" : "") << "\n";
    }
    if (rep.converged) set.try_insert(Equilibrium{rep.u, rep.residual_norm, cfg});
  };

  if (m.stationary.seeds.empty()) {
    attempt(ScalarField(grid), config, "flat seed");
  } else {
    for (size_t i = 0; i < m.stationary.seeds.size(); ++i)
      attempt(build_field(grid, m.stationary.seeds[i]), config,
              "seed " + std::to_string(i));
  }

  if (!m.stationary.continuation_parameter.empty()) {
    std::vector<SimConfig> path;
    path.reserve(m.stationary.continuation_values.size());
    for (double v : m.stationary.continuation_values) {
      ExperimentManifest mv = m;
      if (m.stationary.continuation_parameter == "U")
        mv.U = v;
      else if (m.stationary.continuation_parameter == "k")
        mv.k = v;
      else if (m.stationary.continuation_parameter == "beta")
        mv.beta = v;
      else
        mv.load_scale = v;
      path.push_back(resolve_config(mv, grid));
    }
    const ScalarField seed = m.stationary.seeds.empty()
                                 ? ScalarField(grid)
                                 : build_field(grid, m.stationary.seeds.front());
    const ContinuationResult cont = continuation(path, grid, seed, options);
    if (log)
      *log << m.name << ": continuation over " << m.stationary.continuation_parameter << ": "
           << cont.set.size() << " converged, " << cont.failures << " failed\n";
    for (const Equilibrium& e : cont.set.members()) set.try_insert(e);
  }

  if (set.empty()) throw NumericalError("no stationary solve converged; catalog not written");

  const std::string echo = serialize_manifest(m);
  std::ostringstream os;
  write_catalog_json(os, set, grid, echo);
  write_text_file(m.output.directory + "/" + m.output.catalog, os.str());
  if (log)
    *log << m.name << ": catalog with " << set.size() << " distinct equilibria written\n";
  return set;
}

void run_sweep(const ExperimentManifest& m, std::ostream* log, int jobs) {
  const std::vector<ExperimentManifest> cells = expand_sweep(m);
  std::vector<SummaryRow> rows(cells.size());
  std::vector<std::string> cell_logs(cells.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> trouble{false};

  int workers = jobs > 0 ? jobs : std::min<int>(default_worker_count(), static_cast<int>(cells.size()));
  workers = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));

  auto worker = [&]() {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      std::ostringstream cl;
      try {
        rows[idx] = run_cell(cells[idx], &cl);
      } catch (const std::exception& e) {
        SummaryRow row;
        row.cell = cells[idx].name;
        row.U = cells[idx].U;
        row.k = cells[idx].k;
        row.beta = cells[idx].beta;
        row.load_scale = cells[idx].load_scale;
        row.verdict = "Aborted";
        row.final_dist = std::numeric_limits<double>::quiet_NaN();
        row.decay_rate = std::numeric_limits<double>::quiet_NaN();
        rows[idx] = std::move(row);
        cl << cells[idx].name << ": aborted: " << e.what() << "\n";
      }
      if (rows[idx].verdict == "Aborted") trouble = true;
      cell_logs[idx] = cl.str();
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  // Single join point: merge the summary and the logs in cell order.
  const std::string echo = serialize_manifest(m);
  std::ostringstream os;
  write_summary_csv(os, rows, echo);
  write_text_file(m.output.directory + "/" + m.output.summary, os.str());
  if (log) {
    for (const std::string& cl : cell_logs) *log << cl;
    *log << m.name << ": sweep of " << cells.size() << " cell(s) summarized\n";
  }
  if (trouble)
    throw NumericalError("sweep finished with aborted cells; see '" + m.output.directory + "/" +
                         m.output.summary + "'");
}

}  // namespace panelflow
