#include "amctl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "amctl/csv.hpp"
#include "amctl/hash.hpp"

namespace amctl {

void SweepConfig::validate() const {
  if (mu_list.empty()) throw StructuralError("sweep: mu list is empty");
  for (std::size_t i = 0; i < mu_list.size(); ++i) {
    if (!(mu_list[i] > 0.0) || (i > 0 && !(mu_list[i] < mu_list[i - 1]))) {
      throw StructuralError("sweep: mu list must be positive and strictly decreasing");
    }
  }
  if (paths < 1) throw StructuralError("sweep: paths must be >= 1");
  if (target.mean.size() != model.dim() || target.noise_loading.size() != model.dim()) {
    throw StructuralError("sweep: target dimension differs from model dimension");
  }
  solve.validate(model.horizon());
}

bool SweepReport::error_decays() const {
  if (rows.size() < 2) return false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].mean_err < rows[i - 1].mean_err)) return false;
  }
  return rows.back().mean_err <= 0.1 * rows.front().mean_err;
}

bool SweepReport::control_bound_holds() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& row) {
    return row.mean_max_u2 <= row.Ku + 3.0 * row.stderr_max_u2;
  });
}

bool SweepReport::accepted() const {
  if (!linear_ac_passed || !control_bound_holds() || rows.empty()) return false;
  const bool trivial = std::all_of(rows.begin(), rows.end(),
                                   [](const SweepRow& row) { return row.mean_err <= 1e-20; });
  return trivial || error_decays();
}

bool GammaStudyReport::distances_nonincreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].mean_distance <= rows[i - 1].mean_distance)) return false;
  }
  return !rows.empty();
}

SpectralField realize_target(const SteeringTarget& target, const QWienerPath& path) {
  return target.mean + martingale_term(target, path);
}

std::string model_hash(const SpectralModel& model) {
  std::ostringstream s;
  s.precision(17);
  s << "N=" << model.dim() << ";c=" << model.horizon() << ";a=";
  for (double a : model.eigenvalues()) s << a << ',';
  s << ";kernel=" << static_cast<int>(model.kernel().family()) << ','
    << model.kernel().amplitude() << ',' << model.kernel().decay();
  s << ";control=" << static_cast<int>(model.control().kind()) << ";lambda=";
  for (double l : model.noise().mode_variances()) s << l << ',';
  s << ";f=" << model.nonlinearity().f.descriptor() << ";g=" << model.nonlinearity().g.descriptor()
    << ";zeta=" << model.nonlinearity().zeta.descriptor();
  return hex64(fnv1a64(s.str()));
}

namespace {

struct PathOutcome {
  bool ok = false;
  double err = 0.0;
  double mean_u2 = 0.0;
  double max_u2 = 0.0;
  double sup_x2 = 0.0;
};

struct Moments {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_mean = std::sqrt(ss / (xs.size() - 1) / xs.size());
  }
  return out;
}

// Runs body(p) for p in [0, count); body must only write slot p of its output.
template <typename Body>
void for_each_path(int count, Execution exec, Body&& body) {
  if (exec == Execution::serial) {
    for (int p = 0; p < count; ++p) body(p);
    return;
  }
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < count; ++p) body(p);
}

struct PreparedSweep {
  SpectralModel model;
  SteeringTarget target;
  int paths;
};

PreparedSweep prepare(const SweepConfig& config) {
  if (config.mode == SweepMode::stochastic) return {config.model, config.target, config.paths};
  NonlinearitySpec nl = config.model.nonlinearity();
  nl.g = ScalarMap::zero();
  return {config.model.with_nonlinearity(std::move(nl)),
          SteeringTarget::deterministic(config.target.mean), 1};
}

QWienerPath path_for(const SweepConfig& config, const SpectralModel& model, const TimeGrid& grid,
                     int p) {
  if (config.mode == SweepMode::deterministic) return zero_path(model.dim(), grid);
  return sample_path(model.noise(), grid, config.seed, static_cast<std::uint64_t>(p));
}

double time_average(const TimeGrid& grid, const FieldHistory& values) {
  const Eigen::RowVectorXd sq = values.colwise().squaredNorm();
  double integral = 0.0;
  for (int j = 0; j <= grid.steps(); ++j) integral += grid.trapezoid_weight(j, grid.steps()) * sq(j);
  return integral / grid.horizon();
}

}  // namespace

SweepReport run_sweep(const SweepConfig& config, Execution exec) {
  config.validate();
  const PreparedSweep prepared = prepare(config);
  const SpectralModel& model = prepared.model;
  const TimeGrid grid(model.horizon(), config.steps);
  const ResolventTable table = build_table(model, grid, exec);
  const Gramian gramian = assemble_gramian(table, model.control());

  SweepReport report;
  report.seed = config.seed;
  report.steps = config.steps;
  report.paths = prepared.paths;
  report.model_hash = model_hash(model);
  {
    std::vector<SpectralField> probes;
    for (int n = 0; n < model.dim(); ++n) probes.push_back(SpectralField::Unit(model.dim(), n));
    report.linear_ac_passed =
        linear_ac_test(gramian, config.ac_mu_list, probes).passed();
  }

  for (double mu : config.mu_list) {
    const Controller controller(table, model.control(), gramian, {prepared.target, mu});
    std::vector<PathOutcome> outcomes(prepared.paths);
    for_each_path(prepared.paths, exec, [&](int p) {
      const QWienerPath path = path_for(config, model, grid, p);
      PathOutcome& out = outcomes[p];
      try {
        const SolveResult res = picard_solve(model, table, &controller, path, config.solve);
        out.err = (res.trajectory.terminal() - realize_target(prepared.target, path)).squaredNorm();
        out.mean_u2 = time_average(grid, res.control);
        out.max_u2 = res.control.colwise().squaredNorm().maxCoeff();
        out.sup_x2 = res.trajectory.states.colwise().squaredNorm().maxCoeff();
        out.ok = true;
      } catch (const NumericalError&) {
        out.ok = false;
      }
    });

    SweepRow row;
    row.mu = mu;
    std::vector<double> err, u2, max_u2;
    for (const PathOutcome& o : outcomes) {
      if (!o.ok) {
        ++row.failures;
        continue;
      }
      err.push_back(o.err);
      u2.push_back(o.mean_u2);
      max_u2.push_back(o.max_u2);
      row.radius = std::max(row.radius, o.sup_x2);
    }
    if (err.empty()) {
      std::ostringstream msg;
      msg << "sweep: every path failed at mu = " << mu;
      throw NumericalError(msg.str());
    }
    const Moments e = moments(err);
    const Moments mu2 = moments(max_u2);
    row.mean_err = e.mean;
    row.stderr_err = e.stderr_mean;
    row.mean_u2 = moments(u2).mean;
    row.mean_max_u2 = mu2.mean;
    row.stderr_max_u2 = mu2.stderr_mean;
    // The ball B_r must contain every realized trajectory; r > 0 for eval_Ku.
    const double r = std::max(row.radius, std::numeric_limits<double>::min());
    row.Ku = eval_Ku({prepared.target, mu}, model, config.envelope, r, table.bound_M());
    report.rows.push_back(row);
  }
  return report;
}

GammaStudyReport run_gamma_study(const GammaStudyConfig& config, Execution exec) {
  config.base.validate();
  if (config.base.mu_list.size() != 1) {
    throw StructuralError("gamma study: exactly one mu value required");
  }
  const PreparedSweep prepared = prepare(config.base);
  const SpectralModel& model = prepared.model;
  const TimeGrid grid(model.horizon(), config.base.steps);
  const ResolventTable table = build_table(model, grid, exec);
  const Gramian gramian = assemble_gramian(table, model.control());
  const Controller controller(table, model.control(), gramian,
                              {prepared.target, config.base.mu_list.front()});

  std::vector<GammaSequenceResult> results(prepared.paths);
  for_each_path(prepared.paths, exec, [&](int p) {
    const QWienerPath path = path_for(config.base, model, grid, p);
    results[p] = gamma_sequence_solve(model, table, &controller, path, config.gamma_list,
                                      config.base.solve);
  });

  GammaStudyReport report;
  report.seed = config.base.seed;
  report.model_hash = model_hash(model);
  for (std::size_t n = 0; n < config.gamma_list.size(); ++n) {
    GammaRow row;
    row.gamma = config.gamma_list[n];
    row.snapped_gamma = grid.node(grid.nearest_node(row.gamma));
    std::vector<double> distances;
    for (const GammaSequenceResult& r : results) {
      const double d = r.distance_to_unfrozen[n];
      if (std::isnan(d)) {
        ++row.failures;
      } else {
        distances.push_back(d);
      }
    }
    const Moments m = moments(distances);
    row.mean_distance = distances.empty() ? std::numeric_limits<double>::quiet_NaN() : m.mean;
    row.stderr_distance = m.stderr_mean;
    report.rows.push_back(row);
  }
  return report;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  CsvWriter csv(out);
  csv.row("mu", "mean_err", "stderr", "mean_u2", "failures");
  for (const SweepRow& r : report.rows) csv.row(r.mu, r.mean_err, r.stderr_err, r.mean_u2, r.failures);
}

void write_sweep_bounds_csv(std::ostream& out, const SweepReport& report) {
  CsvWriter csv(out);
  csv.row("mu", "mean_max_u2", "stderr_max_u2", "Ku", "radius");
  for (const SweepRow& r : report.rows) {
    csv.row(r.mu, r.mean_max_u2, r.stderr_max_u2, r.Ku, r.radius);
  }
}

void write_gamma_csv(std::ostream& out, const GammaStudyReport& report) {
  CsvWriter csv(out);
  csv.row("gamma", "snapped_gamma", "mean_distance", "stderr", "failures");
  for (const GammaRow& r : report.rows) {
    csv.row(r.gamma, r.snapped_gamma, r.mean_distance, r.stderr_distance, r.failures);
  }
}

void write_sweep_svg(std::ostream& out, const SweepReport& report) {
  constexpr double width = 480, height = 320, pad = 48;
  std::vector<std::pair<double, double>> pts;
  for (const SweepRow& r : report.rows) {
    if (r.mu > 0.0 && r.mean_err > 0.0) pts.emplace_back(std::log10(r.mu), std::log10(r.mean_err));
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">log10 mu</text>\n";
  out << "<text x=\"12\" y=\"" << height / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 12 " << height / 2
      << ")\" text-anchor=\"middle\">log10 mean terminal error</text>\n";
  if (!pts.empty()) {
    auto [xmin, xmax] = std::minmax_element(pts.begin(), pts.end());
    double x0 = xmin->first, x1 = xmax->first;
    double y0 = pts[0].second, y1 = pts[0].second;
    for (const auto& p : pts) {
      y0 = std::min(y0, p.second);
      y1 = std::max(y1, p.second);
    }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;
    auto sx = [&](double x) { return pad + (x - x0) / (x1 - x0) * (width - 2 * pad); };
    auto sy = [&](double y) { return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad); };
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : pts) out << CsvWriter::format(sx(p.first)) << ' ' << CsvWriter::format(sy(p.second)) << ' ';
    out << "\"/>\n";
    for (const auto& p : pts) {
      out << "<circle cx=\"" << CsvWriter::format(sx(p.first)) << "\" cy=\""
          << CsvWriter::format(sy(p.second)) << "\" r=\"3\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace amctl
