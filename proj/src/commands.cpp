#include "imvar/cli.hpp"
#include "imvar/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace imvar {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::config, what); }

Vector json_vector(const Json& a, const char* what) {
  if (!a.is_array()) bad(std::string(what) + " must be an array of numbers");
  Vector v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Index>(i)) = a[i].get<double>();
  return v;
}

BuiltContour build(const RunConfig& c, const LoadedProblem& loaded) {
  const ContourBuilder builder = make_builder(loaded.problem, c.method, c.M, c.sa);
  return builder(loaded.data, c.seed);
}

void require_grid(const RunConfig& c, Index dimension) {
  if (c.grid.empty()) bad("'grid' is required for this command");
  if (static_cast<Index>(c.grid.size()) != dimension)
    bad("grid has " + std::to_string(c.grid.size()) + " axes but the contour has dimension " +
        std::to_string(dimension));
}

void add_grid_outputs(OutputSet& out, const RunConfig& c, const ContourGrid& grid) {
  if (!c.output.csv && !c.output.json) bad("set output.csv or output.json");
  if (c.output.csv) out.add(*c.output.csv, grid_csv(grid, c.header()));
  if (c.output.json) out.add(*c.output.json, grid_json(grid, c.header()));
}

int cmd_contour(const RunConfig& c, std::ostream& os) {
  const LoadedProblem loaded = load_problem(c);
  const BuiltContour built = build(c, loaded);
  require_grid(c, built.contour.dimension());
  const ContourGrid grid = grid_eval(built.contour, c.grid, c.workers, c.seed);
  OutputSet out;
  add_grid_outputs(out, c, grid);
  out.commit();
  os << "contour " << to_string(built.contour.kind()) << ": " << grid.size() << " nodes\n";
  return kExitOk;
}

int cmd_fit(const RunConfig& c, std::ostream& os) {
  const LoadedProblem loaded = load_problem(c);
  const BuiltContour built = build(c, loaded);
  if (!built.scalar && !built.vector && !built.dirichlet)
    bad("method '" + std::string(to_string(c.method)) + "' does not fit a family");
  OutputSet out;
  if (c.output.family) out.add(*c.output.family, family_json(built, c.sa.alpha, c.header()));
  if (c.output.json) out.add(*c.output.json, family_json(built, c.sa.alpha, c.header()));
  if (c.output.trace) out.add(*c.output.trace, trace_csv(built.trace, c.header()));
  out.commit();
  os << "xi_hat =";
  for (Index i = 0; i < built.xi.size(); ++i) os << ' ' << format_double(built.xi(i));
  os << "\ntermination = " << to_string(built.trace.reason) << " after " << built.trace.iterations()
     << " iterations\n";
  return kExitOk;
}

Scenario make_scenario(const RunConfig& c, const Problem& problem) {
  const Json& cal = c.calibration;
  if (!cal.is_object()) bad("'calibration' block is required");
  const Problem generator = cal.contains("generator") ? make_problem(cal["generator"]) : problem;
  if (!generator.model) bad("calibration needs a generating model (calibration.generator)");
  Scenario s;
  s.name = cal.value("name", std::string(to_string(c.method)));
  const Vector truth = json_vector(cal.at("truth"), "calibration truth");
  s.generator = model_generator(generator.model, truth, cal.at("n").get<Index>());
  SAConfig inner = c.sa;
  inner.workers = 1;
  inner.log_progress = false;
  s.builder = make_builder(problem, c.method, c.M, inner);
  s.truth = cal.contains("contour_truth") ? json_vector(cal["contour_truth"], "contour_truth") : truth;
  s.replications = cal.value("replications", 100);
  if (cal.contains("alpha_levels")) s.alpha_levels = cal["alpha_levels"].get<std::vector<double>>();
  s.seed = c.seed;
  s.workers = c.workers;
  return s;
}

int cmd_calibrate(const RunConfig& c, std::ostream& os) {
  const Problem problem = make_problem(c.model);
  const CalibrationReport report = validity_study(make_scenario(c, problem));
  OutputSet out;
  if (!c.output.report && !c.output.json && !c.output.csv) bad("set output.report, output.json or output.csv");
  if (c.output.report) out.add(*c.output.report, report_json(report, c.header()));
  if (c.output.json) out.add(*c.output.json, report_json(report, c.header()));
  if (c.output.csv) out.add(*c.output.csv, report_csv(report, c.header()));
  out.commit();
  os << "replications " << report.replications << ", failures " << report.failures << "\n";
  for (std::size_t i = 0; i < report.alpha_levels.size(); ++i)
    os << "  CDF(" << format_double(report.alpha_levels[i]) << ") = " << format_double(report.cdf[i]) << "\n";
  return kExitOk;
}

std::vector<Hypothesis> hypotheses(const RunConfig& c, Index d) {
  if (!c.hypotheses.is_array() || c.hypotheses.empty()) bad("'hypotheses' must be a nonempty array");
  std::vector<Hypothesis> hs;
  for (const auto& h : c.hypotheses) hs.push_back(parse_hypothesis(h, d));
  return hs;
}

int cmd_hypothesis(const RunConfig& c, std::ostream& os) {
  OutputSet out;
  Json doc{{"header", c.header().json()}};
  if (c.calibration.is_object()) {
    const Problem problem = make_problem(c.model);
    const Scenario s = make_scenario(c, problem);
    const auto hs = hypotheses(c, s.truth.size());
    const HypothesisReport report = hypothesis_calibration(s, hs, c.budget);
    Json curves = Json::array();
    for (std::size_t k = 0; k < hs.size(); ++k) {
      curves.push_back({{"hypothesis", c.hypotheses[k]}, {"upper", report.curves[k].upper}, {"cdf", report.curves[k].cdf}});
      os << "H" << k + 1 << ":";
      for (double v : report.curves[k].cdf) os << ' ' << format_double(v);
      os << "\n";
    }
    doc["alpha_levels"] = report.alpha_levels;
    doc["failures"] = report.failures;
    doc["curves"] = curves;
  } else {
    const LoadedProblem loaded = load_problem(c);
    const BuiltContour built = build(c, loaded);
    const auto hs = hypotheses(c, built.contour.dimension());
    Json results = Json::array();
    for (std::size_t k = 0; k < hs.size(); ++k) {
      const UpperProbability up = upper_probability(built.contour, hs[k], c.budget);
      const double low = lower_probability(built.contour, hs[k], c.budget);
      results.push_back({{"hypothesis", c.hypotheses[k]},
                         {"upper", up.value},
                         {"lower", low},
                         {"exact", up.exact},
                         {"evaluations", up.evaluations},
                         {"budget", {{"candidates", c.budget.candidates}, {"refinement_steps", c.budget.refinement_steps}}}});
      os << "H" << k + 1 << ": upper " << format_double(up.value) << ", lower " << format_double(low) << "\n";
    }
    doc["results"] = results;
  }
  const auto path = c.output.json ? c.output.json : c.output.report;
  if (!path) bad("set output.json");
  out.add(*path, doc);
  out.commit();
  return kExitOk;
}

Feature parse_feature(const Json& f, Index d) {
  if (!f.is_object()) bad("'feature' block is required");
  if (f.contains("coordinate")) {
    const auto i = f["coordinate"].get<Index>();
    if (i < 0 || i >= d) bad("feature coordinate out of range");
    return Feature::coordinate(d, i);
  }
  if (f.contains("matrix")) {
    const Json& rows = f["matrix"];
    if (!rows.is_array() || rows.empty()) bad("feature matrix must be a nonempty array of rows");
    Matrix a(static_cast<Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Vector r = json_vector(rows[i], "feature matrix row");
      if (r.size() != d) bad("feature matrix rows must match the parameter dimension");
      a.row(static_cast<Index>(i)) = r.transpose();
    }
    Vector b = f.contains("shift") ? json_vector(f["shift"], "feature shift") : Vector::Zero(a.rows());
    if (b.size() != a.rows()) bad("feature shift must match the number of matrix rows");
    return Feature::linear(a, b);
  }
  bad("feature needs 'coordinate' or 'matrix'");
}

int cmd_marginal(const RunConfig& c, std::ostream& os) {
  const LoadedProblem loaded = load_problem(c);
  const BuiltContour built = build(c, loaded);
  const Feature g = parse_feature(c.feature, built.contour.dimension());
  if (static_cast<Index>(c.grid.size()) != g.output_dimension) bad("grid axes must match the feature dimension");
  const ContourGrid grid = marginal_contour(built.contour, g, c.grid, c.budget);
  OutputSet out;
  add_grid_outputs(out, c, grid);
  out.commit();
  os << "marginal: " << grid.size() << " nodes\n";
  return kExitOk;
}

ChoquetSpec parse_loss(const RunConfig& c, Index d) {
  const Json& l = c.loss;
  if (!l.is_object() || l.size() != 1) bad("'loss' must name exactly one loss");
  ChoquetSpec spec;
  spec.levels = c.levels;
  spec.budget = c.budget;
  const std::string kind = l.begin().key();
  const Json& body = l.begin().value();
  if (kind == "constant") {
    const double k = body.get<double>();
    spec.loss = [k](const Vector&) { return k; };
  } else if (kind == "linear") {
    const Vector a = json_vector(body.at("a"), "linear loss a");
    if (a.size() != d) bad("linear loss must match the parameter dimension");
    const double b = body.value("b", 0.0);
    spec.loss = [a, b](const Vector& t) { return a.dot(t) + b; };
  } else if (kind == "quadratic") {
    const Vector center = json_vector(body.at("center"), "quadratic loss center");
    if (center.size() != d) bad("quadratic loss center must match the parameter dimension");
    spec.loss = [center](const Vector& t) { return (t - center).squaredNorm(); };
  } else if (kind == "indicator") {
    spec.indicator = parse_hypothesis(body, d);
  } else {
    bad("unknown loss '" + kind + "'");
  }
  return spec;
}

int cmd_choquet(const RunConfig& c, std::ostream& os) {
  const LoadedProblem loaded = load_problem(c);
  const BuiltContour built = build(c, loaded);
  const ChoquetResult r = choquet_upper_expectation(built.contour, parse_loss(c, built.contour.dimension()));
  Json doc{{"header", c.header().json()}, {"value", r.value}, {"levels", r.levels}, {"evaluations", r.evaluations}};
  const auto path = c.output.json ? c.output.json : c.output.report;
  if (!path) bad("set output.json");
  OutputSet out;
  out.add(*path, doc);
  out.commit();
  os << "upper expectation = " << format_double(r.value) << "\n";
  return kExitOk;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::contour: return cmd_contour(config, out);
      case Command::fit: return cmd_fit(config, out);
      case Command::calibrate: return cmd_calibrate(config, out);
      case Command::hypothesis: return cmd_hypothesis(config, out);
      case Command::marginal: return cmd_marginal(config, out);
      case Command::choquet: return cmd_choquet(config, out);
    }
    return kExitConfig;
  } catch (const Error& e) {
    err << "imvar: " << e.what() << "\n";
    return e.code() == ErrorCode::config ? kExitConfig : kExitNumerical;
  } catch (const Json::exception& e) {
    err << "imvar: config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "imvar: numerical: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Possibilistic inferential-model contours and their variational approximations"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = default_workers();
  bool verbose = false;
  app.add_option("command", command, "contour | fit | calibrate | hypothesis | marginal | choquet (overrides the config)");
  app.add_option("-c,--config", config_path, "run config (JSON)")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--threads", threads, "worker threads (default: all cores)")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", verbose, "log stochastic-approximation progress to standard error");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  try {
    RunConfig config = load_run_config(config_path, seed, threads, verbose);
    if (!command.empty()) config.command = command_from_string(command);
    return run_command(config, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "imvar: " << e.what() << "\n";
    return e.code() == ErrorCode::config ? kExitConfig : kExitNumerical;
  }
}

}  // namespace imvar
