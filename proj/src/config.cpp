#include "imvar/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace imvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::config, what); }

Vector to_vector(const Json& a, const char* what) {
  if (!a.is_array()) bad(std::string(what) + " must be an array of numbers");
  Vector v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_null()) {
      v(static_cast<Index>(i)) = std::numeric_limits<double>::quiet_NaN();
    } else {
      if (!a[i].is_number()) bad(std::string(what) + " must be an array of numbers");
      v(static_cast<Index>(i)) = a[i].get<double>();
    }
  }
  return v;
}

Matrix to_matrix(const Json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) bad(std::string(what) + " must be a nonempty array of rows");
  const auto first = rows[0].is_array() ? rows[0].size() : 1;
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(first));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector r = rows[i].is_array() ? to_vector(rows[i], what) : Vector::Constant(1, rows[i].get<double>());
    if (static_cast<std::size_t>(r.size()) != first) bad(std::string(what) + " rows differ in length");
    m.row(static_cast<Index>(i)) = r.transpose();
  }
  return m;
}

double number_or(const Json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j[key].is_number()) bad(std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

int int_or(const Json& j, const char* key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) bad(std::string("'") + key + "' must be an integer");
  return j[key].get<int>();
}

std::string string_or(const Json& j, const char* key, std::string fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j[key].is_string()) bad(std::string("'") + key + "' must be a string");
  return j[key].get<std::string>();
}

GammaParametrization gamma_parametrization(const std::string& s) {
  if (s == "shape-scale") return GammaParametrization::shape_scale;
  if (s == "log-shape-scale") return GammaParametrization::log_shape_scale;
  if (s == "shape-mean") return GammaParametrization::shape_mean;
  bad("unknown gamma parametrization '" + s + "'");
}

LogNormalParametrization lognormal_parametrization(const std::string& s) {
  if (s == "mean-variance") return LogNormalParametrization::mean_variance;
  if (s == "mean-log-variance") return LogNormalParametrization::mean_log_variance;
  bad("unknown log-normal parametrization '" + s + "'");
}

Matrix regression_design(const Json& model, const Matrix& covariates) {
  if (model.contains("design")) {
    const Json& d = model["design"];
    const int n = int_or(d, "n", 0), p = int_or(d, "p", -1);
    const auto seed = d.contains("seed") ? d["seed"].get<std::uint64_t>() : 0ULL;
    return scaled_poisson_design(n, p, seed);
  }
  if (covariates.size() == 0) bad("regression model needs a 'design' block or covariate columns");
  if (!model.value("intercept", true)) return covariates;
  Matrix x(covariates.rows(), covariates.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(covariates.cols()) = covariates;
  return x;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::contour: return "contour";
    case Command::fit: return "fit";
    case Command::calibrate: return "calibrate";
    case Command::hypothesis: return "hypothesis";
    case Command::marginal: return "marginal";
    case Command::choquet: return "choquet";
  }
  return "unknown";
}

Command command_from_string(std::string_view name) {
  for (Command c : {Command::contour, Command::fit, Command::calibrate, Command::hypothesis, Command::marginal,
                    Command::choquet})
    if (to_string(c) == name) return c;
  bad("unknown command '" + std::string(name) + "'");
}

Problem make_problem(const Json& model, const Matrix& covariates) {
  if (!model.is_object()) bad("'model' must be an object");
  Problem p;
  p.id = string_or(model, "id", "");
  if (p.id == "bernoulli") {
    p.model = std::make_shared<BernoulliModel>();
  } else if (p.id == "bivariate-normal") {
    p.model = std::make_shared<BivariateNormalCorrelation>();
  } else if (p.id == "logistic") {
    p.model = std::make_shared<LogisticRegression>(regression_design(model, covariates));
  } else if (p.id == "poisson") {
    p.model = std::make_shared<PoissonLogLinear>(regression_design(model, covariates));
  } else if (p.id == "multinomial") {
    p.categories = int_or(model, "categories", 0);
    if (p.categories < 2) bad("multinomial needs 'categories' >= 2");
    p.model = std::make_shared<Multinomial>(p.categories);
  } else if (p.id == "gamma") {
    p.model = std::make_shared<GammaModel>(gamma_parametrization(string_or(model, "parametrization", "shape-scale")));
  } else if (p.id == "normal-means") {
    const int d = int_or(model, "dimension", 0);
    if (d < 1) bad("normal-means needs 'dimension' >= 1");
    const double sigma = number_or(model, "sigma", 1.0);
    double lambda = 0.0;
    if (model.contains("lambda") && model["lambda"].is_string()) {
      if (model["lambda"] != "auto") bad("'lambda' must be a number or \"auto\"");
      lambda = std::sqrt(sigma * sigma * std::log(static_cast<double>(d)));
    } else {
      lambda = number_or(model, "lambda", 0.0);
    }
    if (!(sigma > 0.0) || lambda < 0.0) bad("normal-means needs sigma > 0 and lambda >= 0");
    p.model = std::make_shared<NormalMeans>(d, sigma, lambda);
  } else if (p.id == "lognormal") {
    p.lognormal = lognormal_parametrization(string_or(model, "parametrization", "mean-variance"));
    p.model = std::make_shared<LogNormalModel>(p.lognormal);
  } else if (p.id == "censored-lognormal") {
    p.lognormal = lognormal_parametrization(string_or(model, "parametrization", "mean-variance"));
    CensoringDistribution g;
    if (model.contains("censoring")) {
      const Json& c = model["censoring"];
      g = CensoringDistribution(c.at("support").get<std::vector<double>>(), c.at("masses").get<std::vector<double>>());
    }
    p.model = std::make_shared<LeftCensoredLogNormal>(p.lognormal, g);
  } else if (p.id == "quantile") {
    p.tau = number_or(model, "tau", 0.5);
    if (!(p.tau > 0.0 && p.tau < 1.0)) bad("quantile 'tau' must lie in (0, 1)");
    p.risk = quantile_risk(p.tau, int_or(model, "bootstrap", 500));
  } else if (p.id == "gamma-mean") {
    p.profile = gamma_mean_profile(int_or(model, "probes", 5));
    p.model = p.profile->model;
  } else {
    bad("unknown model id '" + p.id + "'");
  }
  return p;
}

ContourBuilder make_builder(const Problem& problem, Method method, int M, const SAConfig& sa) {
  auto need_model = [&] {
    if (!problem.model || problem.profile || problem.id == "censored-lognormal")
      bad("method '" + std::string(to_string(method)) + "' does not apply to model '" + problem.id + "'");
  };
  switch (method) {
    case Method::exact:
      if (problem.id != "bernoulli") bad("the exact contour is available for the bernoulli model only");
      return exact_binomial_builder();
    case Method::naive:
      need_model();
      return naive_builder(problem.model, M);
    case Method::variational_scalar:
    case Method::variational_vector:
      need_model();
      return variational_builder(problem.model, M, sa, method == Method::variational_vector);
    case Method::variational_dirichlet:
      if (problem.id != "multinomial") bad("the Dirichlet family applies to the multinomial model only");
      return dirichlet_builder(problem.categories, M, sa);
    case Method::bootstrap:
    case Method::bootstrap_variational:
      if (!problem.risk) bad("bootstrap methods need the 'quantile' model");
      if (method == Method::bootstrap) return bootstrap_builder(*problem.risk);
      return bootstrap_variational_builder(*problem.risk, problem.tau, sa);
    case Method::censored:
    case Method::censored_variational:
      if (problem.id != "censored-lognormal") bad("censored methods need the 'censored-lognormal' model");
      if (method == Method::censored) return censored_builder(problem.lognormal, M);
      return censored_variational_builder(problem.lognormal, M, sa);
    case Method::profile:
    case Method::profile_variational:
      if (!problem.profile) bad("profile methods need the 'gamma-mean' model");
      if (method == Method::profile) return profile_builder(*problem.profile, M);
      return profile_variational_builder(*problem.profile, M, sa);
  }
  bad("unsupported method");
}

Hypothesis parse_hypothesis(const Json& spec, Index dimension) {
  if (!spec.is_object() || spec.size() != 1) bad("a hypothesis is an object with exactly one key");
  const std::string key = spec.begin().key();
  const Json& body = spec.begin().value();
  if (key == "whole") return Hypothesis::whole(dimension);
  if (key == "box") {
    Vector lo = to_vector(body.at("lo"), "box lo"), hi = to_vector(body.at("hi"), "box hi");
    if (lo.size() != dimension || hi.size() != dimension) bad("box bounds must match the parameter dimension");
    for (Index i = 0; i < dimension; ++i) {
      if (std::isnan(lo(i))) lo(i) = -kInf;
      if (std::isnan(hi(i))) hi(i) = kInf;
      if (lo(i) > hi(i)) bad("box has lo > hi");
    }
    return Hypothesis::box(lo, hi);
  }
  if (key == "half_space") {
    const Vector a = to_vector(body.at("a"), "half-space a");
    if (a.size() != dimension) bad("half-space normal must match the parameter dimension");
    return Hypothesis::half_space(a, body.at("b").get<double>());
  }
  if (key == "finite_set") {
    const Matrix pts = to_matrix(body, "finite set");
    if (pts.cols() != dimension) bad("finite-set points must match the parameter dimension");
    std::vector<Vector> points;
    for (Index i = 0; i < pts.rows(); ++i) points.push_back(pts.row(i).transpose());
    return Hypothesis::finite_set(std::move(points));
  }
  if (key == "union") {
    if (!body.is_array() || body.empty()) bad("union needs a nonempty array of hypotheses");
    std::vector<Hypothesis> parts;
    for (const auto& b : body) parts.push_back(parse_hypothesis(b, dimension));
    return Hypothesis::union_of(dimension, std::move(parts));
  }
  bad("unknown hypothesis kind '" + key + "'");
}

RunConfig parse_run_config(const Json& document, std::optional<std::uint64_t> seed_override, unsigned workers,
                           bool verbose) {
  try {
    if (!document.is_object()) bad("config must be a JSON object");
    RunConfig c;
    c.command = command_from_string(string_or(document, "command", ""));
    c.model = document.value("model", Json::object());
    c.data = document.value("data", Json());
    c.method = method_from_string(string_or(document, "method", "naive"));
    c.M = int_or(document, "M", 500);
    if (c.M < 1) bad("'M' must be positive");

    const Json sa = document.value("sa", Json::object());
    c.sa.alpha = number_or(sa, "alpha", c.sa.alpha);
    c.sa.K = int_or(sa, "K", c.sa.K);
    c.sa.epsilon = number_or(sa, "epsilon", c.sa.epsilon);
    c.sa.min_iterations = int_or(sa, "min_iterations", c.sa.min_iterations);
    c.sa.max_iterations = int_or(sa, "max_iterations", c.sa.max_iterations);
    c.sa.step.scale = number_or(sa, "step_scale", c.sa.step.scale);
    c.sa.step.offset = number_or(sa, "step_offset", c.sa.step.offset);
    c.sa.M = c.M;
    c.sa.workers = workers;
    c.sa.log_progress = verbose;
    c.sa.validate();

    if (document.contains("grid")) {
      for (const auto& a : document["grid"]) {
        AxisSpec axis{a.at("lo").get<double>(), a.at("hi").get<double>(), a.at("count").get<Index>()};
        if (axis.count < 1 || !(axis.lo <= axis.hi)) bad("grid axes need lo <= hi and count >= 1");
        c.grid.push_back(axis);
      }
    }
    c.hypotheses = document.value("hypotheses", Json::array());
    c.feature = document.value("feature", Json());
    c.loss = document.value("loss", Json());
    c.levels = int_or(document, "levels", 200);
    c.calibration = document.value("calibration", Json());
    const Json budget = document.value("budget", Json::object());
    c.budget.candidates = int_or(budget, "candidates", c.budget.candidates);
    c.budget.refinement_steps = int_or(budget, "refinement_steps", c.budget.refinement_steps);
    c.budget.workers = workers;

    const Json out = document.value("output", Json::object());
    auto path = [&](const char* key) -> std::optional<std::filesystem::path> {
      if (!out.contains(key)) return std::nullopt;
      return std::filesystem::path(out[key].get<std::string>());
    };
    c.output = {path("csv"), path("json"), path("trace"), path("family"), path("report")};

    Json canonical = document;
    if (seed_override) {
      canonical["seed"] = *seed_override;
    } else if (!document.contains("seed")) {
      bad("config has no 'seed' (pass one in the config or with --seed)");
    }
    if (!canonical["seed"].is_number_unsigned() && !canonical["seed"].is_number_integer()) bad("'seed' must be an integer");
    c.seed = canonical["seed"].get<std::uint64_t>();
    c.budget.seed = stream_seed(c.seed, {0xb0d9});
    c.sa.seed = c.seed;
    c.workers = workers;
    c.verbose = verbose;
    c.config_hash = fnv1a(canonical.dump());
    return c;
  } catch (const Json::exception& e) {
    bad(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override,
                          unsigned workers, bool verbose) {
  std::ifstream in(path);
  if (!in) bad("cannot open config '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    bad("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, seed_override, workers, verbose);
}

LoadedProblem load_problem(const RunConfig& config) {
  try {
    const Json& d = config.data;
    if (!d.is_object() || d.size() != 1) bad("'data' must name exactly one source: inline, csv, counts or simulate");
    const std::string kind = d.begin().key();
    const Json& body = d.begin().value();
    if (kind == "simulate") {
      Problem problem = make_problem(config.model);
      const Problem generator = body.contains("generator") ? make_problem(body["generator"]) : problem;
      if (!generator.model) bad("simulated data need a generating model");
      const Vector truth = to_vector(body.at("truth"), "simulate truth");
      const Index n = body.at("n").get<Index>();
      if (!generator.model->in_domain(truth)) bad("simulate truth is outside the model domain");
      const std::uint64_t seed = body.contains("seed") ? body["seed"].get<std::uint64_t>() : stream_seed(config.seed, {0xda7a});
      Rng rng = make_rng(seed);
      return {std::move(problem), generator.model->simulate(truth, n, rng)};
    }
    Dataset data;
    if (kind == "inline") {
      data.response = to_matrix(body.at("response"), "inline response");
      if (body.contains("covariates")) data.covariates = to_matrix(body["covariates"], "inline covariates");
      if (body.contains("observed")) data.observed = body["observed"].get<std::vector<int>>();
    } else if (kind == "csv") {
      CsvColumns cols;
      const Json& r = body.at("response");
      cols.response = r.is_string() ? std::vector<std::string>{r.get<std::string>()} : r.get<std::vector<std::string>>();
      cols.covariates = body.value("covariates", std::vector<std::string>{});
      cols.censor = body.value("censor", std::string());
      data = read_csv_dataset(body.at("path").get<std::string>(), cols);
    } else if (kind == "counts") {
      if (body.is_array()) {
        data = Multinomial::from_counts(body.get<std::vector<Index>>());
      } else {
        const auto trials = body.at("trials").get<Index>(), successes = body.at("successes").get<Index>();
        if (trials < 1 || successes < 0 || successes > trials) bad("counts need 0 <= successes <= trials, trials >= 1");
        data = BernoulliModel::from_counts(trials, successes);
      }
    } else {
      bad("unknown data source '" + kind + "'");
    }
    data.validate();
    Problem problem = make_problem(config.model, data.covariates);
    if (const auto* m = dynamic_cast<const LogisticRegression*>(problem.model.get())) data.covariates = m->design();
    if (const auto* m = dynamic_cast<const PoissonLogLinear*>(problem.model.get())) data.covariates = m->design();
    return {std::move(problem), std::move(data)};
  } catch (const Json::exception& e) {
    bad(std::string("malformed data block: ") + e.what());
  }
}

}  // namespace imvar
