#pragma once

#include "imvar/io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace imvar {

enum class Command { contour, fit, calibrate, hypothesis, marginal, choquet };

std::string_view to_string(Command command);
Command command_from_string(std::string_view name);

/// A model id plus whatever the contour constructions need beyond a Model:
/// the risk for the quantile IM, the profile spec for the gamma mean, the
/// censoring distribution for simulating censored data.
struct Problem {
  std::string id;
  ModelPtr model;  // null for the nonparametric quantile problem
  std::optional<RiskSpec> risk;
  double tau = 0.5;
  std::optional<ProfileSpec> profile;
  LogNormalParametrization lognormal = LogNormalParametrization::mean_variance;
  Index categories = 0;
};

/// Parses {"id": ..., model options}. Regression models take their design
/// from a "design" block ({"n", "p", "seed"}) or else from `covariates`
/// (with an intercept column unless "intercept" is false).
Problem make_problem(const Json& model, const Matrix& covariates = {});

/// Contour construction for a method. Throws a configuration error when the
/// method does not apply to the problem.
ContourBuilder make_builder(const Problem& problem, Method method, int M, const SAConfig& sa);

/// Hypothesis from {"box": {"lo", "hi"}}, {"half_space": {"a", "b"}},
/// {"finite_set": [[...]]}, {"whole": true} or {"union": [...]}. Null box
/// bounds are infinite.
Hypothesis parse_hypothesis(const Json& spec, Index dimension);

struct OutputPaths {
  std::optional<std::filesystem::path> csv, json, trace, family, report;
};

struct RunConfig {
  Command command = Command::contour;
  Json model;
  Json data;
  Method method = Method::naive;
  SAConfig sa;
  int M = 500;
  std::vector<AxisSpec> grid;
  Json hypotheses = Json::array();
  Json feature;
  Json loss;
  int levels = 200;
  Json calibration;
  SearchBudget budget;
  OutputPaths output;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool verbose = false;
  std::uint64_t config_hash = 0;

  OutputHeader header() const { return {config_hash, seed}; }
};

/// Validates and fills defaults. `seed_override` replaces the "seed" field;
/// a config without a seed and without an override is rejected.
RunConfig parse_run_config(const Json& document, std::optional<std::uint64_t> seed_override = std::nullopt,
                           unsigned workers = 1, bool verbose = false);

RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt,
                          unsigned workers = 1, bool verbose = false);

struct LoadedProblem {
  Problem problem;
  Dataset data;
};

/// Builds the problem and loads or simulates the dataset named by the
/// config's data block. Simulated data use stream_seed(seed, {0xda7a})
/// unless the block carries its own seed.
LoadedProblem load_problem(const RunConfig& config);

}  // namespace imvar
