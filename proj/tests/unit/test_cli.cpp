#include <doctest.h>

#include "imvar/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace imvar;
namespace fs = std::filesystem;

namespace {

fs::path dir() {
  const fs::path d = fs::temp_directory_path() / "imvar_test_cli";
  fs::create_directories(d);
  return d;
}

std::string out(const std::string& name) { return (dir() / name).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const Json& doc, unsigned workers = 2) {
  std::ostringstream o, e;
  try {
    return run_command(parse_run_config(doc, std::nullopt, workers), o, e);
  } catch (const Error& err) {
    return err.code() == ErrorCode::config ? kExitConfig : kExitNumerical;
  }
}

int run_binary(const Json& doc, const std::string& extra = "") {
  const fs::path cfg = dir() / "run.json";
  std::ofstream(cfg) << doc.dump();
  const std::string cmd = std::string(IMVAR_CLI_PATH) + " --config " + cfg.string() + " " + extra + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

Json binomial(const std::string& command) {
  return Json{{"command", command},
              {"model", {{"id", "bernoulli"}}},
              {"data", {{"counts", {{"trials", 15}, {"successes", 6}}}}},
              {"method", "exact"},
              {"seed", 11}};
}

std::size_t data_rows(const std::string& csv) {
  std::size_t rows = 0;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  return rows - 1;  // header row
}

}  // namespace

TEST_CASE("contour command writes one row per node") {
  Json c = binomial("contour");
  c["grid"] = Json::array({{{"lo", 0}, {"hi", 1}, {"count", 200}}});
  c["output"] = {{"csv", out("binom.csv")}};
  CHECK(run(c) == kExitOk);
  const std::string csv = slurp(out("binom.csv"));
  CHECK(data_rows(csv) == 200);
  CHECK(csv.rfind("# imvar config_hash=", 0) == 0);
  CHECK(csv.find("seed=11") != std::string::npos);
}

TEST_CASE("contour command matches the library byte for byte") {
  Json c{{"command", "contour"},
         {"model", {{"id", "bivariate-normal"}}},
         {"data", {{"simulate", {{"truth", {0.5}}, {"n", 50}, {"seed", 3}}}}},
         {"method", "naive"},
         {"M", 500},
         {"grid", Json::array({{{"lo", -0.5}, {"hi", 0.95}, {"count", 12}}})},
         {"output", {{"csv", out("bvn.csv")}}},
         {"seed", 21}};
  REQUIRE(run(c, 3) == kExitOk);
  auto model = std::make_shared<BivariateNormalCorrelation>();
  Rng rng = make_rng(3);
  const Dataset d = model->simulate(Vector::Constant(1, 0.5), 50, rng);
  const ContourGrid g = grid_eval(make_mc_contour(model, d, 500, 21), {{-0.5, 0.95, 12}}, 1, 21);
  const RunConfig parsed = parse_run_config(c);
  CHECK(slurp(out("bvn.csv")) == grid_csv(g, parsed.header()));
}

TEST_CASE("missing data file is a config error with no outputs") {
  Json c{{"command", "contour"},
         {"model", {{"id", "lognormal"}}},
         {"data", {{"csv", {{"path", out("does_not_exist.csv")}, {"response", "y"}}}}},
         {"grid", Json::array({{{"lo", 0}, {"hi", 1}, {"count", 3}}, {{"lo", 0.1}, {"hi", 1}, {"count", 3}}})},
         {"output", {{"csv", out("never.csv")}, {"json", out("never.json")}}},
         {"seed", 1}};
  fs::remove(out("never.csv"));
  fs::remove(out("never.json"));
  CHECK(run_binary(c) == kExitConfig);
  CHECK_FALSE(fs::exists(out("never.csv")));
  CHECK_FALSE(fs::exists(out("never.json")));
}

TEST_CASE("fit command is deterministic") {
  Json c = binomial("fit");
  c["method"] = "variational-scalar";
  c["sa"] = {{"alpha", 0.1}};
  // Same output paths both times, since they feed the config hash.
  c["output"] = {{"family", out("fam.json")}, {"trace", out("trace.csv")}};
  REQUIRE(run_binary(c, "--threads 1") == kExitOk);
  const std::string fam1 = slurp(out("fam.json")), trace1 = slurp(out("trace.csv"));
  REQUIRE(run_binary(c, "--threads 4") == kExitOk);
  CHECK(fam1 == slurp(out("fam.json")));
  CHECK(trace1 == slurp(out("trace.csv")));
  const Json fam = Json::parse(fam1);
  CHECK(fam["family"] == "gaussian-scalar");
  CHECK(fam["alpha"] == 0.1);
}

TEST_CASE("gamma vector fit exports eigen data") {
  Json c{{"command", "fit"},
         {"model", {{"id", "gamma"}, {"parametrization", "log-shape-scale"}}},
         {"data", {{"simulate", {{"truth", {1.9459101, 1.0986123}}, {"n", 25}}}}},
         {"method", "variational-vector"},
         {"M", 200},
         {"output", {{"family", out("gamma.json")}}},
         {"seed", 4}};
  REQUIRE(run(c) == kExitOk);
  const Json fam = Json::parse(slurp(out("gamma.json")));
  CHECK(fam["family"] == "gaussian-vector");
  CHECK(fam["dimension"] == 2);
  CHECK(fam["eigenvalues"].size() == 2);
  CHECK(fam["eigenvectors"].size() == 4);
  CHECK(fam["information"].size() == 4);
  CHECK(fam["xi"].size() == 2);
}

TEST_CASE("bad alpha and unknown keys are config errors") {
  Json c = binomial("fit");
  c["method"] = "variational-scalar";
  c["sa"] = {{"alpha", 1.5}};
  c["output"] = {{"family", out("x.json")}};
  CHECK(run_binary(c) == kExitConfig);
  Json m = binomial("contour");
  m["model"]["id"] = "nope";
  CHECK(run(m) == kExitConfig);
  Json noseed = binomial("contour");
  noseed.erase("seed");
  CHECK(run(noseed) == kExitConfig);
}

TEST_CASE("degenerate mle is a numerical failure") {
  Json c = binomial("fit");
  c["data"] = {{"counts", {{"trials", 15}, {"successes", 0}}}};
  c["method"] = "variational-scalar";
  c["output"] = {{"family", out("degenerate.json")}};
  CHECK(run_binary(c) == kExitNumerical);
}

TEST_CASE("calibrate reports every replication") {
  Json c = binomial("calibrate");
  c.erase("data");
  c["calibration"] = {{"truth", {0.4}}, {"n", 15}, {"replications", 100}};
  c["output"] = {{"report", out("cal.json")}, {"csv", out("cal.csv")}};
  REQUIRE(run(c) == kExitOk);
  const Json r = Json::parse(slurp(out("cal.json")));
  CHECK(r["values"].size() == 100);
  CHECK(r["header"]["seed"] == 11);
  CHECK(data_rows(slurp(out("cal.csv"))) == 4);
}

TEST_CASE("hypothesis, marginal and choquet commands") {
  Json h{{"command", "hypothesis"},
         {"model", {{"id", "gamma"}}},
         {"data", {{"simulate", {{"truth", {7.0, 3.0}}, {"n", 25}}}}},
         {"method", "variational-vector"},
         {"M", 200},
         {"hypotheses", Json::array({{{"half_space", {{"a", {1.0, 0.0}}, {"b", 7.0}}}},
                                     {{"box", {{"lo", {nullptr, 2.0}}, {"hi", {nullptr, 4.0}}}}}})},
         {"output", {{"json", out("hyp.json")}}},
         {"seed", 2}};
  REQUIRE(run(h) == kExitOk);
  const Json r = Json::parse(slurp(out("hyp.json")));
  for (const auto& res : r["results"]) {
    CHECK(res["upper"].get<double>() >= 0.0);
    CHECK(res["upper"].get<double>() <= 1.0);
    CHECK(res["lower"].get<double>() <= res["upper"].get<double>());
  }

  Json mg = h;
  mg["command"] = "marginal";
  mg["feature"] = {{"coordinate", 1}};
  mg["grid"] = Json::array({{{"lo", 1}, {"hi", 6}, {"count", 20}}});
  mg["output"] = {{"csv", out("marg.csv")}};
  REQUIRE(run(mg) == kExitOk);
  CHECK(data_rows(slurp(out("marg.csv"))) == 20);

  Json ch = binomial("choquet");
  ch["loss"] = {{"constant", 3.25}};
  ch["output"] = {{"json", out("choq.json")}};
  REQUIRE(run(ch) == kExitOk);
  CHECK(Json::parse(slurp(out("choq.json")))["value"].get<double>() == doctest::Approx(3.25).epsilon(1e-6));
}

TEST_CASE("seed override changes the header") {
  Json c = binomial("contour");
  c["grid"] = Json::array({{{"lo", 0}, {"hi", 1}, {"count", 5}}});
  c["output"] = {{"csv", out("seeded.csv")}};
  REQUIRE(run_binary(c, "--seed 99") == kExitOk);
  CHECK(slurp(out("seeded.csv")).find("seed=99") != std::string::npos);
}
