#include <doctest.h>

#include "imvar/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace imvar;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "imvar_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("csv ingestion with covariates and censoring") {
  const fs::path p = scratch("data.csv");
  std::ofstream(p) << "# comment\nz, x1 ,t\n1.5,0.1,1\n2.5,0.2,0\n\n3.0,0.3,1\n";
  const Dataset d = read_csv_dataset(p, {{"z"}, {"x1"}, "t"});
  CHECK(d.size() == 3);
  CHECK(d.y(2) == 3.0);
  CHECK(d.covariates(1, 0) == 0.2);
  CHECK(d.observed == std::vector<int>{1, 0, 1});

  CHECK_THROWS_AS(read_csv_dataset(scratch("missing.csv"), {{"z"}, {}, ""}), Error);
  CHECK_THROWS_AS(read_csv_dataset(p, {{"nope"}, {}, ""}), Error);
  std::ofstream(scratch("bad.csv")) << "z,t\n1.0,2\n";
  CHECK_THROWS_AS(read_csv_dataset(scratch("bad.csv"), {{"z"}, {}, "t"}), Error);
  std::ofstream(scratch("text.csv")) << "z\nabc\n";
  CHECK_THROWS_AS(read_csv_dataset(scratch("text.csv"), {{"z"}, {}, ""}), Error);
}

TEST_CASE("grid and trace writers") {
  ContourGrid g;
  g.axes = {{0, 1, 2}, {0, 1, 2}};
  g.values = {0.1, 0.2, 0.3, 0.4};
  g.domain_violation.assign(4, 0);
  const OutputHeader h{0xabc, 7};
  const std::string csv = grid_csv(g, h);
  CHECK(csv.rfind("# imvar config_hash=0000000000000abc seed=7\ntheta1,theta2,value\n0,0,0.1\n", 0) == 0);
  const Json j = grid_json(g, h);
  CHECK(j["values"].size() == 4);
  CHECK(j["header"]["seed"] == 7);
  CHECK_FALSE(j.contains("domain_violation"));

  FitTrace t;
  t.entries.push_back({0, Vector::Constant(1, 1.0), Vector::Constant(1, 0.05)});
  CHECK(trace_csv(t, h).find("t,xi1,objective1\n0,1,0.05\n") != std::string::npos);
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("output sets are all or nothing") {
  const fs::path a = scratch("a.txt"), b = scratch("sub_missing") / "b.txt";
  fs::remove(a);
  OutputSet out;
  out.add(a, std::string("x"));
  out.add(b, std::string("y"));
  CHECK_THROWS_AS(out.commit(), Error);
  CHECK_FALSE(fs::exists(a));
  CHECK_FALSE(fs::exists(fs::path(a) += ".tmp"));

  OutputSet ok;
  ok.add(a, std::string("hello"));
  ok.commit();
  CHECK(slurp(a) == "hello");
}

TEST_CASE("report writers") {
  CalibrationReport r;
  r.name = "x";
  r.replications = 3;
  r.values = {0.1, 0.5, 0.9};
  r.alpha_levels = {0.25, 0.5};
  r.cdf = {1.0 / 3, 2.0 / 3};
  const Json j = report_json(r, {});
  CHECK(j["values"].size() == 3);
  CHECK(report_csv(r, {}).find("alpha,cdf\n0.25,") != std::string::npos);
}
