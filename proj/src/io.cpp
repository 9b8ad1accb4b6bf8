#include "imvar/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unordered_map>

namespace imvar {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  auto res = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  if (e - b >= 2 && s[b] == '"' && s[e - 1] == '"') {
    ++b;
    --e;
  }
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                        : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw Error(ErrorCode::config,
                path.string() + ":" + std::to_string(line) + ": cannot parse '" + cell + "' as a number");
  return v;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_rows_json(const Matrix& m) {
  Json a = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string OutputHeader::csv_line() const {
  return "# imvar config_hash=" + hex(config_hash) + " seed=" + std::to_string(seed) + "\n";
}

Json OutputHeader::json() const {
  return Json{{"generator", "imvar"}, {"config_hash", hex(config_hash)}, {"seed", seed}};
}

Dataset read_csv_dataset(const fs::path& path, const CsvColumns& columns) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open data file '" + path.string() + "'");
  if (columns.response.empty()) throw Error(ErrorCode::config, "no response column named");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    names = split(line);
    break;
  }
  if (names.empty()) throw Error(ErrorCode::config, "data file '" + path.string() + "' has no header row");
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < names.size(); ++i) where[names[i]] = i;
  auto locate = [&](const std::string& name) {
    const auto it = where.find(name);
    if (it == where.end()) throw Error(ErrorCode::config, "column '" + name + "' not found in " + path.string());
    return it->second;
  };
  std::vector<std::size_t> resp, cov;
  for (const auto& n : columns.response) resp.push_back(locate(n));
  for (const auto& n : columns.covariates) cov.push_back(locate(n));
  const bool censored = !columns.censor.empty();
  const std::size_t cens = censored ? locate(columns.censor) : 0;

  std::vector<std::vector<double>> rows;
  std::vector<int> observed;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (cells.size() != names.size())
      throw Error(ErrorCode::config, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                         std::to_string(names.size()) + " cells");
    std::vector<double> row;
    for (auto c : resp) row.push_back(parse_cell(cells[c], path, line_no));
    for (auto c : cov) row.push_back(parse_cell(cells[c], path, line_no));
    if (censored) {
      const double t = parse_cell(cells[cens], path, line_no);
      if (t != 0.0 && t != 1.0)
        throw Error(ErrorCode::config, path.string() + ":" + std::to_string(line_no) + ": censor flag must be 0 or 1");
      observed.push_back(static_cast<int>(t));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::config, "data file '" + path.string() + "' has no rows");

  Dataset data;
  const auto n = static_cast<Index>(rows.size());
  data.response.resize(n, static_cast<Index>(resp.size()));
  data.covariates.resize(n, static_cast<Index>(cov.size()));
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < resp.size(); ++j) data.response(i, static_cast<Index>(j)) = row[j];
    for (std::size_t j = 0; j < cov.size(); ++j) data.covariates(i, static_cast<Index>(j)) = row[resp.size() + j];
  }
  if (cov.empty()) data.covariates.resize(0, 0);
  data.observed = std::move(observed);
  data.validate();
  return data;
}

std::string grid_csv(const ContourGrid& grid, const OutputHeader& header) {
  std::string out = header.csv_line();
  for (Index j = 0; j < grid.dimension(); ++j) out += "theta" + std::to_string(j + 1) + ",";
  out += "value\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vector node = grid.node(i);
    for (Index j = 0; j < node.size(); ++j) out += format_double(node(j)) + ",";
    out += format_double(grid.values[i]) + "\n";
  }
  return out;
}

Json grid_json(const ContourGrid& grid, const OutputHeader& header) {
  Json axes = Json::array();
  for (const auto& a : grid.axes) axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}});
  Json j{{"header", header.json()}, {"axes", axes}, {"values", grid.values}};
  bool any = false;
  for (auto v : grid.domain_violation) any = any || v;
  if (any) {
    std::vector<int> flags(grid.domain_violation.begin(), grid.domain_violation.end());
    j["domain_violation"] = flags;
  }
  return j;
}

std::string trace_csv(const FitTrace& trace, const OutputHeader& header) {
  std::string out = header.csv_line();
  const Index d = trace.entries.empty() ? 0 : trace.entries.front().xi.size();
  out += "t";
  for (Index j = 0; j < d; ++j) out += ",xi" + std::to_string(j + 1);
  for (Index j = 0; j < d; ++j) out += ",objective" + std::to_string(j + 1);
  out += "\n";
  for (const auto& e : trace.entries) {
    out += std::to_string(e.t);
    for (Index j = 0; j < e.xi.size(); ++j) out += "," + format_double(e.xi(j));
    for (Index j = 0; j < e.objective.size(); ++j) out += "," + format_double(e.objective(j));
    out += "\n";
  }
  return out;
}

Json family_json(const BuiltContour& fit, double alpha, const OutputHeader& header) {
  Json j{{"header", header.json()}};
  if (fit.scalar) {
    j["family"] = "gaussian-scalar";
    j["dimension"] = fit.scalar->dimension();
    j["theta_hat"] = vector_json(fit.scalar->mean());
    j["information"] = matrix_rows_json(fit.scalar->information());
    j["xi"] = fit.scalar->xi();
  } else if (fit.vector) {
    j["family"] = "gaussian-vector";
    j["dimension"] = fit.vector->dimension();
    j["theta_hat"] = vector_json(fit.vector->mean());
    j["information"] = matrix_rows_json(fit.vector->information());
    j["xi"] = vector_json(fit.vector->xi());
    j["eigenvalues"] = vector_json(fit.vector->eigen().values);
    j["eigenvectors"] = matrix_rows_json(fit.vector->eigen().vectors);
  } else if (fit.dirichlet) {
    j["family"] = "dirichlet";
    j["dimension"] = fit.dirichlet->dimension();
    j["theta_hat"] = vector_json(fit.dirichlet->mean());
    j["n"] = fit.dirichlet->n();
    j["xi"] = fit.dirichlet->xi();
  } else {
    throw Error(ErrorCode::config, "contour has no fitted family");
  }
  j["alpha"] = alpha;
  j["seed"] = header.seed;
  j["iterations"] = fit.trace.iterations();
  j["termination"] = std::string(to_string(fit.trace.reason));
  j["evaluations"] = fit.trace.evaluations;
  j["failures"] = fit.trace.failures;
  return j;
}

Json report_json(const CalibrationReport& report, const OutputHeader& header) {
  Json xi = Json::array();
  for (const auto& v : report.xi) xi.push_back(vector_json(v));
  Json j{{"header", header.json()},
         {"name", report.name},
         {"replications", report.replications},
         {"failures", report.failures},
         {"values", report.values},
         {"alpha_levels", report.alpha_levels},
         {"cdf", report.cdf},
         {"xi", xi}};
  if (report.mean_l1) j["mean_l1"] = *report.mean_l1;
  return j;
}

std::string report_csv(const CalibrationReport& report, const OutputHeader& header) {
  std::string out = header.csv_line() + "alpha,cdf\n";
  for (std::size_t i = 0; i < report.alpha_levels.size(); ++i)
    out += format_double(report.alpha_levels[i]) + "," + format_double(report.cdf[i]) + "\n";
  return out;
}

void OutputSet::add(fs::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

void OutputSet::add(fs::path path, const Json& content) { add(std::move(path), content.dump(2) + "\n"); }

void OutputSet::commit() {
  std::vector<fs::path> temps;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [path, content] : files_) {
    fs::path tmp = path;
    tmp += ".tmp";
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw Error(ErrorCode::config, "cannot write output '" + path.string() + "'");
    }
  }
  for (std::size_t i = 0; i < files_.size(); ++i) {
    std::error_code ec;
    fs::rename(temps[i], files_[i].first, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorCode::config, "cannot move output into place '" + files_[i].first.string() + "'");
    }
  }
  files_.clear();
}

}  // namespace imvar
