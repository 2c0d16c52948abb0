#include "orbitot/cli.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "orbitot/detail/overloaded.hpp"

namespace orbitot::cli {

using detail::overloaded;
using nlohmann::json;

namespace {

const std::vector<std::string> kTaskOrder = {"cost", "map", "certify", "validate"};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(join(path, it.key()), "unknown field");
  }
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  require_object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

std::uint64_t unsigned_integer(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  throw ConfigError(path, "expected a non-negative integer");
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], index(path, i)));
  return out;
}

Vector vector(const json& j, const std::string& path) {
  const auto v = numbers(j, path);
  if (v.empty()) throw ConfigError(path, "expected a non-empty array");
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Matrix m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto row = numbers(j[i], index(path, i));
    if (i == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
      throw ConfigError(index(path, i), "row length differs from the first row");
    }
    for (std::size_t k = 0; k < row.size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
  }
  return m;
}

SpdMatrix spd(const json& j, const std::string& path) {
  const Matrix m = matrix(j, path);
  if (m.rows() != m.cols()) throw ConfigError(path, "expected a square matrix");
  try {
    return SpdMatrix(m);
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

template <typename F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

Generator parse_generator(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown(j, path, {"type", "nu"});
  const json& type = field(j, "type", path);
  if (!type.is_string()) throw ConfigError(join(path, "type"), "expected a string");
  const auto name = type.get<std::string>();
  if (name == "gaussian") return Generator::gaussian();
  if (name == "student_t") {
    const double nu = number(field(j, "nu", path), join(path, "nu"));
    return guarded(join(path, "nu"), [&] { return Generator::student_t(nu); });
  }
  throw ConfigError(join(path, "type"), "unknown generator '" + name + "' (gaussian, student_t)");
}

void check_dims(int d_mean, int d_cov, const std::string& path) {
  if (d_mean != d_cov) {
    throw ConfigError(path, "dimension " + std::to_string(d_cov) + " does not match the mean length " +
                                std::to_string(d_mean));
  }
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string scalar_text(const Json& j) {
  if (j.is_number_float()) return format_double(j.get<double>());
  return j.dump();
}

void emit(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) + 2, ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + Json(it.key()).dump() + ": ";
      emit(it.value(), out, indent + 2);
    }
    out += "\n" + close + "}";
  } else if (j.is_array()) {
    bool flat = true;
    for (const auto& e : j) flat = flat && !e.is_structured();
    if (j.empty()) {
      out += "[]";
    } else if (flat) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        out += scalar_text(j[i]);
      }
      out += "]";
    } else {
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(j[i], out, indent + 2);
      }
      out += "\n" + close + "]";
    }
  } else {
    out += scalar_text(j);
  }
}

std::string csv_field(const Json& j) {
  if (j.is_null()) return "";
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return scalar_text(j);
}

void flatten(const Json& j, const std::string& key, std::string& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), join(key, it.key()), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], index(key, i), out);
  } else {
    out += csv_field(Json(key)) + "," + csv_field(j) + "\n";
  }
}

Json check_json(const CheckResult& c) {
  Json j;
  j["applicable"] = c.applicable;
  j["passed"] = c.passed;
  j["value"] = c.value;
  return j;
}

Json quantile_map_json(const QuantileMap& q) {
  Json j;
  j["source"] = to_json(q.source);
  j["target"] = to_json(q.target);
  return j;
}

std::string operation_of(const std::string& task) {
  if (task == "cost") return "transport_cost";
  if (task == "map") return "transport_map";
  if (task == "certify") return "certify";
  return "validate";
}

}  // namespace

Format format_from_string(const std::string& s) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  throw InvalidArgument("unknown output format '" + s + "' (json, csv)");
}

Marginal1D parse_marginal(const json& j, const std::string& path) {
  require_object(j, path);
  const json& fam = field(j, "family", path);
  if (!fam.is_string()) throw ConfigError(join(path, "family"), "expected a string");
  const auto name = fam.get<std::string>();
  auto num = [&](const char* key) { return number(field(j, key, path), join(path, key)); };
  if (name == "exponential") {
    reject_unknown(j, path, {"family", "rate"});
    const double rate = num("rate");
    return guarded(join(path, "rate"), [&] { return Marginal1D::exponential(rate); });
  }
  if (name == "normal") {
    reject_unknown(j, path, {"family", "mean", "sd"});
    const double mean = num("mean");
    const double sd = num("sd");
    return guarded(join(path, "sd"), [&] { return Marginal1D::normal(mean, sd); });
  }
  if (name == "lognormal") {
    reject_unknown(j, path, {"family", "mu", "sigma"});
    const double mu = num("mu");
    const double sigma = num("sigma");
    return guarded(join(path, "sigma"), [&] { return Marginal1D::lognormal(mu, sigma); });
  }
  if (name == "weibull") {
    reject_unknown(j, path, {"family", "shape", "scale"});
    const double shape = num("shape");
    const double scale = num("scale");
    return guarded(path, [&] { return Marginal1D::weibull(shape, scale); });
  }
  if (name == "pareto") {
    reject_unknown(j, path, {"family", "alpha", "xm"});
    const double alpha = num("alpha");
    const double xm = num("xm");
    return guarded(path, [&] { return Marginal1D::pareto(alpha, xm); });
  }
  if (name == "empirical") {
    reject_unknown(j, path, {"family", "values"});
    auto values = numbers(field(j, "values", path), join(path, "values"));
    return guarded(join(path, "values"), [&] { return Marginal1D::empirical(std::move(values)); });
  }
  throw ConfigError(join(path, "family"),
                    "unknown marginal family '" + name +
                        "' (exponential, normal, lognormal, weibull, pareto, empirical)");
}

DistributionSpec parse_distribution(Family family, const json& j, const std::string& path) {
  require_object(j, path);
  switch (family) {
    case Family::gaussian: {
      reject_unknown(j, path, {"mean", "cov"});
      Vector mean = vector(field(j, "mean", path), join(path, "mean"));
      SpdMatrix cov = spd(field(j, "cov", path), join(path, "cov"));
      check_dims(static_cast<int>(mean.size()), cov.dim(), join(path, "cov"));
      return GaussianParams(std::move(mean), std::move(cov));
    }
    case Family::elliptical: {
      reject_unknown(j, path, {"location", "dispersion", "generator"});
      Vector loc = vector(field(j, "location", path), join(path, "location"));
      SpdMatrix disp = spd(field(j, "dispersion", path), join(path, "dispersion"));
      check_dims(static_cast<int>(loc.size()), disp.dim(), join(path, "dispersion"));
      Generator gen = j.contains("generator")
                          ? parse_generator(j["generator"], join(path, "generator"))
                          : Generator::gaussian();
      return EllipticalParams(std::move(loc), std::move(disp), gen);
    }
    case Family::wishart: {
      reject_unknown(j, path, {"scale", "dof"});
      SpdMatrix scale = spd(field(j, "scale", path), join(path, "scale"));
      const double dof = number(field(j, "dof", path), join(path, "dof"));
      return guarded(join(path, "dof"), [&] { return DistributionSpec(WishartParams(scale, dof)); });
    }
    case Family::product1d: {
      reject_unknown(j, path, {"marginals"});
      const json& arr = field(j, "marginals", path);
      const std::string apath = join(path, "marginals");
      if (!arr.is_array() || arr.empty()) throw ConfigError(apath, "expected a non-empty array");
      std::vector<Marginal1D> ms;
      for (std::size_t i = 0; i < arr.size(); ++i) ms.push_back(parse_marginal(arr[i], index(apath, i)));
      return Product1D(std::move(ms));
    }
    case Family::quantile1d:
      return parse_marginal(j, path);
  }
  throw ConfigError(path, "unsupported family");
}

JobConfig parse_config(const json& j) {
  require_object(j, "config");
  reject_unknown(j, "", {"family", "params0", "params1", "tasks", "validation", "sample", "output"});
  JobConfig cfg;

  const json& fam = field(j, "family", "");
  if (!fam.is_string()) throw ConfigError("family", "expected a string");
  cfg.family = guarded("family", [&] { return family_from_string(fam.get<std::string>()); });
  cfg.params0 = parse_distribution(cfg.family, field(j, "params0", ""), "params0");
  cfg.params1 = parse_distribution(cfg.family, field(j, "params1", ""), "params1");

  if (sample_dim(cfg.params0) != sample_dim(cfg.params1)) {
    throw ConfigError("params1", "dimension " + std::to_string(sample_dim(cfg.params1)) +
                                     " differs from params0 dimension " +
                                     std::to_string(sample_dim(cfg.params0)));
  }
  if (cfg.family == Family::wishart &&
      std::get<WishartParams>(cfg.params0).dof != std::get<WishartParams>(cfg.params1).dof) {
    throw ConfigError("params1.dof", "both Wishart laws must have the same degrees of freedom");
  }
  if (cfg.family == Family::elliptical) {
    const auto& g0 = std::get<EllipticalParams>(cfg.params0).generator;
    const auto& g1 = std::get<EllipticalParams>(cfg.params1).generator;
    if (g0.kind != g1.kind || g0.nu != g1.nu) {
      throw ConfigError("params1.generator", "both elliptical laws must share the generator");
    }
  }

  if (j.contains("tasks")) {
    const json& t = j["tasks"];
    if (!t.is_array() || t.empty()) throw ConfigError("tasks", "expected a non-empty array");
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t[i].is_string()) throw ConfigError(index("tasks", i), "expected a string");
      const auto name = t[i].get<std::string>();
      if (std::find(kTaskOrder.begin(), kTaskOrder.end(), name) == kTaskOrder.end()) {
        throw ConfigError(index("tasks", i), "unknown task '" + name + "' (cost, map, certify, validate)");
      }
      cfg.tasks.push_back(name);
    }
  } else {
    cfg.tasks = {"cost", "map", "certify"};
  }

  if (j.contains("validation")) {
    const json& v = j["validation"];
    require_object(v, "validation");
    reject_unknown(v, "validation", {"n_samples", "n_trials", "base_seed", "mc_samples"});
    auto& vc = cfg.validation;
    if (v.contains("n_samples")) {
      vc.n_samples = unsigned_integer(v["n_samples"], "validation.n_samples");
      if (vc.n_samples < 1 || vc.n_samples > kMaxAssignmentSize) {
        throw ConfigError("validation.n_samples",
                          "must be in [1, " + std::to_string(kMaxAssignmentSize) + "]");
      }
    }
    if (v.contains("n_trials")) {
      vc.n_trials = unsigned_integer(v["n_trials"], "validation.n_trials");
      if (vc.n_trials < 1) throw ConfigError("validation.n_trials", "must be >= 1");
    }
    if (v.contains("base_seed")) vc.base_seed = unsigned_integer(v["base_seed"], "validation.base_seed");
    if (v.contains("mc_samples")) {
      vc.mc_samples = unsigned_integer(v["mc_samples"], "validation.mc_samples");
      if (vc.mc_samples < 2) throw ConfigError("validation.mc_samples", "must be >= 2");
    }
  }

  if (j.contains("sample")) {
    const json& s = j["sample"];
    require_object(s, "sample");
    reject_unknown(s, "sample", {"which", "n"});
    if (s.contains("which")) {
      const auto w = unsigned_integer(s["which"], "sample.which");
      if (w > 1) throw ConfigError("sample.which", "must be 0 or 1");
      cfg.sample.which = static_cast<int>(w);
    }
    if (s.contains("n")) {
      cfg.sample.n = unsigned_integer(s["n"], "sample.n");
      if (cfg.sample.n < 1) throw ConfigError("sample.n", "must be >= 1");
    }
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    require_object(o, "output");
    reject_unknown(o, "output", {"path", "format"});
    if (o.contains("path")) {
      if (!o["path"].is_string()) throw ConfigError("output.path", "expected a string");
      cfg.output_path = o["path"].get<std::string>();
    }
    if (o.contains("format")) {
      if (!o["format"].is_string()) throw ConfigError("output.format", "expected a string");
      cfg.format = guarded("output.format", [&] { return format_from_string(o["format"].get<std::string>()); });
    }
  }
  return cfg;
}

JobConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

std::vector<std::string> condition_warnings(const JobConfig& cfg) {
  std::vector<std::string> out;
  auto add = [&](const SpdMatrix& m, const std::string& what) {
    if (auto w = condition_warning(m, what)) out.push_back(*w);
  };
  for (int k = 0; k < 2; ++k) {
    const auto& p = k == 0 ? cfg.params0 : cfg.params1;
    const std::string name = k == 0 ? "params0" : "params1";
    std::visit(overloaded{[&](const GaussianParams& g) { add(g.cov, name + ".cov"); },
                          [&](const EllipticalParams& e) { add(e.dispersion, name + ".dispersion"); },
                          [&](const WishartParams& w) { add(w.scale, name + ".scale"); },
                          [](const auto&) {}},
               p);
  }
  return out;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Marginal1D& m) {
  Json j;
  j["family"] = m.name();
  std::visit(overloaded{[&](const Exponential& e) { j["rate"] = e.rate; },
                        [&](const Normal& n) {
                          j["mean"] = n.mean;
                          j["sd"] = n.sd;
                        },
                        [&](const LogNormal& l) {
                          j["mu"] = l.mu;
                          j["sigma"] = l.sigma;
                        },
                        [&](const Weibull& w) {
                          j["shape"] = w.shape;
                          j["scale"] = w.scale;
                        },
                        [&](const Pareto& p) {
                          j["alpha"] = p.alpha;
                          j["xm"] = p.xm;
                        },
                        [&](const Empirical& e) { j["values"] = e.sorted; }},
             m.law());
  return j;
}

Json to_json(const MongeMap& map) {
  Json j;
  j["kind"] = map_kind(map);
  std::visit(overloaded{[&](const AffineMap& a) {
                          j["shift"] = to_json(a.shift);
                          j["linear"] = to_json(a.linear);
                        },
                        [&](const CongruenceMap& c) { j["t"] = to_json(c.t); },
                        [&](const DiagMap& d) { j["ratios"] = to_json(d.ratios); },
                        [&](const QuantileMap& q) {
                          j["source"] = to_json(q.source);
                          j["target"] = to_json(q.target);
                        },
                        [&](const ProductQuantileMap& p) {
                          Json coords = Json::array();
                          for (const auto& q : p.coords) coords.push_back(quantile_map_json(q));
                          j["coords"] = coords;
                        }},
             map);
  return j;
}

Json to_json(const CertificateReport& c) {
  Json j;
  j["verdict"] = to_string(c.verdict);
  j["family"] = to_string(c.family);
  j["spd"] = check_json(c.spd);
  j["pushforward"] = check_json(c.pushforward);
  j["monotonicity"] = check_json(c.monotonicity);
  return j;
}

Json to_json(const OracleReport& r, bool timings) {
  Json j;
  j["passed"] = r.passed();
  j["closed_form"] = r.closed_form;
  Json mc;
  mc["estimate"] = r.mc_monge.estimate;
  mc["stderr"] = r.mc_monge.std_error;
  mc["n"] = r.mc_monge.n;
  mc["seed"] = r.mc_seed;
  if (timings) mc["seconds"] = r.mc_seconds;
  j["mc_monge"] = mc;

  Json as;
  as["mean"] = r.assignment_kantorovich;
  as["stderr"] = r.assignment_stderr;
  Json trials = Json::array();
  for (const auto& t : r.trials) {
    Json row;
    row["trial"] = t.trial;
    row["seed"] = t.seed;
    row["n"] = t.n;
    row["cost"] = t.assignment_cost;
    if (timings) row["seconds"] = t.seconds;
    trials.push_back(row);
  }
  as["trials"] = trials;
  j["assignment_kantorovich"] = as;

  Json paired;
  paired["seed"] = r.paired_seed;
  paired["n"] = r.paired.n;
  paired["monge_cost"] = r.paired.monge_cost;
  paired["assignment_cost"] = r.paired.assignment_cost;
  paired["relative_gap"] = r.paired.relative_gap;
  if (timings) paired["seconds"] = r.paired_seconds;
  j["paired_assignment"] = paired;

  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json cj;
    cj["name"] = c.name;
    cj["applicable"] = c.applicable;
    cj["passed"] = c.passed;
    cj["detail"] = c.detail;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  return j;
}

std::string dump(const Json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

std::string to_key_value_csv(const Json& j) {
  std::string out = "key,value\n";
  flatten(j, "", out);
  return out;
}

std::string trials_csv(const OracleReport& r, bool timings) {
  std::string out = "trial,seed,n,assignment_cost,closed_form,mc_monge,mc_stderr";
  out += timings ? ",seconds\n" : "\n";
  for (const auto& t : r.trials) {
    out += std::to_string(t.trial) + "," + std::to_string(t.seed) + "," + std::to_string(t.n) + "," +
           format_double(t.assignment_cost) + "," + format_double(r.closed_form) + "," +
           format_double(r.mc_monge.estimate) + "," + format_double(r.mc_monge.std_error);
    if (timings) out += "," + format_double(t.seconds);
    out += "\n";
  }
  return out;
}

std::string samples_csv(const DistributionSpec& spec, const Matrix& rows) {
  std::vector<std::string> header;
  if (const auto* w = std::get_if<WishartParams>(&spec)) {
    for (int i = 0; i < w->dim(); ++i) {
      header.push_back("X[" + std::to_string(i) + "][" + std::to_string(i) + "]");
      for (int k = i + 1; k < w->dim(); ++k) {
        header.push_back("sqrt2*X[" + std::to_string(i) + "][" + std::to_string(k) + "]");
      }
    }
  } else {
    for (Eigen::Index k = 0; k < rows.cols(); ++k) header.push_back("x" + std::to_string(k));
  }
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += "\n";
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index k = 0; k < rows.cols(); ++k) out += (k ? "," : "") + format_double(rows(i, k));
    out += "\n";
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move result into '" + path + "': " + ec.message());
  }
}

TaskOutcome run_tasks(const JobConfig& cfg, const std::vector<std::string>& tasks, bool timings) {
  auto wants = [&](const std::string& t) { return std::find(tasks.begin(), tasks.end(), t) != tasks.end(); };
  TaskOutcome out;
  out.document["family"] = to_string(cfg.family);

  auto step = [](const std::string& task, auto&& f) {
    try {
      return f();
    } catch (const Error& e) {
      throw Error(operation_of(task) + " failed: " + e.what());
    }
  };

  std::optional<TransportSolution> sol;
  auto solution = [&](const std::string& task) -> const TransportSolution& {
    if (!sol) sol = step(task, [&] { return solve(cfg.params0, cfg.params1); });
    return *sol;
  };

  if (wants("cost")) {
    if (wants("map") || wants("certify") || wants("validate")) {
      out.document["cost"] = solution("cost").cost;
    } else {
      out.document["cost"] = step("cost", [&] { return transport_cost(cfg.params0, cfg.params1); });
    }
  }
  if (wants("map")) out.document["map"] = to_json(solution("map").map);
  if (wants("certify")) out.document["certificate"] = to_json(solution("certify").certificate);
  if (wants("validate")) {
    const auto& s = solution("validate");
    const OracleReport report = step("validate", [&] { return validate(cfg.params0, cfg.params1, s, cfg.validation); });
    Json settings;
    settings["n_samples"] = cfg.validation.n_samples;
    settings["n_trials"] = cfg.validation.n_trials;
    settings["base_seed"] = cfg.validation.base_seed;
    settings["mc_samples"] = cfg.validation.mc_samples;
    out.document["validation_settings"] = settings;
    out.document["validation"] = to_json(report, timings);
    out.breach = !report.passed();
    if (tasks.size() == 1) out.csv = trials_csv(report, timings);
  }
  if (out.csv.empty()) out.csv = to_key_value_csv(out.document);
  return out;
}

int main(int argc, char** argv) {
  CLI::App app{"orbitot: closed-form optimal transport between laws on a common group orbit"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;
  bool quiet = false;
  bool timings = false;
  std::optional<int> which;
  std::optional<std::size_t> n_draws;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "run the tasks listed in the config"},
      {"cost", "closed-form transport cost"},
      {"map", "optimal Monge map"},
      {"certify", "optimality certificate for the map"},
      {"validate", "check the closed form against Monte-Carlo and assignment oracles"},
      {"sample", "write draws of one configured law as CSV"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sc = app.add_subcommand(name, help);
    sc->add_option("--config", config_path, "job config (JSON)")->required();
    sc->add_option("--seed", seed, "override validation.base_seed");
    sc->add_option("--out", out_path, "write the result here instead of stdout");
    sc->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sc->add_flag("--quiet", quiet, "suppress diagnostics on stderr");
    if (name == "validate" || name == "run") {
      sc->add_flag("--timings", timings, "include wall-clock runtimes (breaks byte reproducibility)");
    }
    if (name == "sample") {
      sc->add_option("--which", which, "0 for params0, 1 for params1")->check(CLI::Range(0, 1));
      sc->add_option("--n", n_draws, "number of draws")->check(CLI::PositiveNumber);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    JobConfig cfg = load_config(config_path);
    if (seed) cfg.validation.base_seed = *seed;
    if (which) cfg.sample.which = *which;
    if (n_draws) cfg.sample.n = *n_draws;
    const Format fmt = format.empty() ? cfg.format : format_from_string(format);
    const std::optional<std::string> target =
        out_path.empty() ? cfg.output_path : std::optional<std::string>(out_path);
    if (!quiet) {
      for (const auto& w : condition_warnings(cfg)) std::cerr << "warning: " << w << "\n";
    }

    std::string content;
    bool breach = false;
    if (command == "sample") {
      const auto& spec = cfg.sample.which == 0 ? cfg.params0 : cfg.params1;
      const Matrix rows = sample(spec, cfg.sample.n, derive_seed(cfg.validation.base_seed,
                                                                  static_cast<std::uint64_t>(cfg.sample.which)));
      content = samples_csv(spec, rows);
    } else {
      const auto tasks = command == "run" ? cfg.tasks : std::vector<std::string>{command};
      TaskOutcome r = run_tasks(cfg, tasks, timings);
      content = fmt == Format::json ? dump(r.document) : r.csv;
      breach = r.breach;
    }

    if (target) {
      write_atomic(*target, content);
      if (!quiet) std::cerr << "wrote " << *target << "\n";
    } else {
      std::cout << content;
    }
    if (breach) {
      if (!quiet) std::cerr << "validation tolerance breached\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace orbitot::cli
