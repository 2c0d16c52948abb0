#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "orbitot/cli.hpp"

using namespace orbitot;
using namespace orbitot::cli;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
  fs::path path;
  ScratchDir() : path(fs::temp_directory_path() / ("orbitot_cli_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path scratch_dir() {
  static const ScratchDir dir;
  return dir.path;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "orbitot");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return orbitot::cli::main(static_cast<int>(argv.size()), argv.data());
}

std::string config_error_path(const std::string& text) {
  try {
    parse_config(nlohmann::json::parse(text));
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

const char* kGaussian = R"({
  "family": "gaussian",
  "params0": {"mean": [0, 0], "cov": [[1, 0], [0, 1]]},
  "params1": {"mean": [1, 0], "cov": [[4, 0], [0, 1]]},
  "tasks": ["cost"]
})";

}  // namespace

TEST_CASE("config parsing") {
  const JobConfig cfg = parse_config(nlohmann::json::parse(kGaussian));
  CHECK(cfg.family == Family::gaussian);
  CHECK(cfg.tasks == std::vector<std::string>{"cost"});
  CHECK(transport_cost(cfg.params0, cfg.params1) == doctest::Approx(2.0));

  const JobConfig defaults = parse_config(nlohmann::json::parse(R"({
    "family": "quantile1d",
    "params0": {"family": "exponential", "rate": 1},
    "params1": {"family": "exponential", "rate": 2}})"));
  CHECK(defaults.tasks == std::vector<std::string>{"cost", "map", "certify"});
  CHECK(defaults.validation.n_samples == 512);

  const JobConfig wishart = parse_config(nlohmann::json::parse(R"({
    "family": "wishart",
    "params0": {"scale": [[1]], "dof": 3},
    "params1": {"scale": [[2]], "dof": 3}})"));
  CHECK(transport_cost(wishart.params0, wishart.params1) == doctest::Approx(15.0));

  const JobConfig product = parse_config(nlohmann::json::parse(R"({
    "family": "product1d",
    "params0": {"marginals": [{"family": "exponential", "rate": 1}, {"family": "weibull", "shape": 2, "scale": 1}]},
    "params1": {"marginals": [{"family": "exponential", "rate": 2}, {"family": "weibull", "shape": 2, "scale": 3}]}})"));
  CHECK(transport_cost(product.params0, product.params1) == doctest::Approx(4.5).epsilon(1e-8));
}

TEST_CASE("config errors name the offending field") {
  CHECK(config_error_path(R"({"family": "wishart",
    "params0": {"scale": [[1, 0], [0, 1]], "dof": 1},
    "params1": {"scale": [[1, 0], [0, 1]], "dof": 1}})") == "params0.dof");
  CHECK(config_error_path(R"({"family": "gaussian",
    "params0": {"mean": [0, 0], "cov": [[1, 0], [0, 1]]},
    "params1": {"mean": [0, 0], "cov": [[1, 2], [0, 1]]}})") == "params1.cov");
  CHECK(config_error_path(R"({"family": "gaussian",
    "params0": {"mean": [0, 0], "cov": [[1, 0], [0, 1]], "extra": 1},
    "params1": {"mean": [0, 0], "cov": [[1, 0], [0, 1]]}})") == "params0.extra");
  CHECK(config_error_path(R"({"family": "banana", "params0": {}, "params1": {}})") == "family");
  CHECK(config_error_path(R"({"family": "quantile1d",
    "params0": {"family": "exponential", "rate": -1},
    "params1": {"family": "exponential", "rate": 2}})") == "params0.rate");
  CHECK(config_error_path(R"({"family": "quantile1d",
    "params0": {"family": "exponential", "rate": 1},
    "params1": {"family": "exponential", "rate": 2},
    "tasks": ["cost", "fly"]})") == "tasks[1]");
  CHECK(config_error_path(R"({"family": "quantile1d",
    "params0": {"family": "exponential", "rate": 1},
    "params1": {"family": "exponential", "rate": 2},
    "validation": {"n_samples": 5000}})") == "validation.n_samples");
  CHECK(config_error_path(R"({"family": "gaussian",
    "params0": {"mean": [0], "cov": [[1]]},
    "params1": {"mean": [0, 0], "cov": [[1, 0], [0, 1]]}})") != "<no error>");
  CHECK_THROWS_AS(load_config((scratch_dir() / "missing.json").string()), ConfigError);
  CHECK_THROWS_AS(load_config(write_file("broken.json", "{ not json").string()), ConfigError);
}

TEST_CASE("identical marginals cost nothing") {
  for (const char* text : {R"({"family": "quantile1d",
        "params0": {"family": "lognormal", "mu": 0.2, "sigma": 0.7},
        "params1": {"family": "lognormal", "mu": 0.2, "sigma": 0.7}, "tasks": ["cost"]})",
                           R"({"family": "gaussian",
        "params0": {"mean": [1, 2], "cov": [[2, 0.5], [0.5, 1]]},
        "params1": {"mean": [1, 2], "cov": [[2, 0.5], [0.5, 1]]}, "tasks": ["cost"]})"}) {
    const JobConfig cfg = parse_config(nlohmann::json::parse(text));
    const TaskOutcome out = run_tasks(cfg, cfg.tasks, false);
    CHECK(out.document.at("cost").get<double>() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK_FALSE(out.breach);
  }
}

TEST_CASE("document serialization") {
  Json j = Json::object();
  j["a"] = 0.1;
  j["b"] = std::vector<double>{1.0, 2.5};
  j["c"] = std::numeric_limits<double>::quiet_NaN();
  j["d"] = Json::object({{"e", "x"}});
  const std::string s = dump(j);
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("[1, 2.5]") != std::string::npos);
  CHECK(s.find("\"c\": null") != std::string::npos);
  CHECK(s.back() == '\n');
  CHECK(nlohmann::json::parse(s).at("d").at("e") == "x");

  const std::string csv = to_key_value_csv(j);
  CHECK(csv.rfind("key,value\n", 0) == 0);
  CHECK(csv.find("d.e,x") != std::string::npos);

  const JobConfig cfg = parse_config(nlohmann::json::parse(kGaussian));
  const std::vector<std::string> all{"cost", "map", "certify"};
  const Json doc = run_tasks(cfg, all, false).document;
  CHECK(doc.at("family") == "gaussian");
  CHECK(doc.at("certificate").at("verdict") == "certified");
  CHECK(dump(doc) == dump(run_tasks(cfg, all, false).document));
}

TEST_CASE("samples CSV") {
  const WishartParams w(SpdMatrix::identity(3), 4.0);
  const Matrix rows = sample(DistributionSpec(w), 7, 1);
  const std::string csv = samples_csv(w, rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "X[0][0],sqrt2*X[0][1],sqrt2*X[0][2],X[1][1],sqrt2*X[1][2],X[2][2]");
  int count = 0;
  while (std::getline(in, line)) {
    ++count;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(count == 7);
}

TEST_CASE("atomic writes") {
  const fs::path p = scratch_dir() / "out.json";
  write_atomic(p.string(), "first");
  write_atomic(p.string(), "second");
  CHECK(read_file(p) == "second");
  for (const auto& entry : fs::directory_iterator(scratch_dir())) {
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  }
  CHECK_THROWS(write_atomic((scratch_dir() / "no_such_dir" / "x.json").string(), "x"));
}

TEST_CASE("command line") {
  const fs::path cfg = write_file("job.json", kGaussian);
  const fs::path out1 = scratch_dir() / "r1.json";
  const fs::path out2 = scratch_dir() / "r2.json";

  CHECK(run_cli({"cost", "--config", cfg.string(), "--out", out1.string(), "--quiet"}) == 0);
  CHECK(nlohmann::json::parse(read_file(out1)).at("cost").get<double>() == doctest::Approx(2.0));

  CHECK(run_cli({"cost", "--config", cfg.string(), "--bogus"}) == 1);
  CHECK(run_cli({"cost"}) == 1);
  CHECK(run_cli({"cost", "--config", write_file("bad.json", R"({"family": 3})").string(), "--quiet"}) == 1);
  CHECK(run_cli({"cost", "--config", cfg.string(), "--format", "xml"}) == 1);

  const fs::path samples = scratch_dir() / "s.csv";
  CHECK(run_cli({"sample", "--config", cfg.string(), "--which", "1", "--n", "25", "--out",
                 samples.string(), "--quiet"}) == 0);
  const std::string text = read_file(samples);
  CHECK(std::count(text.begin(), text.end(), '\n') == 26);

  SUBCASE("validate is byte-reproducible") {
    const std::string demo = std::string(ORBITOT_CONFIG_DIR) + "/gauss_demo.json";
    CHECK(run_cli({"validate", "--config", demo, "--out", out1.string(), "--quiet"}) == 0);
    CHECK(run_cli({"validate", "--config", demo, "--out", out2.string(), "--quiet"}) == 0);
    CHECK(read_file(out1) == read_file(out2));
    CHECK(nlohmann::json::parse(read_file(out1)).at("validation").at("passed") == true);
  }
}

TEST_CASE("shipped configs parse") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(ORBITOT_CONFIG_DIR)) {
    const auto name = entry.path().filename().string();
    if (entry.path().extension() != ".json" || name.find("schema") != std::string::npos) continue;
    CAPTURE(name);
    CHECK_NOTHROW(load_config(entry.path().string()));
    ++count;
  }
  CHECK(count >= 2);
}
