#pragma once

// Batch front end: JSON job configs in, JSON/CSV result documents out.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitot/distributions.hpp"
#include "orbitot/errors.hpp"
#include "orbitot/oracle.hpp"
#include "orbitot/transport.hpp"

namespace orbitot::cli {

using Json = nlohmann::ordered_json;

enum class Format { json, csv };

Format format_from_string(const std::string& s);

/// Schema violation; `path()` is the dotted location of the offending field.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string path, const std::string& msg)
      : InvalidArgument(path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct SampleConfig {
  int which = 0;
  std::size_t n = 1000;
};

struct JobConfig {
  Family family = Family::gaussian;
  DistributionSpec params0 = Marginal1D::exponential(1.0);
  DistributionSpec params1 = Marginal1D::exponential(1.0);
  std::vector<std::string> tasks;
  ValidationConfig validation;
  SampleConfig sample;
  std::optional<std::string> output_path;
  Format format = Format::json;
};

/// Parses a family-specific parameter object; errors carry `path`.
DistributionSpec parse_distribution(Family family, const nlohmann::json& j, const std::string& path);
Marginal1D parse_marginal(const nlohmann::json& j, const std::string& path);

JobConfig parse_config(const nlohmann::json& j);
/// Reads and parses a config file. Throws ConfigError.
JobConfig load_config(const std::string& path);

/// Diagnostics for nearly singular covariance/scale matrices.
std::vector<std::string> condition_warnings(const JobConfig& cfg);

Json to_json(const Matrix& m);
Json to_json(const Vector& v);
Json to_json(const Marginal1D& m);
Json to_json(const MongeMap& map);
Json to_json(const CertificateReport& c);
Json to_json(const OracleReport& r, bool timings);

/// Serializes with a fixed layout: two-space indent, keys in insertion order,
/// every double printed with 17 significant digits, non-finite as null.
std::string dump(const Json& j);

/// Flattens a document into "key,value" rows (nested keys joined with '.').
std::string to_key_value_csv(const Json& j);
std::string trials_csv(const OracleReport& r, bool timings);
std::string samples_csv(const DistributionSpec& spec, const Matrix& rows);

/// Writes to a temporary file next to `path`, then renames it into place.
void write_atomic(const std::string& path, const std::string& content);

struct TaskOutcome {
  Json document;
  std::string csv;
  bool breach = false;
};

/// Runs the named tasks (subset of cost, map, certify, validate).
TaskOutcome run_tasks(const JobConfig& cfg, const std::vector<std::string>& tasks, bool timings);

/// The `orbitot` command line. Returns the process exit code.
int main(int argc, char** argv);

}  // namespace orbitot::cli
