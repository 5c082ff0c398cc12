#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "kakeya/common.hpp"

namespace kakeya::lab {

inline constexpr const char* kVersion = "kakeya-lab 0.1.0";

enum ExitCode : int { kPass = 0, kVerdictFailure = 1, kUsage = 2, kResourceRefusal = 3 };

struct Verdict {
  std::string name;
  double measured = 0;
  std::string relation;  ///< "<=", ">=" or "==" against threshold
  double threshold = 0;
  bool pass = false;
};

class ExperimentReport {
 public:
  explicit ExperimentReport(std::string name) : name_(std::move(name)) {}

  void measure(const std::string& key, const nlohmann::json& value) { measured_[key] = value; }
  /// Records and returns the comparison measured <relation> threshold.
  bool verdict(const std::string& key, double measured, const std::string& relation, double threshold);
  void provenance(const nlohmann::json& p) { provenance_ = p; }

  const std::string& name() const { return name_; }
  const std::vector<Verdict>& verdicts() const { return verdicts_; }
  const nlohmann::json& measured() const { return measured_; }
  bool all_pass() const;
  nlohmann::json to_json() const;

 private:
  std::string name_;
  nlohmann::json measured_ = nlohmann::json::object();
  std::vector<Verdict> verdicts_;
  nlohmann::json provenance_ = nlohmann::json::object();
};

struct RunManifest {
  std::vector<std::string> command_line;  ///< arguments as typed
  std::vector<std::string> effective_args; ///< fully resolved arguments used for replay
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string timestamp;
  std::string tool_version = kVersion;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// "1/2^k" or "1/N" with N a power of two.
double parse_delta(const std::string& text);
/// Comma separated list; empty entries dropped.
std::vector<std::string> split_list(const std::string& text);

/// Entry point shared by the executable and the tests. Never throws; returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kakeya::lab
