#include <regex>

#include "kakeya/lab.hpp"

namespace kakeya::lab {

using nlohmann::json;

bool ExperimentReport::verdict(const std::string& key, double measured, const std::string& relation,
                               double threshold) {
  bool pass = false;
  if (relation == "<=")
    pass = measured <= threshold;
  else if (relation == ">=")
    pass = measured >= threshold;
  else if (relation == "==")
    pass = measured == threshold;
  else
    throw InvalidArgument("unknown relation " + relation);
  verdicts_.push_back({key, measured, relation, threshold, pass});
  return pass;
}

bool ExperimentReport::all_pass() const {
  for (const auto& v : verdicts_)
    if (!v.pass) return false;
  return true;
}

json ExperimentReport::to_json() const {
  json vs = json::array();
  for (const auto& v : verdicts_)
    vs.push_back({{"name", v.name},
                  {"measured", v.measured},
                  {"relation", v.relation},
                  {"threshold", v.threshold},
                  {"pass", v.pass}});
  return {{"experiment", name_}, {"measured", measured_}, {"verdicts", vs}, {"provenance", provenance_},
          {"pass", all_pass()}};
}

json RunManifest::to_json() const {
  return {{"command_line", command_line},
          {"effective_args", effective_args},
          {"config", config},
          {"seed", seed},
          {"timestamp", timestamp},
          {"tool_version", tool_version},
          {"params", params},
          {"outputs", outputs}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.command_line = j.at("command_line").get<std::vector<std::string>>();
    m.effective_args = j.at("effective_args").get<std::vector<std::string>>();
    m.config = j.value("config", json::object());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.timestamp = j.value("timestamp", "");
    m.tool_version = j.value("tool_version", "");
    m.params = j.value("params", json::object());
    m.outputs = j.value("outputs", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

double parse_delta(const std::string& text) {
  static const std::regex pow_form(R"(\s*1\s*/\s*2\s*\^\s*(\d+)\s*)");
  static const std::regex int_form(R"(\s*1\s*/\s*(\d+)\s*)");
  std::smatch m;
  if (std::regex_match(text, m, pow_form)) {
    const int k = std::stoi(m[1]);
    if (k < 1 || k > 60) throw InvalidArgument("delta exponent out of range: " + text);
    return std::ldexp(1.0, -k);
  }
  if (std::regex_match(text, m, int_form)) {
    if (m[1].length() > 18) throw InvalidArgument("delta denominator too large: " + text);
    const unsigned long long n = std::stoull(m[1]);
    if (n < 2 || (n & (n - 1)) != 0) throw InvalidArgument("delta must be 1/2^k, got " + text);
    return 1.0 / static_cast<double>(n);
  }
  throw InvalidArgument("delta must be written 1/2^k (or 1/N with N a power of two), got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      const auto a = cur.find_first_not_of(" \t"), b = cur.find_last_not_of(" \t");
      if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

}  // namespace kakeya::lab
