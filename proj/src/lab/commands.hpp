#pragma once

#include <filesystem>

#include "kakeya/lab.hpp"

namespace kakeya::lab::detail {

struct Common {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string format = "json";
  bool dry_run = false;
  std::string out_root = "runs";
  double max_memory_mb = 4096;
};

struct Estimate {
  nlohmann::json detail = nlohmann::json::object();
  double bytes = 0;
};

// Collects reports and output files for one run.
struct RunContext {
  std::filesystem::path dir;
  std::vector<ExperimentReport> reports;
  std::vector<std::string> outputs;  ///< file names relative to dir
  nlohmann::json params = nlohmann::json::object();
};

struct Sl2RingArgs {
  int p = 0;
  std::string checks = "all";
};

struct RegulusArgs {
  std::string lines_file;
  int generate = 0;
  std::string tasks = "fit,curvature,normalize";
};

struct TubesArgs {
  std::string family = "dirsep";
  std::string input;
  std::string delta;
  std::string experiments = "volume";
  double alpha = 0.05;
  int triples = 200;
  double rho = 0.1;
  int anchor = 0;
  int wolff_samples = 10000;
  int two_ends_tubes = 16;
};

struct IncidenceArgs {
  std::string points_file;
  std::string curves_file;
  bool generate = false;
  std::string delta;
  int A = 4;
  std::string D = "auto";
  double r = 0;  ///< 0: delta when generating, 0.01 for files
  bool oracle = false;
};

Estimate estimate(const Sl2RingArgs& a, const Common& c);
Estimate estimate(const RegulusArgs& a, const Common& c);
Estimate estimate(const TubesArgs& a, const Common& c);
Estimate estimate(const IncidenceArgs& a, const Common& c);

void execute(const Sl2RingArgs& a, const Common& c, RunContext& ctx);
void execute(const RegulusArgs& a, const Common& c, RunContext& ctx);
void execute(const TubesArgs& a, const Common& c, RunContext& ctx);
void execute(const IncidenceArgs& a, const Common& c, RunContext& ctx);

}  // namespace kakeya::lab::detail
