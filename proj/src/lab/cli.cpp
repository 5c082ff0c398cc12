#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "commands.hpp"

namespace kakeya::lab {

using nlohmann::json;
namespace fs = std::filesystem;
using detail::Common;
using detail::RunContext;

namespace {

const std::vector<std::string> kCommands = {"sl2-ring", "regulus", "tubes", "incidence", "replay"};

// Options that do not change report content; left out of the replay arguments.
const std::set<std::string> kLocalOptions = {"config", "out", "dry-run", "format", "threads"};

std::string usage() {
  return "usage: kakeya-lab <sl2-ring|regulus|tubes|incidence|replay> [options]\n"
         "       kakeya-lab <command> --help\n"
         "exit codes: 0 pass, 1 verdict failure, 2 usage/parse error, 3 resource refusal\n";
}

std::string json_scalar_to_arg(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    std::ostringstream s;
    s << std::setprecision(17) << v.get<double>();
    return s.str();
  }
  throw InvalidArgument("config values must be strings, numbers, booleans or lists");
}

void append_config_tokens(const json& obj, std::vector<std::string>& tokens) {
  for (const auto& [key, v] : obj.items()) {
    if (v.is_object()) continue;
    if (key == "config") throw InvalidArgument("config files cannot include other config files");
    if (v.is_boolean()) {
      if (v.get<bool>()) tokens.push_back("--" + key);
      continue;
    }
    tokens.push_back("--" + key);
    if (v.is_array()) {
      std::string joined;
      for (const auto& e : v) joined += (joined.empty() ? "" : ",") + json_scalar_to_arg(e);
      tokens.push_back(joined);
    } else {
      tokens.push_back(json_scalar_to_arg(v));
    }
  }
}

std::string find_config_path(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  return path;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::string short_hash(const std::vector<std::string>& args) {
  std::string joined;
  for (const auto& a : args) joined += a + '\x1f';
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_tag(joined)));
  return std::string(buf).substr(0, 12);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void print_summary(std::ostream& out, const std::string& format, const json& report, const fs::path& dir) {
  if (format == "csv") {
    out << "experiment,kind,name,measured,relation,threshold,pass\n";
    for (const auto& e : report["experiments"]) {
      for (const auto& [k, v] : e["measured"].items())
        if (v.is_primitive()) out << e["experiment"].get<std::string>() << ",measured," << k << "," << v.dump() << ",,,\n";
      for (const auto& v : e["verdicts"])
        out << e["experiment"].get<std::string>() << ",verdict," << v["name"].get<std::string>() << ","
            << v["measured"].dump() << "," << v["relation"].get<std::string>() << "," << v["threshold"].dump() << ","
            << (v["pass"].get<bool>() ? "true" : "false") << "\n";
    }
  } else {
    json s = report;
    s["run_dir"] = dir.string();
    out << s.dump(2) << "\n";
  }
}

struct Outcome {
  int code = kUsage;
  fs::path dir;
};

// Option targets for every subcommand.
struct Parsed {
  Common common;
  detail::Sl2RingArgs ring;
  detail::RegulusArgs regulus;
  detail::TubesArgs tubes;
  detail::IncidenceArgs incidence;
  std::string manifest;
  std::string config;
};

void add_common(CLI::App& app, Parsed& p) {
  app.add_option("--seed", p.common.seed, "RNG seed (KAKEYA_SEED overrides the config file)");
  app.add_option("--config", p.config, "JSON config file merged under the flags");
  app.add_option("--out", p.common.out_root, "root directory for run records");
  app.add_option("--threads", p.common.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--format", p.common.format, "stdout summary format")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--dry-run", p.common.dry_run, "print the resource estimate and exit");
  app.add_option("--max-memory-mb", p.common.max_memory_mb, "refuse runs estimated above this")
      ->check(CLI::PositiveNumber);
}

void add_command_options(CLI::App& app, const std::string& cmd, Parsed& p) {
  if (cmd == "sl2-ring") {
    app.add_option("--p", p.ring.p, "prime modulus")->required();
    app.add_option("--checks", p.ring.checks, "all or a comma list of axiom names");
  } else if (cmd == "regulus") {
    app.add_option("--lines", p.regulus.lines_file, "JSON lines file, one {\"lines\": [l1, l2, l3]} per record");
    app.add_option("--generate", p.regulus.generate, "random admissible triples instead of a file");
    app.add_option("--tasks", p.regulus.tasks, "comma list of fit, curvature, normalize");
  } else if (cmd == "tubes") {
    app.add_option("--family", p.tubes.family, "sl2, dirsep or file")->check(CLI::IsMember({"sl2", "dirsep", "file"}));
    app.add_option("--input", p.tubes.input, "family JSON lines file (family=file)");
    app.add_option("--delta", p.tubes.delta, "tube width 1/2^k")->required();
    app.add_option("--experiments", p.tubes.experiments,
                   "comma list of volume, wolff, planiness, profile, decompose, hairbrush, two-ends, or all");
    app.add_option("--alpha", p.tubes.alpha, "decomposition threshold exponent");
    app.add_option("--triples", p.tubes.triples, "random candidate triples for decompose");
    app.add_option("--rho", p.tubes.rho, "two-ends exponent");
    app.add_option("--anchor", p.tubes.anchor, "hairbrush anchor tube id");
    app.add_option("--wolff-samples", p.tubes.wolff_samples, "sampled prisms");
    app.add_option("--two-ends-tubes", p.tubes.two_ends_tubes, "tubes reduced by two-ends");
  } else if (cmd == "incidence") {
    app.add_option("--points", p.incidence.points_file, "points CSV");
    app.add_option("--curves", p.incidence.curves_file, "curves CSV");
    app.add_flag("--generate", p.incidence.generate, "use the discrete Szemeredi-Trotter generator");
    app.add_option("--delta", p.incidence.delta, "generator scale 1/2^k");
    app.add_option("--A", p.incidence.A, "generator pair multiplicity cap");
    app.add_option("--D", p.incidence.D, "partition degree or auto");
    app.add_option("--r", p.incidence.r, "incidence radius (default delta, or 0.01 for files)");
    app.add_flag("--oracle", p.incidence.oracle, "assert partition route == brute force");
  } else if (cmd == "replay") {
    app.add_option("manifest", p.manifest, "manifest.json of an earlier run")->required();
  }
}

// Effective arguments: every option except the local ones, in declaration order.
std::vector<std::string> effective_args(const CLI::App& app, const std::string& cmd) {
  std::vector<std::string> out{cmd};
  for (const CLI::Option* o : app.get_options()) {
    const std::string name = o->get_lnames().empty() ? "" : o->get_lnames()[0];
    if (name.empty() || name == "help" || kLocalOptions.count(name)) continue;
    if (o->get_expected_max() == 0) {  // flag
      if (o->count() > 0 && o->as<bool>()) out.push_back("--" + name);
      continue;
    }
    const auto res = o->results();
    std::string value;
    if (!res.empty())
      value = res.back();
    else if (!o->get_default_str().empty())
      value = o->get_default_str();
    else
      continue;
    out.push_back("--" + name);
    out.push_back(value);
  }
  return out;
}

json config_snapshot(const std::vector<std::string>& eff) {
  json j = json::object();
  for (std::size_t i = 1; i < eff.size(); ++i) {
    const std::string key = eff[i].substr(2);
    if (i + 1 < eff.size() && eff[i + 1].rfind("--", 0) != 0) {
      j[key] = eff[i + 1];
      ++i;
    } else {
      j[key] = true;
    }
  }
  return j;
}

Outcome execute_command(const std::string& cmd, const std::vector<std::string>& user_args, std::ostream& out,
                        std::ostream& err);

Outcome replay(const Parsed& p, bool out_given, std::ostream& out, std::ostream& err) {
  const fs::path mpath(p.manifest);
  const RunManifest m = RunManifest::from_json(json::parse(read_text(mpath)));
  if (m.effective_args.empty()) throw InvalidArgument("manifest has no arguments");
  const fs::path old_dir = mpath.parent_path();
  std::vector<std::string> args(m.effective_args.begin() + 1, m.effective_args.end());
  args.push_back("--out");
  args.push_back(out_given ? p.common.out_root : old_dir.parent_path().string());
  args.push_back("--threads");
  args.push_back(std::to_string(p.common.threads));
  std::ostringstream sink;
  Outcome o = execute_command(m.effective_args[0], args, sink, err);
  if (o.code == kUsage || o.code == kResourceRefusal) return o;

  std::vector<std::string> files{"report.json"};
  files.insert(files.end(), m.outputs.begin(), m.outputs.end());
  json diff = json::array();
  for (const auto& f : files) {
    const bool a = fs::exists(old_dir / f), b = fs::exists(o.dir / f);
    if (!a || !b || read_text(old_dir / f) != read_text(o.dir / f)) diff.push_back(f);
  }
  json summary = {{"original", old_dir.string()},
                  {"replay", o.dir.string()},
                  {"compared", files},
                  {"differing", diff},
                  {"identical", diff.empty()}};
  if (p.common.format == "csv") {
    out << "file,identical\n";
    for (const auto& f : files)
      out << f << "," << (std::find(diff.begin(), diff.end(), f) == diff.end() ? "true" : "false") << "\n";
  } else {
    out << summary.dump(2) << "\n";
  }
  return {diff.empty() ? kPass : kVerdictFailure, o.dir};
}

Outcome execute_command(const std::string& cmd, const std::vector<std::string>& user_args, std::ostream& out,
                        std::ostream& err) {
  Parsed p;
  CLI::App app("kakeya-lab " + cmd, "kakeya-lab " + cmd);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  add_common(app, p);
  add_command_options(app, cmd, p);

  // defaults < config file < KAKEYA_SEED < flags
  std::vector<std::string> tokens;
  const std::string config_path = find_config_path(user_args);
  json config = json::object();
  if (!config_path.empty()) {
    try {
      config = json::parse(read_text(config_path));
    } catch (const json::exception& e) {
      throw InvalidArgument(config_path + ": " + e.what());
    }
    if (!config.is_object()) throw InvalidArgument(config_path + ": config must be a JSON object");
    append_config_tokens(config, tokens);
    if (config.contains(cmd) && config[cmd].is_object()) append_config_tokens(config[cmd], tokens);
  }
  if (const char* env = std::getenv("KAKEYA_SEED"); env && *env) {
    const std::string s(env);
    if (s.find_first_not_of("0123456789") != std::string::npos) throw InvalidArgument("KAKEYA_SEED must be an integer");
    tokens.push_back("--seed");
    tokens.push_back(s);
  }
  tokens.insert(tokens.end(), user_args.begin(), user_args.end());
  std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return {kPass, {}};
  } catch (const CLI::ParseError& e) {
    err << "kakeya-lab " << cmd << ": " << e.what() << "\n";
    return {kUsage, {}};
  }
  set_default_threads(p.common.threads);
  if (cmd == "replay") return replay(p, app.get_option("--out")->count() > 0, out, err);

  detail::Estimate est;
  if (cmd == "sl2-ring")
    est = detail::estimate(p.ring, p.common);
  else if (cmd == "regulus")
    est = detail::estimate(p.regulus, p.common);
  else if (cmd == "tubes")
    est = detail::estimate(p.tubes, p.common);
  else
    est = detail::estimate(p.incidence, p.common);
  est.detail["memory_bytes"] = est.bytes;
  est.detail["max_memory_bytes"] = p.common.max_memory_mb * 1048576.0;
  if (p.common.dry_run) {
    out << json{{"command", cmd}, {"estimate", est.detail}}.dump(2) << "\n";
    return {kPass, {}};
  }
  if (est.bytes > p.common.max_memory_mb * 1048576.0) {
    err << "kakeya-lab " << cmd << ": refused, estimated " << est.bytes / 1048576.0 << " MB exceeds "
        << p.common.max_memory_mb << " MB\n";
    return {kResourceRefusal, {}};
  }

  const auto eff = effective_args(app, cmd);
  RunManifest manifest;
  manifest.command_line = user_args;
  manifest.command_line.insert(manifest.command_line.begin(), cmd);
  manifest.effective_args = eff;
  manifest.config = config_snapshot(eff);
  manifest.seed = p.common.seed;
  manifest.timestamp = utc_timestamp();

  RunContext ctx;
  const fs::path root(p.common.out_root);
  const std::string stem = manifest.timestamp + "-" + short_hash(eff);
  ctx.dir = root / stem;
  for (int k = 2; fs::exists(ctx.dir); ++k) ctx.dir = root / (stem + "-" + std::to_string(k));
  fs::create_directories(ctx.dir);

  try {
    if (cmd == "sl2-ring")
      detail::execute(p.ring, p.common, ctx);
    else if (cmd == "regulus")
      detail::execute(p.regulus, p.common, ctx);
    else if (cmd == "tubes")
      detail::execute(p.tubes, p.common, ctx);
    else
      detail::execute(p.incidence, p.common, ctx);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(ctx.dir, ec);
    throw;
  }

  bool pass = true;
  json exps = json::array();
  for (const auto& r : ctx.reports) {
    exps.push_back(r.to_json());
    pass = pass && r.all_pass();
  }
  const json report = {{"command", cmd}, {"seed", p.common.seed}, {"params", ctx.params},
                       {"experiments", exps}, {"pass", pass}};
  write_text(ctx.dir / "report.json", report.dump(2) + "\n");
  manifest.params = ctx.params;
  manifest.outputs = ctx.outputs;
  write_text(ctx.dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  print_summary(out, p.common.format, report, ctx.dir);
  return {pass ? kPass : kVerdictFailure, ctx.dir};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage();
    return kUsage;
  }
  if (args[0] == "--help" || args[0] == "-h") {
    out << usage();
    return kPass;
  }
  if (args[0] == "--version") {
    out << kVersion << "\n";
    return kPass;
  }
  if (std::find(kCommands.begin(), kCommands.end(), args[0]) == kCommands.end()) {
    err << "kakeya-lab: unknown command '" << args[0] << "'\n" << usage();
    return kUsage;
  }
  try {
    return execute_command(args[0], std::vector<std::string>(args.begin() + 1, args.end()), out, err).code;
  } catch (const ResourceError& e) {
    err << "kakeya-lab " << args[0] << ": resource refusal: " << e.what() << "\n";
    return kResourceRefusal;
  } catch (const std::bad_alloc&) {
    err << "kakeya-lab " << args[0] << ": out of memory\n";
    return kResourceRefusal;
  } catch (const std::exception& e) {
    err << "kakeya-lab " << args[0] << ": " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace kakeya::lab
