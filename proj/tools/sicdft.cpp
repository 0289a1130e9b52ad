// Command-line front end.
//
//   sicdft <task> [--config file.json] [--system NAME] [--scheme A,B] [--out path]
//                 [--format csv|json] [--verbose]
//
// Exit status: 0 all runs converged and outputs written, 1 some run did not
// converge, 2 configuration error, 3 I/O error.

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sicdft/sicdft.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sicdft::ConfigurationError("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-space SIC-DFT solver and finite-field polarizability harness"};
  app.set_version_flag("--version", std::string(sicdft::kVersion));
  app.require_subcommand(1, 1);

  std::string config_path, system, schemes, out_path, format;
  bool verbose = false;
  const std::vector<std::pair<std::string, std::string>> tasks{
      {"scf", "ground state per scheme"},
      {"polarizability", "finite-field polarizability per scheme"},
      {"chain-series", "H_n chains with 2/3 a0 bond alternation"},
      {"h4-sweep", "two H2 molecules at varying distance"},
      {"compare", "polarizability of one system across schemes"}};
  for (const auto& [name, help] : tasks) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--system", system, "builtin system, e.g. h-chain(4) or h2:1d");
    sub->add_option("--scheme", schemes, "comma-separated scheme ids");
    sub->add_option("--out", out_path, "output path (default: standard output)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--verbose", verbose, "per-iteration JSON trace on standard error");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string task = app.get_subcommands().front()->get_name();

  sicdft::RunConfig cfg;
  sicdft::RunOptions opt;
  try {
    sicdft::Json doc = config_path.empty() ? sicdft::Json::object() : sicdft::Json::parse(read_file(config_path));
    if (!doc.is_object()) throw sicdft::ConfigurationError("config: top level must be an object");
    doc["task"] = task;
    if (!system.empty()) doc["system"] = system;
    if (!schemes.empty()) doc["scheme"] = split(schemes, ',');
    if (!out_path.empty()) doc["output"]["path"] = out_path;
    if (!format.empty()) doc["output"]["format"] = format;
    cfg = sicdft::parse_config(doc);
    opt.threads = sicdft::threads_from_environment();
  } catch (const sicdft::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return sicdft::kExitConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return sicdft::kExitConfigError;
  }

  std::mutex log_lock;
  if (verbose) {
    opt.trace = [&](const std::string& sys, sicdft::SchemeId scheme, const sicdft::IterationTrace& t) {
      const sicdft::Json line{{"event", "iteration"}, {"system", sys},          {"scheme", sicdft::to_string(scheme)},
                              {"iteration", t.iteration}, {"energy", t.energy}, {"variance", t.max_variance},
                              {"residual", t.residual},   {"step", t.step}};
      std::lock_guard lock(log_lock);
      std::cerr << line.dump() << "\n";
    };
    opt.progress = [&](const std::string& msg) {
      std::lock_guard lock(log_lock);
      std::cerr << sicdft::Json{{"event", "done"}, {"message", msg}}.dump() << "\n";
    };
  }

  sicdft::RunResult result;
  try {
    result = sicdft::execute(cfg, opt);
  } catch (const sicdft::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return sicdft::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sicdft::kExitNotConverged;
  }
  if (!sicdft::write_result(cfg, result)) {
    std::cerr << "error: cannot write output '" << cfg.output.path << "'\n";
    return sicdft::kExitIoError;
  }
  if (!result.all_converged()) {
    std::cerr << "warning: at least one run did not converge\n";
    return sicdft::kExitNotConverged;
  }
  return sicdft::kExitOk;
}
