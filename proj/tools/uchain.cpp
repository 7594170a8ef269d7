#include <cstdlib>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uchain/uchain.hpp"

namespace {

constexpr int kLibraryError = 1;
constexpr int kUsageError = 2;

int usage(const std::string& msg) {
  std::cerr << "uchain: usage-error: " << msg << "\n";
  return kUsageError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-model chain, mixing, shadowing and recurrence analysis of dynamical systems"};
  app.name("uchain");
  app.set_version_flag("--version", std::string(uchain::kToolVersion));

  std::string command, spec;
  std::optional<double> epsilon;
  std::optional<int> basis;
  std::optional<std::size_t> horizon, trials, nmax, length, threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format, out, dump_graph, export_orbit;

  std::string commands;
  for (auto c : uchain::kAllCommands) commands += (commands.empty() ? "" : "|") + std::string(uchain::command_name(c));
  app.add_option("command", command, commands)->required();
  app.add_option("--spec", spec, "System file (JSON)")->required();
  app.add_option("--epsilon", epsilon, "Graph and target scale (default 2h)");
  app.add_option("--basis", basis, "Number of scaled basis levels");
  app.add_option("--horizon", horizon, "Return-time horizon (default 200)");
  app.add_option("--trials", trials, "Pseudo-orbits per mode and level (default 20)");
  app.add_option("--seed", seed, "Seed; required for shadowing, dichotomy, omega, full");
  app.add_option("--nmax", nmax, "Largest iterate for total transitivity (default 4)");
  app.add_option("--length", length, "Pseudo-orbit length (default 100)");
  app.add_option("--format", format, "text|machine (default text)");
  app.add_option("--out", out, "Write the report here instead of stdout");
  app.add_option("--dump-graph", dump_graph, "Write the transition graph as 'src dst' lines");
  app.add_option("--export-orbit", export_orbit, "Write the shadowing counterexample pseudo-orbit");
  app.add_option("--threads", threads, "Worker thread cap (overrides UCHAIN_THREADS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kUsageError;
  }

  const auto cmd = uchain::parse_command(command);
  if (!cmd) return usage("unknown command '" + command + "'");
  if (threads) {
    if (*threads < 1) return usage("--threads must be >= 1");
    uchain::set_thread_limit(static_cast<unsigned>(*threads));
  }

  try {
    auto doc = uchain::load_system_document(spec);
    const auto& a = doc.analysis;
    auto req = uchain::request_from(doc, *cmd);
    if (epsilon) req.epsilon = epsilon;
    if (basis) req.basis_levels = basis;
    if (horizon) req.horizon = *horizon;
    if (trials) req.trials = *trials;
    if (seed) req.seed = seed;
    if (nmax) req.n_max = *nmax;
    if (length) req.length = *length;
    if (dump_graph) req.dump_graph = dump_graph;
    if (export_orbit) req.export_orbit = export_orbit;
    const std::string fmt_s = format.value_or(a.format.value_or("text"));
    const auto fmt = uchain::parse_format(fmt_s);
    if (!fmt) return usage("--format must be text or machine, got '" + fmt_s + "'");
    if (uchain::needs_seed(*cmd) && !req.seed)
      return usage(std::string(uchain::command_name(*cmd)) + " requires --seed");

    const std::string body = uchain::render(uchain::run(req), *fmt);
    const auto dest = out ? out : a.out;
    if (dest) {
      std::ofstream f(*dest, std::ios::binary);
      if (!f) throw uchain::error(uchain::errc::invalid_parameter, "cannot write '" + *dest + "'");
      f << body;
    } else {
      std::cout << body;
    }
  } catch (const uchain::error& e) {
    std::cerr << "uchain: " << e.what() << "\n";
    return kLibraryError;
  } catch (const std::exception& e) {
    std::cerr << "uchain: internal-error: " << e.what() << "\n";
    return kLibraryError;
  }
  return EXIT_SUCCESS;
}
