#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uchain/chain_graph.hpp"
#include "uchain/entourage.hpp"
#include "uchain/error.hpp"
#include "uchain/pseudo_orbit.hpp"
#include "uchain/recurrence.hpp"
#include "uchain/semigroup.hpp"
#include "uchain/shadowing.hpp"
#include "uchain/system_io.hpp"
#include "uchain/systems.hpp"

namespace uchain {

inline constexpr std::string_view kToolName = "uchain";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum class Command { axioms, graph, chains, mixing, diameter, shadowing, dichotomy, recurrence, omega, full };

inline constexpr Command kAllCommands[] = {Command::axioms,    Command::graph,     Command::chains, Command::mixing,
                                           Command::diameter,  Command::shadowing, Command::dichotomy,
                                           Command::recurrence, Command::omega,    Command::full};

constexpr std::string_view command_name(Command c) noexcept {
  switch (c) {
    case Command::axioms: return "axioms";
    case Command::graph: return "graph";
    case Command::chains: return "chains";
    case Command::mixing: return "mixing";
    case Command::diameter: return "diameter";
    case Command::shadowing: return "shadowing";
    case Command::dichotomy: return "dichotomy";
    case Command::recurrence: return "recurrence";
    case Command::omega: return "omega";
    case Command::full: return "full";
  }
  return "unknown";
}

inline std::optional<Command> parse_command(std::string_view s) {
  for (Command c : kAllCommands)
    if (command_name(c) == s) return c;
  return std::nullopt;
}

/// Stochastic commands refuse to run without an explicit seed.
constexpr bool needs_seed(Command c) noexcept {
  return c == Command::shadowing || c == Command::dichotomy || c == Command::omega || c == Command::full;
}

enum class Format { text, machine };

inline std::optional<Format> parse_format(std::string_view s) {
  if (s == "text") return Format::text;
  if (s == "machine") return Format::machine;
  return std::nullopt;
}

struct AnalysisRequest {
  explicit AnalysisRequest(SystemSpec s, Command c = Command::full) : system(std::move(s)), command(c) {}

  SystemSpec system;
  Command command = Command::full;
  /// Graph and target scale; 2h when absent.
  std::optional<double> epsilon;
  /// Number of scaled basis levels; the default for the space when absent.
  std::optional<int> basis_levels;
  std::size_t horizon = 200;
  std::size_t trials = 20;
  std::optional<std::uint64_t> seed;
  std::size_t n_max = 4;
  std::size_t length = 100;
  /// Optional side outputs.
  std::optional<std::string> dump_graph;
  std::optional<std::string> export_orbit;

  double scale() const { return epsilon.value_or(2.0 * system.phase_space().resolution()); }

  void validate() const {
    if (epsilon && !(*epsilon > 0.0)) throw error(errc::invalid_parameter, "epsilon must be > 0");
    if (basis_levels && *basis_levels < 1) throw error(errc::invalid_parameter, "basis must have >= 1 level");
    if (horizon < 1) throw error(errc::invalid_parameter, "horizon must be >= 1");
    if (trials < 1) throw error(errc::invalid_parameter, "trials must be >= 1");
    if (n_max < 1) throw error(errc::invalid_parameter, "nmax must be >= 1");
    if (length < 1) throw error(errc::invalid_parameter, "length must be >= 1");
    if (needs_seed(command) && !seed)
      throw error(errc::invalid_parameter, std::string(command_name(command)) + " requires --seed");
  }
};

/// Request for `command` carrying the analysis settings stored in the file.
inline AnalysisRequest request_from(const SystemDocument& doc, Command command) {
  const auto& a = doc.analysis;
  AnalysisRequest req(doc.system, command);
  req.epsilon = a.epsilon;
  req.basis_levels = a.basis;
  req.horizon = a.horizon.value_or(req.horizon);
  req.trials = a.trials.value_or(req.trials);
  req.seed = a.seed;
  req.n_max = a.nmax.value_or(req.n_max);
  req.length = a.length.value_or(req.length);
  req.dump_graph = a.dump_graph;
  req.export_orbit = a.export_orbit;
  return req;
}

using Report = nlohmann::ordered_json;

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson index_list(const std::vector<Index>& v) {
  ojson a = ojson::array();
  for (Index i : v) a.push_back(i);
  return a;
}

template <class T>
ojson optional_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

inline ojson system_json(const SystemSpec& s) {
  const auto& space = s.phase_space();
  ojson j;
  j["name"] = s.name();
  j["map"] = std::string(map_name(s.map()));
  j["geometry"] = std::string(geometry_name(space.geometry()));
  j["points"] = space.size();
  j["dimension"] = space.dimension();
  j["resolution"] = space.resolution();
  j["gap"] = optional_json(space.gap());
  ojson p = ojson::object();
  switch (s.map()) {
    case MapKind::rotation: p["alpha"] = s.alpha(); break;
    case MapKind::tent: p["slope"] = s.slope(); break;
    case MapKind::odometer: p["levels"] = s.levels(); break;
    case MapKind::permutation: {
      ojson c = ojson::array();
      for (const auto& cyc : s.cycles()) c.push_back(index_list(cyc));
      p["cycles"] = c;
      break;
    }
    default: break;
  }
  j["params"] = p;
  return j;
}

inline ojson orbit_json(const PseudoOrbit& o) {
  ojson j;
  j["mode"] = std::string(mode_name(o.mode));
  j["seed"] = o.seed;
  j["entourage"] = o.entourage_label;
  j["steps"] = o.length();
  j["states"] = index_list(o.states);
  return j;
}

inline ojson shadowing_json(const ShadowingEstimate& s) {
  ojson j;
  j["target"] = s.target;
  j["trials"] = s.trials;
  j["length"] = s.length;
  j["seed"] = s.seed;
  j["found"] = s.found();
  j["modulus_level"] = optional_json(s.modulus_level);
  j["modulus_label"] = optional_json(s.modulus_label);
  j["modulus_scale"] = optional_json(s.modulus_scale);
  ojson levels = ojson::array();
  for (const auto& l : s.scanned) {
    ojson e;
    e["level"] = l.level;
    e["label"] = l.label;
    e["scale"] = optional_json(l.scale);
    e["orbits_checked"] = l.orbits_checked;
    e["failures"] = l.failures;
    e["discarded"] = l.discarded;
    e["skipped"] = l.skipped;
    levels.push_back(e);
  }
  j["scanned"] = levels;
  if (s.counterexample) {
    ojson c = orbit_json(*s.counterexample);
    if (s.counterexample_report) {
      c["failure_step"] = optional_json(s.counterexample_report->failure_step);
      c["best_candidate"] = optional_json(s.counterexample_report->best_candidate);
    }
    j["counterexample"] = c;
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

inline ojson classification_json(const ReturnTimeSet& r) {
  const auto c = classify_return_set(r);
  ojson j;
  j["times"] = r.times.size();
  j["first"] = r.times.empty() ? ojson(nullptr) : ojson(r.times.front());
  j["class"] = std::string(return_class_name(c.label));
  j["syndetic_gap"] = optional_json(c.syndetic_k);
  j["thick"] = c.thick;
  j["contains_multiples_of"] = optional_json(c.contains_k);
  j["horizon"] = c.horizon;
  return j;
}

/// Shared state for one run so `full` builds each artifact once.
struct Session {
  const AnalysisRequest& req;
  Entourage e;
  std::optional<UniformityBasis> basis_;
  std::optional<TransitionGraph> graph_;
  std::optional<ChainAnalysis> chains_;

  explicit Session(const AnalysisRequest& r) : req(r), e(Entourage::epsilon(r.system.space(), r.scale())) {}

  const UniformityBasis& basis() {
    if (!basis_)
      basis_ = req.basis_levels ? epsilon_basis(req.system.space(), *req.basis_levels) : epsilon_basis(req.system.space());
    return *basis_;
  }
  const TransitionGraph& graph() {
    if (!graph_) graph_ = build_transition_graph(req.system, e);
    return *graph_;
  }
  const ChainAnalysis& chains() {
    if (!chains_) chains_ = analyze_chains(graph());
    return *chains_;
  }
};

inline ojson run_axioms(Session& s) {
  const auto& basis = s.basis();
  const auto rep = verify_uniformity_axioms(basis);
  ojson j;
  ojson levels = ojson::array();
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const auto& l = rep.levels[i];
    ojson e;
    e["label"] = l.label;
    e["scale"] = optional_json(basis[i].scale());
    e["pairs"] = basis[i].pair_count();
    e["contains_diagonal"] = l.diagonal;
    e["symmetric"] = l.symmetric;
    e["square_root_level"] = optional_json(l.square_root_level);
    e["nested"] = l.nested;
    e["continuity_level"] = optional_json(continuity_level(s.req.system, basis, i));
    levels.push_back(e);
  }
  j["levels"] = levels;
  j["floor_is_diagonal"] = rep.floor_is_diagonal;
  j["all_pass"] = rep.all_pass();
  j["first_failure"] = optional_json(rep.first_failure());
  return j;
}

inline void write_graph(const TransitionGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(errc::invalid_parameter, "cannot write '" + path + "'");
  for (std::size_t u = 0; u < g.size(); ++u)
    for (Index v : g.successors(u)) out << u << ' ' << v << '\n';
}

inline ojson run_graph(Session& s) {
  const auto& g = s.graph();
  if (s.req.dump_graph) write_graph(g, *s.req.dump_graph);
  ojson j;
  j["entourage"] = s.e.label();
  j["scale"] = s.req.scale();
  j["vertices"] = g.size();
  j["edges"] = g.edge_count();
  std::size_t lo = g.size(), hi = 0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    lo = std::min(lo, g.successors(v).size());
    hi = std::max(hi, g.successors(v).size());
  }
  j["min_out_degree"] = lo;
  j["max_out_degree"] = hi;
  return j;
}

inline ojson run_chains(Session& s) {
  const auto& a = s.chains();
  const std::size_t n = s.graph().size();
  ojson j;
  j["chain_transitive"] = a.is_strongly_connected;
  j["chain_recurrent_all"] = a.chain_recurrent.size() == n;
  j["chain_recurrent_count"] = a.chain_recurrent.size();
  j["chain_recurrent"] = index_list(a.chain_recurrent);
  j["components"] = a.components.count();
  ojson comps = ojson::array();
  for (std::size_t c = 0; c < a.components.count(); ++c) {
    if (a.period[c] == 0) continue;
    ojson e;
    e["id"] = c;
    e["size"] = a.components.members[c].size();
    e["period"] = a.period[c];
    ojson classes = ojson::array();
    for (const auto& cls : a.classes[c]) classes.push_back(index_list(cls));
    e["classes"] = classes;
    comps.push_back(e);
  }
  j["recurrent_components"] = comps;
  j["iota"] = a.is_strongly_connected ? ojson(a.period[0]) : ojson(nullptr);
  return j;
}

inline ojson run_mixing(Session& s) {
  const auto& g = s.graph();
  const auto& a = s.chains();
  ojson j;
  const bool mixing = is_chain_mixing(g);
  j["chain_mixing"] = mixing;
  j["iota"] = a.is_strongly_connected ? ojson(a.period[0]) : ojson(nullptr);
  ojson powers = ojson::array();
  bool all_powers = true;
  for (std::size_t k = 1; k <= s.req.n_max; ++k) {
    const bool ok = is_chain_transitive(k == 1 ? g : path_power_graph(g, k));
    all_powers = all_powers && ok;
    powers.push_back(ok);
  }
  j["n_max"] = s.req.n_max;
  j["power_chain_transitive"] = powers;
  j["totally_chain_transitive"] = all_powers;
  j["iterate_chain_transitive"] = is_totally_chain_transitive(s.req.system, s.e, s.req.n_max);
  j["cross_check_consistent"] = mixing == all_powers;
  if (mixing) {
    const auto [l1, l2] = find_coprime_cycles(g, 0);
    const GeneratorSet gens{l1, l2};
    const std::size_t m = chain_diameter(g);
    j["coprime_cycles"] = ojson::array({l1, l2});
    j["frobenius_bound"] = frobenius_bound(gens);
    j["length_bound"] = realizable_length_bound(gens, 2 * m);
  } else {
    j["coprime_cycles"] = nullptr;
    j["frobenius_bound"] = nullptr;
    j["length_bound"] = nullptr;
  }
  return j;
}

inline ojson run_diameter(Session& s) {
  ojson j;
  if (s.chains().is_strongly_connected) {
    j["diameter"] = chain_diameter(s.graph());
    j["reason"] = nullptr;
  } else {
    j["diameter"] = nullptr;
    j["reason"] = std::string(errc_name(errc::undefined_diameter));
  }
  return j;
}

inline ojson run_shadowing(Session& s) {
  const auto est = estimate_shadowing_modulus(s.req.system, s.e, s.basis(), s.req.trials, s.req.length, *s.req.seed);
  if (s.req.export_orbit && est.counterexample) {
    std::ofstream out(*s.req.export_orbit, std::ios::binary);
    if (!out) throw error(errc::invalid_parameter, "cannot write '" + *s.req.export_orbit + "'");
    write_pseudo_orbit(out, *est.counterexample);
  }
  return shadowing_json(est);
}

inline ojson run_dichotomy(Session& s) {
  const auto r = disconnectedness_dichotomy(s.req.system.space(), s.e, s.basis(), s.req.trials, s.req.length,
                                            *s.req.seed);
  ojson j;
  j["scale"] = r.scale;
  j["components"] = r.components;
  j["connected_at_scale"] = r.connected_at_scale;
  j["totally_disconnected_at_scale"] = r.totally_disconnected_at_scale;
  j["gap"] = r.gap;
  j["identity_shadowing"] = shadowing_json(r.shadowing);
  j["agreement"] = r.agreement;
  return j;
}

inline ojson run_recurrence(Session& s) {
  const auto& sys = s.req.system;
  const std::size_t n = sys.phase_space().size();
  const OrbitTable table(sys, s.req.horizon);
  const auto omega = nonwandering_points(sys, s.e, s.req.horizon, &table);
  const auto& cr = s.chains().chain_recurrent;
  bool inside = true;
  for (Index x : omega) inside = inside && std::binary_search(cr.begin(), cr.end(), x);
  ojson j;
  j["horizon"] = s.req.horizon;
  j["nonwandering_count"] = omega.size();
  j["nonwandering"] = index_list(omega);
  j["nonwandering_within_chain_recurrent"] = inside;

  const auto u = cross_section(s.e, 0);
  const auto v = cross_section(s.e, n / 2);
  j["probe_u"] = index_list(u);
  j["probe_v"] = index_list(v);
  j["return_u_u"] = classification_json(return_times(table, sys.phase_space(), u, u));
  j["return_u_v"] = classification_json(return_times(table, sys.phase_space(), u, v));
  j["point_return_0_u"] = classification_json(return_times(table, sys.phase_space(), {0}, u));
  j["weak_mixing_witness"] = optional_json(weak_mixing_witness(sys, u, v, s.req.horizon));
  const std::size_t transient = s.req.horizon / 2;
  j["omega_limit_0"] = transient < s.req.horizon ? index_list(omega_limit(sys, 0, transient, s.req.horizon))
                                                 : ojson(nullptr);
  return j;
}

inline ojson run_omega(Session& s) {
  const auto r = omega_restriction_shadowing(s.req.system, s.e, s.basis(), s.req.horizon, s.req.trials, s.req.length,
                                             *s.req.seed);
  ojson j;
  j["nonwandering"] = index_list(r.omega_hat);
  j["class_entourage"] = r.class_entourage;
  ojson classes = ojson::array();
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    ojson c;
    c["members"] = index_list(r.classes[i]);
    c["recurrent"] = static_cast<bool>(r.class_has_cycle[i]);
    classes.push_back(c);
  }
  j["classes"] = classes;
  j["full_space"] = shadowing_json(r.full);
  j["restricted"] = shadowing_json(r.restricted);
  j["agreement"] = r.agreement();
  return j;
}

}  // namespace detail

/// Runs one request. The report holds no timestamps, so equal requests give
/// equal reports regardless of thread count.
inline Report run(const AnalysisRequest& request) {
  request.validate();
  detail::Session s(request);
  Report rep;
  rep["schema_version"] = kSchemaVersion;
  rep["tool"] = {{"name", std::string(kToolName)}, {"version", std::string(kToolVersion)}};
  rep["seed"] = request.seed ? Report(*request.seed) : Report(nullptr);
  Report req;
  req["command"] = std::string(command_name(request.command));
  req["system"] = detail::system_json(request.system);
  req["epsilon"] = request.scale();
  req["basis_levels"] = static_cast<std::size_t>(s.basis().size() - 1);
  req["horizon"] = request.horizon;
  req["trials"] = request.trials;
  req["length"] = request.length;
  req["nmax"] = request.n_max;
  rep["request"] = req;

  Report results = Report::object();
  auto stage = [&](Command c, auto fn) {
    if (request.command == c || request.command == Command::full) results[std::string(command_name(c))] = fn(s);
  };
  stage(Command::axioms, detail::run_axioms);
  stage(Command::graph, detail::run_graph);
  stage(Command::chains, detail::run_chains);
  stage(Command::mixing, detail::run_mixing);
  stage(Command::diameter, detail::run_diameter);
  stage(Command::shadowing, detail::run_shadowing);
  stage(Command::recurrence, detail::run_recurrence);
  if (request.command == Command::dichotomy) results["dichotomy"] = detail::run_dichotomy(s);
  if (request.command == Command::omega) results["omega"] = detail::run_omega(s);
  rep["results"] = results;
  return rep;
}

namespace detail {

inline std::string scalar_text(const ojson& v) {
  if (v.is_null()) return "none";
  if (v.is_string()) return v.get<std::string>().empty() ? "none" : v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

inline bool is_flat_array(const ojson& v) {
  for (const auto& x : v)
    if (x.is_structured()) return false;
  return true;
}

inline void render_text(std::ostream& out, const ojson& v, int indent);

inline void render_line(std::ostream& out, const std::string& lead, const ojson& x, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (!x.is_structured()) {
    out << pad << lead << ' ' << scalar_text(x) << '\n';
  } else if (x.empty()) {
    out << pad << lead << " none\n";
  } else if (x.is_array() && is_flat_array(x)) {
    out << pad << lead;
    for (const auto& e : x) out << ' ' << scalar_text(e);
    out << '\n';
  } else {
    out << pad << lead << '\n';
    render_text(out, x, indent + 1);
  }
}

inline void render_text(std::ostream& out, const ojson& v, int indent) {
  if (v.is_array()) {
    for (const auto& e : v) render_line(out, "-", e, indent);
    return;
  }
  for (auto it = v.begin(); it != v.end(); ++it) render_line(out, it.key() + ":", it.value(), indent);
}

}  // namespace detail

/// Text: indented key/value summary with "none" for absent or empty values.
/// Machine: JSON with two-space indentation and a trailing newline.
inline std::string render(const Report& report, Format format) {
  std::ostringstream out;
  if (format == Format::machine) {
    out << report.dump(2) << '\n';
  } else {
    detail::render_text(out, report, 0);
  }
  return out.str();
}

}  // namespace uchain
