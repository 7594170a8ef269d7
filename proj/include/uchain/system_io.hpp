#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uchain/error.hpp"
#include "uchain/space.hpp"
#include "uchain/systems.hpp"

namespace uchain {

/// Optional `analysis` block of a system file. Every CLI flag has a key
/// here; flags given on the command line win.
struct AnalysisSettings {
  std::optional<double> epsilon;
  std::optional<int> basis;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> nmax;
  std::optional<std::size_t> length;
  std::optional<std::string> format;
  std::optional<std::string> out;
  std::optional<std::string> dump_graph;
  std::optional<std::string> export_orbit;
};

struct SystemDocument {
  SystemSpec system;
  AnalysisSettings analysis;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) throw error(errc::validation, where + it.key() + ": unknown key");
}

inline const json* find_key(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw error(errc::validation, field + ": expected a string");
  return v.get<std::string>();
}

inline double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw error(errc::validation, field + ": expected a number");
  return v.get<double>();
}

inline std::uint64_t get_unsigned(const json& v, const std::string& field) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw error(errc::validation, field + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::size_t line_of(const std::string& text, std::size_t byte, std::size_t* column) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  *column = col;
  return line;
}

inline AnalysisSettings parse_analysis(const json& a) {
  if (!a.is_object()) throw error(errc::validation, "analysis: expected a mapping");
  reject_unknown(a, {"epsilon", "basis", "horizon", "trials", "seed", "nmax", "length", "format", "out", "dump_graph",
                     "export_orbit"},
                 "analysis.");
  AnalysisSettings s;
  if (auto v = find_key(a, "epsilon")) s.epsilon = get_number(*v, "analysis.epsilon");
  if (auto v = find_key(a, "basis")) s.basis = static_cast<int>(get_unsigned(*v, "analysis.basis"));
  if (auto v = find_key(a, "horizon")) s.horizon = get_unsigned(*v, "analysis.horizon");
  if (auto v = find_key(a, "trials")) s.trials = get_unsigned(*v, "analysis.trials");
  if (auto v = find_key(a, "seed")) s.seed = get_unsigned(*v, "analysis.seed");
  if (auto v = find_key(a, "nmax")) s.nmax = get_unsigned(*v, "analysis.nmax");
  if (auto v = find_key(a, "length")) s.length = get_unsigned(*v, "analysis.length");
  if (auto v = find_key(a, "format")) s.format = get_string(*v, "analysis.format");
  if (auto v = find_key(a, "out")) s.out = get_string(*v, "analysis.out");
  if (auto v = find_key(a, "dump_graph")) s.dump_graph = get_string(*v, "analysis.dump_graph");
  if (auto v = find_key(a, "export_orbit")) s.export_orbit = get_string(*v, "analysis.export_orbit");
  return s;
}

inline SpacePtr parse_space(const json& doc, Geometry geometry) {
  const json* grid = find_key(doc, "grid_n");
  const json* points = find_key(doc, "points");
  const json* dim = find_key(doc, "dimension");
  if (grid && points) throw error(errc::validation, "grid_n: give either grid_n or points, not both");
  if (!grid && !points) throw error(errc::validation, "grid_n: one of grid_n or points is required");
  if (dim && geometry != Geometry::product_of_circles)
    throw error(errc::validation, "dimension: only product-of-circles takes a dimension");

  if (points) {
    if (!points->is_array() || points->empty()) throw error(errc::validation, "points: expected a non-empty list");
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < points->size(); ++i) {
      const json& p = (*points)[i];
      const std::string field = "points[" + std::to_string(i) + "]";
      if (p.is_number()) {
        pts.push_back({p.get<double>()});
      } else if (p.is_array()) {
        std::vector<double> c;
        for (const auto& v : p) c.push_back(get_number(v, field));
        pts.push_back(std::move(c));
      } else {
        throw error(errc::validation, field + ": expected a number or a coordinate list");
      }
    }
    try {
      return share(FinitePhaseSpace::from_points(pts, geometry));
    } catch (const error& e) {
      throw error(errc::validation, "points: " + e.detail());
    }
  }

  const auto n = get_unsigned(*grid, "grid_n");
  try {
    switch (geometry) {
      case Geometry::interval: return share(FinitePhaseSpace::interval_grid(n));
      case Geometry::circle: return share(FinitePhaseSpace::circle_grid(n));
      case Geometry::product_of_circles: {
        const auto d = dim ? get_unsigned(*dim, "dimension") : 2;
        return share(FinitePhaseSpace::torus_grid(n, d));
      }
      case Geometry::discrete:
        if (n < 2 || !std::has_single_bit(n) || n > 4096)
          throw error(errc::validation, "grid_n: discrete grids are Cantor spaces of size 2^k, 2 <= size <= 4096");
        return share(cantor_space(std::countr_zero(n)));
    }
  } catch (const error& e) {
    if (e.code() == errc::validation) throw;
    throw error(errc::validation, "grid_n: " + e.detail());
  }
  throw error(errc::validation, "geometry: unsupported");
}

inline SystemSpec parse_system(const json& doc) {
  if (!doc.is_object()) throw error(errc::validation, "document: expected a mapping at top level");
  reject_unknown(doc, {"name", "map", "geometry", "grid_n", "points", "dimension", "params", "analysis"}, "");
  const json* name_v = find_key(doc, "name");
  const json* map_v = find_key(doc, "map");
  const json* geom_v = find_key(doc, "geometry");
  if (!map_v) throw error(errc::validation, "map: required");
  if (!geom_v) throw error(errc::validation, "geometry: required");
  const std::string map_s = get_string(*map_v, "map");
  const auto kind = parse_map(map_s);
  if (!kind) throw error(errc::validation, "map: unknown map '" + map_s + "'");
  const std::string geom_s = get_string(*geom_v, "geometry");
  const auto geometry = parse_geometry(geom_s);
  if (!geometry) throw error(errc::validation, "geometry: unknown geometry '" + geom_s + "'");
  const std::string name = name_v ? get_string(*name_v, "name") : map_s;
  if (name.empty()) throw error(errc::validation, "name: must be non-empty");

  const json empty = json::object();
  const json* params = find_key(doc, "params");
  if (!params) params = &empty;
  if (!params->is_object()) throw error(errc::validation, "params: expected a mapping");
  reject_unknown(*params, {"alpha", "slope", "levels", "cycles"}, "params.");
  auto param = [&](const char* key) { return find_key(*params, key); };
  auto only = [&](std::initializer_list<const char*> allowed) {
    for (auto it = params->begin(); it != params->end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) throw error(errc::validation, "params." + it.key() + ": not a parameter of " + map_s);
    }
  };

  const SpacePtr space = parse_space(doc, *geometry);
  switch (*kind) {
    case MapKind::rotation: {
      only({"alpha"});
      const json* a = param("alpha");
      if (!a) throw error(errc::validation, "params.alpha: rotation requires alpha");
      return SystemSpec::rotation(space, get_number(*a, "params.alpha"), name);
    }
    case MapKind::doubling: only({}); return SystemSpec::doubling(space, name);
    case MapKind::tent: {
      only({"slope"});
      const json* s = param("slope");
      return SystemSpec::tent(space, s ? get_number(*s, "params.slope") : 2.0, name);
    }
    case MapKind::identity: only({}); return SystemSpec::identity(space, name);
    case MapKind::square: only({}); return SystemSpec::square(space, name);
    case MapKind::permutation: {
      only({"cycles"});
      std::vector<std::vector<Index>> cycles;
      if (const json* c = param("cycles")) {
        if (!c->is_array()) throw error(errc::validation, "params.cycles: expected a list of index lists");
        for (const auto& cyc : *c) {
          if (!cyc.is_array() || cyc.empty())
            throw error(errc::validation, "params.cycles: expected non-empty index lists");
          std::vector<Index> one;
          for (const auto& v : cyc) one.push_back(static_cast<Index>(get_unsigned(v, "params.cycles")));
          cycles.push_back(std::move(one));
        }
      }
      return SystemSpec::permutation(space, std::move(cycles), name);
    }
    case MapKind::odometer: {
      only({"levels"});
      const json* l = param("levels");
      const int levels = l ? static_cast<int>(get_unsigned(*l, "params.levels"))
                           : static_cast<int>(std::countr_zero(space->size()));
      return SystemSpec::odometer(space, levels, name);
    }
  }
  throw error(errc::validation, "map: unsupported");
}

}  // namespace detail

/// Parses a system document (JSON; `//` and `/* */` comments allowed).
inline SystemDocument parse_system_document(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t col = 0;
    const std::size_t line = detail::line_of(text, e.byte, &col);
    std::string what = e.what();
    if (auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    throw error(errc::malformed_spec, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }
  SystemDocument d{detail::parse_system(doc), {}};
  if (auto a = detail::find_key(doc, "analysis")) d.analysis = detail::parse_analysis(*a);
  return d;
}

inline SystemDocument load_system_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::malformed_spec, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_system_document(buf.str());
  } catch (const error& e) {
    throw error(e.code(), path + ": " + e.detail());
  }
}

inline SystemSpec parse_system(const std::string& text) { return parse_system_document(text).system; }
inline SystemSpec load_system(const std::string& path) { return load_system_document(path).system; }

}  // namespace uchain
