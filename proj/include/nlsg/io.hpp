#pragma once
// CSV serialization for grid functions and trajectories.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "nlsg/semigroup.hpp"

namespace nlsg {

/// Shortest round-trip representation of a double.
inline std::string format_double(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  out << "t,norm_l1,norm_l2,norm_linf,mass\r\n";
  for (const auto& r : tr.records)
    out << format_double(r.t) << ',' << format_double(r.l1) << ',' << format_double(r.l2) << ','
        << format_double(r.linf) << ',' << format_double(r.mass) << "\r\n";
}

/// One value per row under the header "u".
inline void write_grid_function_csv(std::ostream& out, const GridFunction& u) {
  out << "u\r\n";
  for (double v : u.values()) out << format_double(v) << "\r\n";
}

/// Sidecar header {n, weights-policy, domain} for a grid function on `grid`.
inline nlohmann::json grid_function_header(const Grid& grid) {
  nlohmann::json domain = nlohmann::json::array();
  for (int a = 0; a < grid.dim(); ++a) domain.push_back({{"lo", grid.lo(a)}, {"hi", grid.hi(a)}, {"nodes", grid.nodes(a)}});
  return {{"n", grid.size()},
          {"weights-policy", {{"kind", "uniform"}, {"weight", grid.cell_volume()}}},
          {"domain", domain}};
}

inline void save_grid_function(const std::string& csv_path, const Grid& grid, const GridFunction& u) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw DomainError("cannot write '" + csv_path + "'");
  write_grid_function_csv(csv, u);
  std::ofstream side(csv_path + ".json");
  side << grid_function_header(grid).dump(2) << "\n";
}

/// Reads a file written by save_grid_function; the sidecar must describe `grid`.
inline GridFunction load_grid_function(const std::string& csv_path, const Grid& grid) {
  std::ifstream side(csv_path + ".json");
  if (!side) throw DomainError("missing sidecar '" + csv_path + ".json'");
  const auto header = nlohmann::json::parse(side);
  if (header.at("n").get<std::size_t>() != grid.size()) throw DomainError("sidecar node count does not match the grid");
  std::ifstream csv(csv_path);
  std::string line;
  std::getline(csv, line);
  std::vector<double> v;
  while (std::getline(csv, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    v.push_back(std::stod(line));
  }
  return GridFunction(grid.space(), std::move(v));
}

}  // namespace nlsg
