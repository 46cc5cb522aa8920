#pragma once

#include "morph/json_io.hpp"
#include "morph/mor/separated_solution.hpp"

#include <string>

namespace morph::mor {

// Separated-solution file, version 1:
//   line 1: JSON header terminated by '\n'
//     { "format": "morph-separated-solution", "version": 1, "rank": r,
//       "dim": d, "num_nodes": n, "method": "pgd" | "sparse-pgd" | "pod",
//       "normalization": "unit-space-modes",
//       "parameters": [ { "name", "lower", "upper", "grid": [...] }, ... ],
//       "mesh": "<reference>", "material": { ... },
//       "encoding": "f64le", "layout": [ "space_modes", "param_modes[0]", ... ] }
//   then raw little-endian float64 arrays in layout order, each column-major
//   (space_modes: n*d rows by r columns; param_modes[k]: grid_k rows by r columns).

inline constexpr int kSolutionFormatVersion = 1;

Json solution_header(const SeparatedSolution& sol);
void save_solution(const std::string& path, const SeparatedSolution& sol);
SeparatedSolution load_solution(const std::string& path);

std::string serialize_solution(const SeparatedSolution& sol);
SeparatedSolution deserialize_solution(const std::string& bytes, const std::string& source);

}  // namespace morph::mor
