#pragma once

#include "morph/fem/material.hpp"
#include "morph/fem/mesh.hpp"
#include "morph/json_io.hpp"

#include <string>

namespace morph::fem {

// Mesh document:
//   { "element_kind": "hex8" | "quad4",
//     "nodes": [[x, y, z], ...],                      (meters)
//     "elements": [[n0, n1, ...], ...],               (0-based)
//     "dirichlet": { "<node id>": [ux, uy, uz], ... },
//     "neumann": [ { "nodes": [...], "traction": [tx, ty, tz] }, ... ] }  (Pascals)

Mesh mesh_from_json(const Json& doc);
Json mesh_to_json(const Mesh& mesh);
Mesh load_mesh(const std::string& path);

// Material document:
//   { "law": "linear", "E": ..., "nu": ... }
//   { "law": "neo-hookean", "lambda": ..., "mu": ... }  or with "E", "nu"
Json law_to_json(const MaterialLaw& law);
MaterialLaw law_from_json(const Json& doc, const std::string& context);

}  // namespace morph::fem
