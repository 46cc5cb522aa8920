#include "morph/fem/mesh_io.hpp"

namespace morph::fem {

namespace {

Vec3 to_vec3(const Json& a, const std::string& context) {
  if (!a.is_array() || (a.size() != 3 && a.size() != 2)) {
    throw ParseError(context + ": expected a 2- or 3-component array");
  }
  Vec3 v = Vec3::Zero();
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

Mesh mesh_from_json(const Json& doc) {
  const auto kind = element_kind_from_string(require_field<std::string>(doc, "element_kind", "mesh"));
  const int npe = nodes_per_element(kind);
  std::vector<Vec3> nodes;
  for (const auto& n : require_field<Json>(doc, "nodes", "mesh")) nodes.push_back(to_vec3(n, "mesh.nodes"));
  std::vector<std::array<int, 8>> elements;
  for (const auto& e : require_field<Json>(doc, "elements", "mesh")) {
    if (!e.is_array() || static_cast<int>(e.size()) != npe) {
      throw ParseError("mesh.elements: expected " + std::to_string(npe) + " node ids per element");
    }
    std::array<int, 8> conn{};
    conn.fill(-1);
    for (int a = 0; a < npe; ++a) conn[a] = e[a].get<int>();
    elements.push_back(conn);
  }
  Mesh mesh(kind, std::move(nodes), std::move(elements));
  if (doc.contains("dirichlet")) {
    for (const auto& [key, value] : doc["dirichlet"].items()) {
      mesh.dirichlet[std::stoi(key)] = to_vec3(value, "mesh.dirichlet");
    }
  }
  if (doc.contains("neumann")) {
    for (const auto& f : doc["neumann"]) {
      TractionFacet facet;
      facet.nodes = require_field<std::vector<int>>(f, "nodes", "mesh.neumann");
      facet.traction = to_vec3(require_field<Json>(f, "traction", "mesh.neumann"), "mesh.neumann");
      mesh.neumann.push_back(std::move(facet));
    }
  }
  mesh.validate();
  return mesh;
}

Json mesh_to_json(const Mesh& mesh) {
  Json doc;
  doc["element_kind"] = to_string(mesh.kind());
  Json nodes = Json::array();
  for (const auto& p : mesh.nodes()) nodes.push_back({p.x(), p.y(), p.z()});
  doc["nodes"] = nodes;
  Json elems = Json::array();
  for (const auto& e : mesh.elements()) {
    Json row = Json::array();
    for (int a = 0; a < mesh.nodes_per_element(); ++a) row.push_back(e[a]);
    elems.push_back(row);
  }
  doc["elements"] = elems;
  Json dir = Json::object();
  for (const auto& [id, v] : mesh.dirichlet) dir[std::to_string(id)] = {v.x(), v.y(), v.z()};
  doc["dirichlet"] = dir;
  Json neu = Json::array();
  for (const auto& f : mesh.neumann) {
    neu.push_back({{"nodes", f.nodes}, {"traction", {f.traction.x(), f.traction.y(), f.traction.z()}}});
  }
  doc["neumann"] = neu;
  return doc;
}

Mesh load_mesh(const std::string& path) { return mesh_from_json(load_json_file(path)); }

Json law_to_json(const MaterialLaw& law) {
  if (law.kind == LawKind::Linear) return {{"law", "linear"}, {"E", law.young_E}, {"nu", law.poisson_nu}};
  return {{"law", "neo-hookean"}, {"lambda", law.lambda()}, {"mu", law.mu()}};
}

MaterialLaw law_from_json(const Json& doc, const std::string& context) {
  const auto kind = require_field<std::string>(doc, "law", context);
  MaterialLaw law;
  if (kind == "linear") {
    law = MaterialLaw::linear(require_field<double>(doc, "E", context), require_field<double>(doc, "nu", context));
  } else if (kind == "neo-hookean") {
    if (doc.contains("E")) {
      law = MaterialLaw::neo_hookean_from_young(require_field<double>(doc, "E", context),
                                                require_field<double>(doc, "nu", context));
    } else {
      law = MaterialLaw::neo_hookean(require_field<double>(doc, "lambda", context),
                                     require_field<double>(doc, "mu", context));
    }
  } else {
    throw ParseError(context + ": unknown law '" + kind + "'");
  }
  try {
    law.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(context + ": " + e.what());
  }
  return law;
}

}  // namespace morph::fem
