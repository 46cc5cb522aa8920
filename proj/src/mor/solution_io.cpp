#include "morph/mor/solution_io.hpp"

#include "morph/fem/mesh_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace morph::mor {

namespace {

void append_f64(std::string& out, const double* data, size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out.append(reinterpret_cast<const char*>(data), n * sizeof(double));
  } else {
    for (size_t i = 0; i < n; ++i) {
      uint64_t bits;
      std::memcpy(&bits, data + i, 8);
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
}

void read_f64(const std::string& in, size_t& pos, double* data, size_t n, const std::string& source) {
  if (pos + n * 8 > in.size()) throw ParseError(source + ": payload is truncated");
  for (size_t i = 0; i < n; ++i) {
    uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<uint64_t>(static_cast<unsigned char>(in[pos + 8 * i + b])) << (8 * b);
    std::memcpy(data + i, &bits, 8);
  }
  pos += n * 8;
}

}  // namespace

Json solution_header(const SeparatedSolution& sol) {
  Json params = Json::array();
  for (const auto& p : sol.parameter_space.params()) {
    params.push_back({{"name", p.name}, {"lower", p.lower}, {"upper", p.upper}, {"grid", p.grid}});
  }
  Json layout = Json::array({"space_modes"});
  for (size_t k = 0; k < sol.param_modes.size(); ++k) layout.push_back("param_modes[" + std::to_string(k) + "]");
  return {{"format", "morph-separated-solution"},
          {"version", kSolutionFormatVersion},
          {"rank", sol.rank()},
          {"dim", sol.dim},
          {"num_nodes", sol.num_nodes},
          {"method", to_string(sol.method)},
          {"normalization", "unit-space-modes"},
          {"parameters", params},
          {"mesh", sol.mesh_ref},
          {"material", fem::law_to_json(sol.law)},
          {"encoding", "f64le"},
          {"layout", layout}};
}

std::string serialize_solution(const SeparatedSolution& sol) {
  sol.validate();
  Json header = solution_header(sol);
  try {
    sol.law.validate();
  } catch (const ArgumentError&) {
    header.erase("material");  // placeholder law, nothing meaningful to record
  }
  std::string out = header.dump() + "\n";
  append_f64(out, sol.space_modes.data(), static_cast<size_t>(sol.space_modes.size()));
  for (const auto& m : sol.param_modes) append_f64(out, m.data(), static_cast<size_t>(m.size()));
  return out;
}

SeparatedSolution deserialize_solution(const std::string& bytes, const std::string& source) {
  const size_t nl = bytes.find('\n');
  if (nl == std::string::npos) throw ParseError(source + ": missing header line");
  const Json h = parse_json_text(bytes.substr(0, nl), source);
  const std::string ctx = source + " header";
  if (require_field<std::string>(h, "format", ctx) != "morph-separated-solution") {
    throw ParseError(ctx + ": not a separated-solution file");
  }
  const int version = require_field<int>(h, "version", ctx);
  if (version != kSolutionFormatVersion) {
    throw ParseError(ctx + ": unsupported version " + std::to_string(version));
  }
  if (require_field<std::string>(h, "encoding", ctx) != "f64le") throw ParseError(ctx + ": unsupported encoding");

  SeparatedSolution sol;
  const int rank = require_field<int>(h, "rank", ctx);
  sol.dim = require_field<int>(h, "dim", ctx);
  sol.num_nodes = require_field<int>(h, "num_nodes", ctx);
  if (rank < 0 || sol.num_nodes < 0 || (sol.dim != 2 && sol.dim != 3)) throw ParseError(ctx + ": bad sizes");
  try {
    sol.method = build_method_from_string(require_field<std::string>(h, "method", ctx));
  } catch (const ArgumentError& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  sol.mesh_ref = h.value("mesh", std::string());
  if (h.contains("material")) sol.law = fem::law_from_json(h.at("material"), ctx + " material");

  std::vector<Parameter> params;
  const Json plist = require_field<Json>(h, "parameters", ctx);
  if (!plist.is_array()) throw ParseError(ctx + ": 'parameters' must be an array");
  for (const auto& p : plist) {
    Parameter par;
    par.name = require_field<std::string>(p, "name", ctx + " parameter");
    par.lower = require_field<double>(p, "lower", ctx + " parameter");
    par.upper = require_field<double>(p, "upper", ctx + " parameter");
    par.grid = require_field<std::vector<double>>(p, "grid", ctx + " parameter");
    params.push_back(std::move(par));
  }
  try {
    sol.parameter_space = ParameterSpace(params);
  } catch (const ArgumentError& e) {
    throw ParseError(ctx + ": " + e.what());
  }

  size_t pos = nl + 1;
  sol.space_modes.resize(sol.num_nodes * sol.dim, rank);
  read_f64(bytes, pos, sol.space_modes.data(), static_cast<size_t>(sol.space_modes.size()), source);
  for (const auto& p : sol.parameter_space.params()) {
    MatX m(p.grid_size(), rank);
    read_f64(bytes, pos, m.data(), static_cast<size_t>(m.size()), source);
    sol.param_modes.push_back(std::move(m));
  }
  if (pos != bytes.size()) throw ParseError(source + ": trailing bytes after payload");
  return sol;
}

void save_solution(const std::string& path, const SeparatedSolution& sol) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  const std::string bytes = serialize_solution(sol);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("write failed: " + path);
}

SeparatedSolution load_solution(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_solution(ss.str(), path);
}

}  // namespace morph::mor
