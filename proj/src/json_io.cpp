#include "morph/json_io.hpp"

#include <fstream>
#include <sstream>

namespace morph {

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte is 1-based and points just past the offending character.
    const size_t stop = std::min<size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    int line = 1, column = 1;
    for (size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    // Drop nlohmann's own position prefix; the line and column go in front.
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    const auto colon = pos == std::string::npos ? pos : msg.find(": ", pos);
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw ParseError(source + ": " + msg, line, column);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << text;
}

Json load_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

}  // namespace morph
