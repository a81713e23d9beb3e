#include "tracefail/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "tracefail/error.hpp"

namespace tracefail {

using nlohmann::json;

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  json document() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = header(root);
      } else {
        key_value(*table);
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("spec line " + std::to_string(line_) + ": " + what);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }

  void skip_inline_space() {
    while (peek() == ' ' || peek() == '\t') get();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') get();
    }
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_inline_space();
      skip_comment();
      if (peek() == '\r') get();
      if (peek() == '\n') {
        get();
      } else {
        break;
      }
    }
  }
  // Whitespace, comments and newlines inside arrays.
  void skip_any_space() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }
  void end_of_line() {
    skip_inline_space();
    skip_comment();
    if (peek() == '\r') get();
    if (!eof() && peek() != '\n') fail("unexpected trailing characters");
    if (!eof()) get();
  }

  std::string bare_key() {
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) key += get();
    if (key.empty()) fail("expected a key");
    return key;
  }
  std::string key() {
    if (peek() == '"') return basic_string();
    std::string k = bare_key();
    if (peek() == '.') fail("dotted keys are not supported");
    return k;
  }

  json* header(json& root) {
    get();
    const bool array = peek() == '[';
    if (array) get();
    skip_inline_space();
    const std::string name = key();
    skip_inline_space();
    expect(']');
    if (array) expect(']');
    if (array) {
      json& slot = root[name];
      if (slot.is_null()) slot = json::array();
      if (!slot.is_array()) fail("'" + name + "' is not an array of tables");
      slot.push_back(json::object());
      return &slot.back();
    }
    if (root.contains(name)) fail("table '" + name + "' defined twice");
    root[name] = json::object();
    return &root[name];
  }

  void key_value(json& table) {
    const std::string k = key();
    skip_inline_space();
    expect('=');
    skip_inline_space();
    if (table.contains(k)) fail("duplicate key '" + k + "'");
    table[k] = value();
  }

  json value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '[') return array();
    if (c == '{') return inline_table();
    if (c == 't' || c == 'f') return boolean();
    if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c))) return number();
    if (c == '\'') fail("literal strings are not supported");
    fail("expected a value");
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = get();
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  json boolean() {
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    fail("expected a value");
  }

  json number() {
    std::string token;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                      peek() == '.' || peek() == '_')) {
      const char c = get();
      if (c != '_') token += c;
    }
    const bool is_float = token.find_first_of(".eE") != std::string::npos;
    std::size_t used = 0;
    try {
      if (is_float) {
        const double v = std::stod(token, &used);
        if (used == token.size()) return v;
      } else {
        const long long v = std::stoll(token, &used, 10);
        if (used == token.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("malformed number '" + token + "'");
  }

  json array() {
    expect('[');
    json out = json::array();
    skip_any_space();
    while (peek() != ']') {
      out.push_back(value());
      skip_any_space();
      if (peek() == ',') {
        get();
        skip_any_space();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    get();
    return out;
  }

  json inline_table() {
    expect('{');
    json out = json::object();
    skip_inline_space();
    while (peek() != '}') {
      key_value(out);
      skip_inline_space();
      if (peek() == ',') {
        get();
        skip_inline_space();
      } else if (peek() != '}') {
        fail("expected ',' or '}' in inline table");
      }
    }
    get();
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

json parse_toml(std::string_view text) { return Parser(text).document(); }

json load_toml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

}  // namespace tracefail
