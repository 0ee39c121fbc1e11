#include "gperot/toml_lite.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <cstdio>
#include <sstream>

#include "gperot/common.hpp"

namespace gperot::toml {

namespace {

using json = nlohmann::json;

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  json run() {
    json root = json::object();
    json* cur = &root;
    for (;;) {
      skip_ws_and_comments(true);
      if (eof()) break;
      if (peek() == '[') {
        const bool array = s_.compare(pos_, 2, "[[") == 0;
        pos_ += array ? 2 : 1;
        skip_inline_ws();
        const std::string name = key();
        skip_inline_ws();
        expect(array ? "]]" : "]");
        json& slot = root[name];
        if (array) {
          if (slot.is_null()) slot = json::array();
          if (!slot.is_array()) fail("'" + name + "' is not an array of tables");
          slot.push_back(json::object());
          cur = &slot.back();
        } else {
          if (slot.is_null()) slot = json::object();
          if (!slot.is_object()) fail("'" + name + "' redefined as a table");
          cur = &slot;
        }
        end_of_line();
        continue;
      }
      const std::string k = key();
      skip_inline_ws();
      expect("=");
      skip_inline_ws();
      if (cur->contains(k)) fail("duplicate key '" + k + "'");
      (*cur)[k] = value();
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
    throw ConfigError("toml line " + std::to_string(line) + ": " + msg);
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  void expect(const char* tok) {
    const std::string t(tok);
    if (s_.compare(pos_, t.size(), t) != 0) fail("expected '" + t + "'");
    pos_ += t.size();
  }
  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  void skip_ws_and_comments(bool newlines) {
    for (;;) {
      while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || (newlines && peek() == '\n'))) ++pos_;
      if (!eof() && peek() == '#') {
        while (!eof() && peek() != '\n') ++pos_;
        continue;
      }
      break;
    }
  }
  void end_of_line() {
    skip_inline_ws();
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
    if (!eof() && peek() == '\r') ++pos_;
    if (!eof() && peek() != '\n') fail("unexpected trailing characters");
    if (!eof()) ++pos_;
  }
  std::string key() {
    if (peek() == '"') return string();
    const std::size_t b = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (b == pos_) fail("expected a key");
    return s_.substr(b, pos_ - b);
  }
  std::string string() {
    expect("\"");
    std::string out;
    while (!eof() && peek() != '"') {
      char c = s_[pos_++];
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        if (eof()) fail("bad escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    expect("\"");
    return out;
  }
  json value() {
    const char c = peek();
    if (c == '"') return string();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      for (;;) {
        skip_ws_and_comments(true);
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(value());
        skip_ws_and_comments(true);
        if (peek() == ',') {
          ++pos_;
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
    }
    if (c == '{') {
      ++pos_;
      json obj = json::object();
      skip_inline_ws();
      if (peek() == '}') {
        ++pos_;
        return obj;
      }
      for (;;) {
        skip_inline_ws();
        const std::string k = key();
        skip_inline_ws();
        expect("=");
        skip_inline_ws();
        obj[k] = value();
        skip_inline_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        expect("}");
        return obj;
      }
    }
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return number();
  }
  json number() {
    const std::size_t b = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                      peek() == '.' || peek() == '_')) {
      ++pos_;
    }
    std::string tok = s_.substr(b, pos_ - b);
    std::erase(tok, '_');
    if (tok.empty()) fail("expected a value");
    std::string body = tok;
    if (body[0] == '+' || body[0] == '-') body = body.substr(1);
    const double sign = tok[0] == '-' ? -1.0 : 1.0;
    if (body == "inf") return sign * std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(tok, &used);
        if (used == tok.size()) return v;
      } else {
        const long long v = std::stoll(tok, &used);
        if (used == tok.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("malformed value '" + tok + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

std::string scalar(const json& v) {
  if (v.is_string()) {
    std::string out = "\"";
    for (char c : v.get<std::string>()) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out.push_back(c);
      }
    }
    return out + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    std::string s = buf;
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
  }
  if (v.is_array()) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      out += scalar(v[i]);
    }
    return out + "]";
  }
  if (v.is_object()) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, x] : v.items()) {
      if (!first) out += ",";
      out += " " + k + " = " + scalar(x);
      first = false;
    }
    return out + (first ? "}" : " }");
  }
  if (v.is_null()) throw ConfigError("toml: cannot emit null");
  throw ConfigError("toml: unsupported value");
}

bool table_array(const json& v) {
  if (!v.is_array() || v.empty()) return false;
  for (const auto& x : v) {
    if (!x.is_object()) return false;
  }
  return true;
}

void emit_body(std::ostringstream& os, const json& obj) {
  for (const auto& [k, v] : obj.items()) {
    if (v.is_null()) continue;
    os << k << " = " << scalar(v) << "\n";
  }
}

}  // namespace

json parse(const std::string& text) { return Parser(text).run(); }

std::string emit(const json& doc) {
  if (!doc.is_object()) throw ConfigError("toml: document must be a table");
  std::ostringstream os;
  json top = json::object();
  for (const auto& [k, v] : doc.items()) {
    if (!v.is_object() && !table_array(v)) top[k] = v;
  }
  emit_body(os, top);
  for (const auto& [k, v] : doc.items()) {
    if (v.is_object()) {
      os << (os.tellp() > 0 ? "\n" : "") << "[" << k << "]\n";
      emit_body(os, v);
    } else if (table_array(v)) {
      for (const auto& t : v) {
        os << (os.tellp() > 0 ? "\n" : "") << "[[" << k << "]]\n";
        emit_body(os, t);
      }
    }
  }
  return os.str();
}

}  // namespace gperot::toml
