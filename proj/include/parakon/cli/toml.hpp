#pragma once

// Reader for the TOML subset used by experiment configs: [tables] (dotted
// names allowed), bare keys, basic and literal strings, integers, floats,
// booleans and arrays of those (arrays may span lines). Inline tables,
// dates and multi-line strings are rejected.

#include "parakon/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace parakon::toml {

struct Value {
  enum class Type { boolean, number, string, array };
  Type type = Type::number;
  bool b = false;
  double num = 0.0;
  bool integral = false;
  std::string str;
  std::vector<Value> items;
  int line = 0;

  const char* type_name() const {
    switch (type) {
      case Type::boolean: return "boolean";
      case Type::number: return integral ? "integer" : "float";
      case Type::string: return "string";
      case Type::array: return "array";
    }
    return "?";
  }
};

/// Keys are stored fully qualified ("grid.h"), in file order.
class Document {
 public:
  const Value* find(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }
  const std::vector<std::string>& keys() const noexcept { return order_; }
  const std::string& source() const noexcept { return source_; }

  void set(const std::string& key, Value v) {
    if (values_.count(key)) {
      throw usage_error(source_ + ":" + std::to_string(v.line) + ": duplicate key '" + key + "' (first set on line " +
                        std::to_string(values_[key].line) + ")");
    }
    order_.push_back(key);
    values_.emplace(key, std::move(v));
  }
  void set_source(std::string s) { source_ = std::move(s); }

 private:
  std::map<std::string, Value> values_;
  std::vector<std::string> order_;
  std::string source_ = "<config>";
};

namespace detail {

class Parser {
 public:
  Parser(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {}

  Document run() {
    Document doc;
    doc.set_source(source_);
    std::string table;
    while (pos_ < text_.size()) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      const char c = text_[pos_];
      if (c == '\n') {
        advance();
        continue;
      }
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '[') {
        advance();
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_blank();
        table = dotted_key();
        skip_blank();
        expect(']');
        end_of_line();
        if (!tables_.insert(table).second) fail("table [" + table + "] defined twice");
        continue;
      }
      const int key_line = line_;
      std::string key = dotted_key();
      skip_blank();
      expect('=');
      skip_blank();
      Value v = value();
      v.line = key_line;
      end_of_line();
      doc.set(table.empty() ? key : table + "." + key, std::move(v));
    }
    return doc;
  }

 private:
  std::string text_;
  std::string source_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> tables_;

  [[noreturn]] void fail(const std::string& msg) const {
    throw usage_error(source_ + ":" + std::to_string(line_) + ": " + msg);
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }
  void skip_blank() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }
  void skip_comment() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'" + (peek() ? std::string(" before '") + peek() + "'" : ""));
    advance();
  }
  void end_of_line() {
    skip_blank();
    if (peek() == '#') skip_comment();
    if (pos_ < text_.size() && text_[pos_] != '\n') fail(std::string("unexpected '") + text_[pos_] + "' after value");
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                   text_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail(peek() == '"' || peek() == '\'' ? "quoted keys are not supported" : "expected a key");
    return text_.substr(start, pos_ - start);
  }
  std::string dotted_key() {
    std::string k = bare_key();
    while (true) {
      skip_blank();
      if (peek() != '.') break;
      ++pos_;
      skip_blank();
      k += "." + bare_key();
    }
    return k;
  }

  std::string basic_string() {
    std::string out;
    advance();  // opening quote
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n') fail("unterminated string");
      char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("unterminated escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
        continue;
      }
      out += c;
    }
    return out;
  }
  std::string literal_string() {
    advance();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '\'' && text_[pos_] != '\n') ++pos_;
    if (peek() != '\'') fail("unterminated string");
    std::string s = text_.substr(start, pos_ - start);
    ++pos_;
    return s;
  }

  Value value() {
    Value v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      if (text_.compare(pos_, 3, "\"\"\"") == 0) fail("multi-line strings are not supported");
      v.type = Value::Type::string;
      v.str = basic_string();
      return v;
    }
    if (c == '\'') {
      v.type = Value::Type::string;
      v.str = literal_string();
      return v;
    }
    if (c == '{') fail("inline tables are not supported");
    if (c == '[') {
      advance();
      v.type = Value::Type::array;
      while (true) {
        skip_space_and_comments();
        if (peek() == ']') {
          advance();
          break;
        }
        Value item = value();
        if (item.type == Value::Type::array) fail("nested arrays are not supported");
        v.items.push_back(std::move(item));
        skip_space_and_comments();
        if (peek() == ',') {
          advance();
          continue;
        }
        if (peek() == ']') {
          advance();
          break;
        }
        if (pos_ >= text_.size()) fail("unterminated array");
        fail(std::string("expected ',' or ']' in array, found '") + peek() + "'");
      }
      return v;
    }
    // bare scalar: up to a delimiter
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != '\n' &&
           text_[pos_] != '#' && text_[pos_] != ' ' && text_[pos_] != '\t' && text_[pos_] != '\r')
      ++pos_;
    std::string tok = text_.substr(start, pos_ - start);
    if (tok.empty()) fail("missing value");
    if (tok == "true" || tok == "false") {
      v.type = Value::Type::boolean;
      v.b = tok == "true";
      return v;
    }
    std::string digits;
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (tok[i] != '_') {
        digits += tok[i];
        continue;
      }
      if (i == 0 || i + 1 == tok.size() || !std::isdigit(static_cast<unsigned char>(tok[i - 1])) ||
          !std::isdigit(static_cast<unsigned char>(tok[i + 1])))
        fail("misplaced '_' in number '" + tok + "'");
    }
    std::string body = digits;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) body = body.substr(1);
    v.type = Value::Type::number;
    if (body == "inf" || body == "nan") {
      v.num = body == "inf" ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
      if (digits[0] == '-') v.num = -v.num;
      return v;
    }
    char* end = nullptr;
    v.num = std::strtod(digits.c_str(), &end);
    if (end != digits.c_str() + digits.size() || body.empty() || !(std::isdigit(static_cast<unsigned char>(body[0]))))
      fail("cannot read value '" + tok + "' (strings need quotes)");
    v.integral = digits.find_first_of(".eE") == std::string::npos;
    return v;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }
};

}  // namespace detail

inline Document parse(const std::string& text, const std::string& source = "<config>") {
  return detail::Parser(text, source).run();
}

inline Document parse(std::istream& in, const std::string& source = "<config>") {
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), source);
}

}  // namespace parakon::toml
