#include "fuchsim/json5.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace fuchsim::json5 {

const Value* Value::find(std::string_view key) const {
  for (const auto& [k, v] : members_) {
    if (k == key) return &v;
  }
  return nullptr;
}

Value Value::make_null(SourcePos pos) {
  Value v;
  v.kind_ = Kind::kNull;
  v.pos_ = pos;
  return v;
}

Value Value::make_bool(bool b, SourcePos pos) {
  Value v;
  v.kind_ = Kind::kBool;
  v.bool_ = b;
  v.pos_ = pos;
  return v;
}

Value Value::make_number(double n, SourcePos pos) {
  Value v;
  v.kind_ = Kind::kNumber;
  v.number_ = n;
  v.pos_ = pos;
  return v;
}

Value Value::make_string(std::string s, SourcePos pos) {
  Value v;
  v.kind_ = Kind::kString;
  v.string_ = std::move(s);
  v.pos_ = pos;
  return v;
}

Value Value::make_array(std::vector<Value> elems, SourcePos pos) {
  Value v;
  v.kind_ = Kind::kArray;
  v.elements_ = std::move(elems);
  v.pos_ = pos;
  return v;
}

Value Value::make_object(std::vector<Value::Member> members, SourcePos pos) {
  Value v;
  v.kind_ = Kind::kObject;
  v.members_ = std::move(members);
  v.pos_ = pos;
  return v;
}

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         c == '-' || c == '.';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Value parse_document() {
    skip_trivia();
    Value v = parse_value();
    skip_trivia();
    if (!at_end()) fail("trailing content after document");
    return v;
  }

 private:
  std::string_view text_;
  size_t i_ = 0;
  SourcePos pos_;

  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }

  char advance() {
    char c = text_[i_++];
    if (c == '\n') {
      pos_.line++;
      pos_.col = 1;
    } else {
      pos_.col++;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(pos_, msg);
  }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && i_ + 1 < text_.size() && text_[i_ + 1] == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == '/' && i_ + 1 < text_.size() && text_[i_ + 1] == '*') {
        advance();
        advance();
        bool closed = false;
        while (!at_end()) {
          if (peek() == '*' && i_ + 1 < text_.size() && text_[i_ + 1] == '/') {
            advance();
            advance();
            closed = true;
            break;
          }
          advance();
        }
        if (!closed) fail("unterminated block comment");
      } else {
        break;
      }
    }
  }

  void expect(char c, const char* what) {
    if (at_end() || peek() != c) fail(std::string("expected ") + what);
    advance();
  }

  Value parse_value() {
    if (at_end()) fail("unexpected end of input");
    char c = peek();
    if (c == '{') return parse_object();
    if (c == '[') return parse_array();
    if (c == '"' || c == '\'') return parse_string_value();
    if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c)))
      return parse_number();
    if (is_ident_start(c)) return parse_keyword();
    fail("unexpected character");
  }

  Value parse_object() {
    SourcePos start = pos_;
    expect('{', "'{'");
    std::vector<Value::Member> members;
    skip_trivia();
    while (!at_end() && peek() != '}') {
      std::string key = parse_key();
      skip_trivia();
      expect(':', "':' after object key");
      skip_trivia();
      members.emplace_back(std::move(key), parse_value());
      skip_trivia();
      if (!at_end() && peek() == ',') {
        advance();
        skip_trivia();
      } else {
        break;
      }
    }
    skip_trivia();
    expect('}', "'}' or ','");
    return Value::make_object(std::move(members), start);
  }

  Value parse_array() {
    SourcePos start = pos_;
    expect('[', "'['");
    std::vector<Value> elems;
    skip_trivia();
    while (!at_end() && peek() != ']') {
      elems.push_back(parse_value());
      skip_trivia();
      if (!at_end() && peek() == ',') {
        advance();
        skip_trivia();
      } else {
        break;
      }
    }
    skip_trivia();
    expect(']', "']' or ','");
    return Value::make_array(std::move(elems), start);
  }

  std::string parse_key() {
    if (at_end()) fail("expected object key");
    char c = peek();
    if (c == '"' || c == '\'') return parse_quoted_string();
    if (!is_ident_start(c)) fail("expected object key");
    std::string key;
    while (!at_end() && is_ident_char(peek())) key.push_back(advance());
    return key;
  }

  Value parse_string_value() {
    SourcePos start = pos_;
    return Value::make_string(parse_quoted_string(), start);
  }

  std::string parse_quoted_string() {
    char quote = advance();
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated string");
      char c = advance();
      if (c == quote) break;
      if (c == '\n') fail("newline in string literal");
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) fail("unterminated escape");
      char e = advance();
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\'': out.push_back('\''); break;
        case '\\': out.push_back('\\'); break;
        case '/': out.push_back('/'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'u': append_unicode_escape(out); break;
        default: fail("unknown escape sequence");
      }
    }
    return out;
  }

  void append_unicode_escape(std::string& out) {
    uint32_t cp = 0;
    for (int k = 0; k < 4; k++) {
      if (at_end()) fail("truncated \\u escape");
      char c = advance();
      cp <<= 4;
      if (c >= '0' && c <= '9') cp |= static_cast<uint32_t>(c - '0');
      else if (c >= 'a' && c <= 'f') cp |= static_cast<uint32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') cp |= static_cast<uint32_t>(c - 'A' + 10);
      else fail("invalid \\u escape digit");
    }
    // BMP code point to UTF-8; surrogates pass through as-is.
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  Value parse_number() {
    SourcePos start = pos_;
    std::string lit;
    if (peek() == '-' || peek() == '+') lit.push_back(advance());
    bool any_digit = false;
    auto take_digits = [&] {
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        lit.push_back(advance());
        any_digit = true;
      }
    };
    take_digits();
    if (!at_end() && peek() == '.') {
      lit.push_back(advance());
      take_digits();
    }
    if (!any_digit) fail("malformed number");
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      lit.push_back(advance());
      if (!at_end() && (peek() == '-' || peek() == '+')) lit.push_back(advance());
      bool exp_digit = false;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        lit.push_back(advance());
        exp_digit = true;
      }
      if (!exp_digit) fail("malformed exponent");
    }
    return Value::make_number(std::strtod(lit.c_str(), nullptr), start);
  }

  Value parse_keyword() {
    SourcePos start = pos_;
    std::string word;
    while (!at_end() && is_ident_char(peek())) word.push_back(advance());
    if (word == "true") return Value::make_bool(true, start);
    if (word == "false") return Value::make_bool(false, start);
    if (word == "null") return Value::make_null(start);
    throw ParseError(start, "unexpected identifier '" + word + "'");
  }
};

}  // namespace

Value parse(std::string_view text) { return Parser(text).parse_document(); }

}  // namespace fuchsim::json5
