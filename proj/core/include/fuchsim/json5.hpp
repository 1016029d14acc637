#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fuchsim::json5 {

/// 1-based position of a token in the source text.
struct SourcePos {
  int line = 1;
  int col = 1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, const std::string& what)
      : std::runtime_error(what), pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

/// Document value for the JSON5 subset the manifest language uses:
/// objects with unquoted identifier keys, trailing commas, and `//`
/// comments, plus the usual JSON scalars. Object members keep source
/// order.
class Value {
 public:
  enum class Kind { kNull, kBool, kNumber, kString, kArray, kObject };

  using Member = std::pair<std::string, Value>;

  Value() = default;

  Kind kind() const { return kind_; }
  SourcePos pos() const { return pos_; }

  bool is_null() const { return kind_ == Kind::kNull; }
  bool is_bool() const { return kind_ == Kind::kBool; }
  bool is_number() const { return kind_ == Kind::kNumber; }
  bool is_string() const { return kind_ == Kind::kString; }
  bool is_array() const { return kind_ == Kind::kArray; }
  bool is_object() const { return kind_ == Kind::kObject; }

  bool as_bool() const { return bool_; }
  double as_number() const { return number_; }
  const std::string& as_string() const { return string_; }
  const std::vector<Value>& elements() const { return elements_; }
  const std::vector<Member>& members() const { return members_; }

  /// First member with the given key, or nullptr.
  const Value* find(std::string_view key) const;

  static Value make_null(SourcePos pos = {});
  static Value make_bool(bool b, SourcePos pos = {});
  static Value make_number(double n, SourcePos pos = {});
  static Value make_string(std::string s, SourcePos pos = {});
  static Value make_array(std::vector<Value> elems, SourcePos pos = {});
  static Value make_object(std::vector<Member> members, SourcePos pos = {});

 private:
  Kind kind_ = Kind::kNull;
  SourcePos pos_;
  bool bool_ = false;
  double number_ = 0;
  std::string string_;
  std::vector<Value> elements_;
  std::vector<Member> members_;
};

/// Parses one document. Total over arbitrary bytes: either returns a
/// Value or throws ParseError with the offending position.
Value parse(std::string_view text);

}  // namespace fuchsim::json5
