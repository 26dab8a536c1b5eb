#pragma once

// Line-oriented model of augmented C source. Every extension pass reads and
// rewrites a SourceUnit; render(load_unit(t)) == t for any text t.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cpm {

enum class TokenKind {
  kIdentifier,
  kKeyword,
  kPunctuator,
  kNumber,
  kString,
  kComment,
  kWhitespace,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t column = 0;  // byte offset within the line

  bool is(TokenKind k) const { return kind == k; }
  bool is(TokenKind k, std::string_view text) const {
    return kind == k && lexeme == text;
  }
  // Whitespace and comments carry no meaning for the passes.
  bool significant() const {
    return kind != TokenKind::kWhitespace && kind != TokenKind::kComment;
  }

  friend bool operator==(const Token&, const Token&) = default;
};

/// Splits one physical line into tokens. Total: any byte string without a
/// newline tokenizes, and the lexemes concatenate back to `raw`.
std::vector<Token> tokenize_line(std::string_view raw);

/// Like tokenize_line, but starts inside an unterminated block comment when
/// `in_block_comment` is set. On return the flag holds the state at the end
/// of the line.
std::vector<Token> tokenize_line(std::string_view raw, bool& in_block_comment);

bool is_c_keyword(std::string_view word);

class SourceLine {
 public:
  SourceLine(std::string raw, std::size_t line_no, bool starts_in_comment = false);

  const std::string& raw() const { return raw_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t line_no() const { return line_no_; }

  bool starts_in_comment() const { return starts_in_comment_; }
  bool ends_in_comment() const { return ends_in_comment_; }
  /// True when the line holds nothing but comments and whitespace.
  bool comment_only() const;

  /// Extension tag (`@ext:<name>` prefix in strict mode); empty when untagged.
  const std::string& tag() const { return tag_; }
  void set_tag(std::string tag) { tag_ = std::move(tag); }

 private:
  friend class SourceUnit;

  std::string raw_;
  std::vector<Token> tokens_;
  std::size_t line_no_;
  bool starts_in_comment_;
  bool ends_in_comment_ = false;
  std::string tag_;
};

class SourceUnit {
 public:
  SourceUnit() = default;
  explicit SourceUnit(std::string origin) : origin_(std::move(origin)) {}

  const std::vector<SourceLine>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }
  bool empty() const { return lines_.empty(); }
  const SourceLine& line(std::size_t index) const { return lines_.at(index); }

  const std::string& origin() const { return origin_; }
  bool final_newline() const { return final_newline_; }
  void set_final_newline(bool value) { final_newline_ = value; }

  /// Replaces the text of the line at `index` (0-based), keeping its tag and
  /// re-tokenizing from the block-comment state it started in.
  void replace_line(std::size_t index, std::string text);
  /// Inserts a line before `index` and renumbers.
  void insert_line(std::size_t index, std::string text);
  void append_line(std::string text);
  void set_tag(std::size_t index, std::string tag) { lines_.at(index).set_tag(std::move(tag)); }

  friend bool operator==(const SourceUnit& a, const SourceUnit& b);

 private:
  void renumber_from(std::size_t index);

  std::vector<SourceLine> lines_;
  std::string origin_ = "<memory>";
  bool final_newline_ = false;
};

SourceUnit load_unit(std::string_view text, std::string origin = "<memory>");

std::string render(const SourceUnit& unit);

/// Concatenates the lexemes of `tokens`.
std::string join_lexemes(const std::vector<Token>& tokens);

}  // namespace cpm
