#include "cpm/srcmodel.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace cpm {

namespace {

constexpr std::array<std::string_view, 44> kKeywords = {
    "auto",     "break",    "case",     "char",   "const",    "continue",
    "default",  "do",       "double",   "else",   "enum",     "extern",
    "float",    "for",      "goto",     "if",     "inline",   "int",
    "long",     "register", "restrict", "return", "short",    "signed",
    "sizeof",   "static",   "struct",   "switch", "typedef",  "union",
    "unsigned", "void",     "volatile", "while",  "_Alignas", "_Alignof",
    "_Atomic",  "_Bool",    "_Complex", "_Generic", "_Imaginary",
    "_Noreturn", "_Static_assert", "_Thread_local"};

// Longest first, so that a greedy prefix match picks the right operator.
constexpr std::array<std::string_view, 23> kMultiPunct = {
    ">>=", "<<=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##"};

bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(unsigned char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9');
}
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

class LineLexer {
 public:
  LineLexer(std::string_view raw, bool& in_block_comment)
      : raw_(raw), in_comment_(in_block_comment) {}

  std::vector<Token> run() {
    if (in_comment_) block_comment_tail(0);
    while (pos_ < raw_.size()) step();
    return std::move(tokens_);
  }

 private:
  void emit(TokenKind kind, std::size_t begin, std::size_t end) {
    tokens_.push_back(Token{kind, std::string(raw_.substr(begin, end - begin)), begin});
    pos_ = end;
  }

  // Consumes up to and including "*/" starting at `begin`, or to end of line.
  void block_comment_tail(std::size_t search_from) {
    const std::size_t begin = pos_;
    const std::size_t close = raw_.find("*/", search_from);
    if (close == std::string_view::npos) {
      in_comment_ = true;
      emit(TokenKind::kComment, begin, raw_.size());
    } else {
      in_comment_ = false;
      emit(TokenKind::kComment, begin, close + 2);
    }
  }

  void step() {
    const auto c = static_cast<unsigned char>(raw_[pos_]);
    const std::size_t begin = pos_;
    std::size_t end = pos_ + 1;

    if (is_space(c)) {
      while (end < raw_.size() && is_space(static_cast<unsigned char>(raw_[end]))) ++end;
      emit(TokenKind::kWhitespace, begin, end);
      return;
    }
    if (c == '/' && pos_ + 1 < raw_.size()) {
      if (raw_[pos_ + 1] == '/') {
        emit(TokenKind::kComment, begin, raw_.size());
        return;
      }
      if (raw_[pos_ + 1] == '*') {
        block_comment_tail(pos_ + 2);
        return;
      }
    }
    if (is_ident_start(c)) {
      while (end < raw_.size() && is_ident_char(static_cast<unsigned char>(raw_[end]))) ++end;
      const auto word = raw_.substr(begin, end - begin);
      emit(is_c_keyword(word) ? TokenKind::kKeyword : TokenKind::kIdentifier, begin, end);
      return;
    }
    if (is_digit(c) ||
        (c == '.' && end < raw_.size() && is_digit(static_cast<unsigned char>(raw_[end])))) {
      while (end < raw_.size()) {
        const auto d = static_cast<unsigned char>(raw_[end]);
        const auto prev = static_cast<unsigned char>(raw_[end - 1]);
        if (is_ident_char(d) || d == '.') {
          ++end;
        } else if ((d == '+' || d == '-') &&
                   (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P')) {
          ++end;
        } else {
          break;
        }
      }
      emit(TokenKind::kNumber, begin, end);
      return;
    }
    if (c == '"' || c == '\'') {
      while (end < raw_.size() && raw_[end] != static_cast<char>(c)) {
        end += (raw_[end] == '\\' && end + 1 < raw_.size()) ? 2 : 1;
      }
      if (end < raw_.size()) ++end;  // closing quote
      emit(TokenKind::kString, begin, std::min(end, raw_.size()));
      return;
    }
    for (const auto op : kMultiPunct) {
      if (raw_.substr(begin, op.size()) == op) {
        emit(TokenKind::kPunctuator, begin, begin + op.size());
        return;
      }
    }
    emit(TokenKind::kPunctuator, begin, end);
  }

  std::string_view raw_;
  bool& in_comment_;
  std::size_t pos_ = 0;
  std::vector<Token> tokens_;
};

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::kIdentifier: return "identifier";
    case TokenKind::kKeyword: return "keyword";
    case TokenKind::kPunctuator: return "punctuator";
    case TokenKind::kNumber: return "number-literal";
    case TokenKind::kString: return "string-literal";
    case TokenKind::kComment: return "comment";
    case TokenKind::kWhitespace: return "whitespace";
  }
  return "?";
}

bool is_c_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize_line(std::string_view raw, bool& in_block_comment) {
  if (raw.find('\n') != std::string_view::npos) {
    throw std::invalid_argument("tokenize_line: input contains a newline");
  }
  return LineLexer(raw, in_block_comment).run();
}

std::vector<Token> tokenize_line(std::string_view raw) {
  bool in_comment = false;
  return tokenize_line(raw, in_comment);
}

std::string join_lexemes(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) out += t.lexeme;
  return out;
}

SourceLine::SourceLine(std::string raw, std::size_t line_no, bool starts_in_comment)
    : raw_(std::move(raw)), line_no_(line_no), starts_in_comment_(starts_in_comment) {
  bool state = starts_in_comment_;
  tokens_ = tokenize_line(raw_, state);
  ends_in_comment_ = state;
}

bool SourceLine::comment_only() const {
  return std::none_of(tokens_.begin(), tokens_.end(),
                      [](const Token& t) { return t.significant(); }) &&
         std::any_of(tokens_.begin(), tokens_.end(),
                     [](const Token& t) { return t.is(TokenKind::kComment); });
}

void SourceUnit::renumber_from(std::size_t index) {
  for (std::size_t i = index; i < lines_.size(); ++i) {
    const bool starts = i == 0 ? false : lines_[i - 1].ends_in_comment();
    auto& line = lines_[i];
    if (line.line_no_ != i + 1) line.line_no_ = i + 1;
    if (line.starts_in_comment_ != starts) {
      std::string tag = line.tag_;
      line = SourceLine(std::move(line.raw_), i + 1, starts);
      line.tag_ = std::move(tag);
    }
  }
}

void SourceUnit::replace_line(std::size_t index, std::string text) {
  auto& old = lines_.at(index);
  std::string tag = old.tag_;
  old = SourceLine(std::move(text), index + 1, old.starts_in_comment_);
  old.tag_ = std::move(tag);
  renumber_from(index + 1);
}

void SourceUnit::insert_line(std::size_t index, std::string text) {
  const bool starts = index == 0 ? false : lines_.at(index - 1).ends_in_comment();
  lines_.insert(lines_.begin() + static_cast<std::ptrdiff_t>(index),
                SourceLine(std::move(text), index + 1, starts));
  renumber_from(index + 1);
}

void SourceUnit::append_line(std::string text) { insert_line(lines_.size(), std::move(text)); }

bool operator==(const SourceUnit& a, const SourceUnit& b) {
  if (a.final_newline_ != b.final_newline_ || a.lines_.size() != b.lines_.size()) return false;
  for (std::size_t i = 0; i < a.lines_.size(); ++i) {
    if (a.lines_[i].raw() != b.lines_[i].raw()) return false;
  }
  return true;
}

SourceUnit load_unit(std::string_view text, std::string origin) {
  SourceUnit unit(std::move(origin));
  if (text.empty()) return unit;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      unit.append_line(std::string(text.substr(start)));
      break;
    }
    unit.append_line(std::string(text.substr(start, nl - start)));
    start = nl + 1;
  }
  unit.set_final_newline(text.back() == '\n');
  return unit;
}

std::string render(const SourceUnit& unit) {
  std::string out;
  const auto& lines = unit.lines();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += lines[i].raw();
    if (i + 1 < lines.size() || unit.final_newline()) out += '\n';
  }
  return out;
}

}  // namespace cpm
