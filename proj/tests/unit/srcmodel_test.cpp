#include <gtest/gtest.h>

#include <random>

#include "cpm/srcmodel.hpp"
#include "support/oracles.hpp"

namespace cpm {
namespace {

using K = TokenKind;

std::vector<std::pair<K, std::string>> kinds(const std::vector<Token>& toks) {
  std::vector<std::pair<K, std::string>> out;
  for (const auto& t : toks) out.emplace_back(t.kind, t.lexeme);
  return out;
}

TEST(Tokenize, DeclarationLine) {
  const std::vector<std::pair<K, std::string>> expected = {
      {K::kKeyword, "int"}, {K::kWhitespace, " "}, {K::kIdentifier, "x"}, {K::kWhitespace, " "},
      {K::kPunctuator, "="}, {K::kWhitespace, " "}, {K::kNumber, "5"},   {K::kPunctuator, ";"}};
  EXPECT_EQ(kinds(tokenize_line("int x = 5;")), expected);
}

TEST(Tokenize, EmptyLine) { EXPECT_TRUE(tokenize_line("").empty()); }

TEST(Tokenize, TrailingLineComment) {
  const std::vector<std::pair<K, std::string>> expected = {
      {K::kIdentifier, "watchdog"}, {K::kWhitespace, " "}, {K::kPunctuator, "="},
      {K::kWhitespace, " "},        {K::kIdentifier, "WD_ACTIVE"}, {K::kPunctuator, ";"},
      {K::kWhitespace, " "},        {K::kComment, "// restart"}};
  EXPECT_EQ(kinds(tokenize_line("watchdog = WD_ACTIVE; // restart")), expected);
}

TEST(Tokenize, ColumnsAreByteOffsets) {
  const auto toks = tokenize_line("a  += 0x1F;");
  ASSERT_EQ(toks.size(), 6u);
  EXPECT_EQ(toks[2].lexeme, "+=");
  EXPECT_EQ(toks[2].column, 3u);
  EXPECT_EQ(toks[4].kind, K::kNumber);
  EXPECT_EQ(toks[4].lexeme, "0x1F");
}

TEST(Tokenize, MultiCharPunctuators) {
  const auto toks = tokenize_line("p->x <<= ++i;");
  std::vector<std::string> lex;
  for (const auto& t : toks) {
    if (t.significant()) lex.push_back(t.lexeme);
  }
  EXPECT_EQ(lex, (std::vector<std::string>{"p", "->", "x", "<<=", "++", "i", ";"}));
}

TEST(Tokenize, StringsAndCharsHideContents) {
  const auto toks = tokenize_line(R"(s = "a \" redundant_t"; c = '\'';)");
  ASSERT_GE(toks.size(), 5u);
  EXPECT_EQ(toks[4].kind, K::kString);
  EXPECT_EQ(toks[4].lexeme, R"("a \" redundant_t")");
}

TEST(Tokenize, UnterminatedBlockCommentRunsToEndOfLine) {
  const auto toks = tokenize_line("x; /* open");
  EXPECT_EQ(toks.back().kind, K::kComment);
  EXPECT_EQ(toks.back().lexeme, "/* open");
}

TEST(Tokenize, BlockCommentStateCarriesAcrossLines) {
  bool in = false;
  tokenize_line("a; /* start", in);
  EXPECT_TRUE(in);
  const auto mid = tokenize_line("redundant_t int x;", in);
  EXPECT_TRUE(in);
  ASSERT_EQ(mid.size(), 1u);
  EXPECT_EQ(mid[0].kind, K::kComment);
  const auto end = tokenize_line("end */ b;", in);
  EXPECT_FALSE(in);
  EXPECT_EQ(end[0].lexeme, "end */");
}

TEST(Tokenize, UnknownBytesBecomeSinglePunctuators) {
  const auto toks = tokenize_line("a\x01$`");
  ASSERT_EQ(toks.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_EQ(toks[i].kind, K::kPunctuator);
    EXPECT_EQ(toks[i].lexeme.size(), 1u);
  }
}

TEST(Tokenize, NewlineIsRejected) {
  bool in = false;
  EXPECT_THROW(tokenize_line("a\nb", in), std::invalid_argument);
}

TEST(Tokenize, PropertyLosslessPartition) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    std::string s = gen::random_text(rng, 80);
    std::erase(s, '\n');
    const auto toks = tokenize_line(s);
    EXPECT_EQ(join_lexemes(toks), s);
    for (const auto& t : toks) EXPECT_FALSE(t.lexeme.empty());
  }
}

TEST(LoadUnit, FinalNewlineFlag) {
  const auto two = load_unit("a\nb\n");
  EXPECT_EQ(two.size(), 2u);
  EXPECT_TRUE(two.final_newline());
  const auto one = load_unit("a");
  EXPECT_EQ(one.size(), 1u);
  EXPECT_FALSE(one.final_newline());
  EXPECT_TRUE(load_unit("").empty());
}

TEST(LoadUnit, LineNumbersAreConsecutive) {
  const auto u = load_unit("x\n\ny\nz");
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(u.line(i).line_no(), i + 1);
  EXPECT_EQ(u.origin(), "<memory>");
}

TEST(LoadUnit, CommentOnlyLinesInsideBlockComment) {
  const auto u = load_unit("int a;\n/* one\nint b;\n*/ int c;\n");
  EXPECT_FALSE(u.line(0).comment_only());
  EXPECT_TRUE(u.line(1).comment_only());
  EXPECT_TRUE(u.line(2).comment_only());
  EXPECT_FALSE(u.line(3).comment_only());
}

TEST(Render, RoundTripExamples) {
  for (const std::string t : {"int x;\n", "", "a", "a\r\nb\r\n", "\n\n", "x\n\n"}) {
    EXPECT_EQ(render(load_unit(t)), t);
  }
}

TEST(Render, ReplaceOnlyChangesThatLine) {
  auto u = load_unit("one\ntwo\nthree\n");
  u.replace_line(1, "TWO");
  EXPECT_EQ(render(u), "one\nTWO\nthree\n");
}

TEST(Render, ReplacePropagatesCommentState) {
  auto u = load_unit("a;\nb;\nc;\n");
  u.replace_line(0, "a; /* open");
  EXPECT_TRUE(u.line(1).comment_only());
  u.replace_line(0, "a;");
  EXPECT_FALSE(u.line(1).comment_only());
}

TEST(Render, PropertyRoundTripRandomBytes) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const std::string t = gen::random_text(rng, 200);
    ASSERT_EQ(render(load_unit(t)), t);
  }
}

TEST(Keywords, Classification) {
  EXPECT_TRUE(is_c_keyword("while"));
  EXPECT_FALSE(is_c_keyword("redundant_t"));
  EXPECT_FALSE(is_c_keyword("main"));
}

}  // namespace
}  // namespace cpm
