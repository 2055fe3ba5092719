#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ephs/error.hpp"

namespace ephs::detail {

enum class TokenKind { identifier, number, string, punct, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;  // identifier name, punctuation, or unquoted string body
  double number = 0.0;
  int line = 1;
  int col = 1;
};

// Splits `text` into tokens. `#` starts a line comment. Throws a syntax error
// with the offending position on malformed input.
std::vector<Token> tokenize(std::string_view text, const std::string& file);

class TokenStream {
 public:
  TokenStream(std::vector<Token> tokens, std::string file)
      : tokens_(std::move(tokens)), file_(std::move(file)) {}

  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool at_end() const { return peek().kind == TokenKind::end; }

  bool is_punct(std::string_view p, std::size_t ahead = 0) const;
  bool is_keyword(std::string_view word, std::size_t ahead = 0) const;
  bool accept_punct(std::string_view p);

  const Token& expect_punct(std::string_view p);
  const Token& expect_keyword(std::string_view word);
  const Token& expect_identifier(std::string_view what);
  const Token& expect_string(std::string_view what);

  SourceLoc loc_of(const Token& t) const { return SourceLoc{file_, t.line, t.col}; }
  SourceLoc loc() const { return loc_of(peek()); }
  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] void fail_at(const Token& t, const std::string& message) const;

  const std::string& file() const { return file_; }

 private:
  std::vector<Token> tokens_;
  std::string file_;
  std::size_t pos_ = 0;
};

std::string describe(const Token& t);

}  // namespace ephs::detail
