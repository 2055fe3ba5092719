#include "lexer.hpp"

#include <cctype>
#include <charconv>

namespace ephs::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<Token> tokenize(std::string_view text, const std::string& file) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::syntax, msg, SourceLoc{file, line, col});
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == '\n' || c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.col = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      tok.kind = TokenKind::identifier;
      tok.text = std::string(text.substr(i, j - i));
      advance(j - i);
    } else if (digit(c) || (c == '.' && i + 1 < text.size() && digit(text[i + 1]))) {
      std::size_t j = i;
      while (j < text.size() && digit(text[j])) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && digit(text[j])) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && digit(text[k])) {
          while (k < text.size() && digit(text[k])) ++k;
          j = k;
        } else {
          advance(k - i);
          fail("malformed exponent in numeric literal");
        }
      }
      if (j < text.size() && ident_start(text[j])) {
        advance(j - i);
        fail("unexpected character '" + std::string(1, text[j - 0]) + "' after number");
      }
      tok.kind = TokenKind::number;
      tok.text = std::string(text.substr(i, j - i));
      auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
      if (res.ec != std::errc()) fail("numeric literal out of range: " + tok.text);
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      std::string body;
      while (j < text.size() && text[j] != '"' && text[j] != '\n') {
        if (text[j] == '\\' && j + 1 < text.size()) {
          body += text[j + 1];
          j += 2;
        } else {
          body += text[j++];
        }
      }
      if (j >= text.size() || text[j] != '"') fail("unterminated string literal");
      tok.kind = TokenKind::string;
      tok.text = std::move(body);
      advance(j + 1 - i);
    } else {
      static constexpr std::string_view kTwo[] = {"--"};
      bool matched = false;
      for (auto p : kTwo) {
        if (text.substr(i, p.size()) == p) {
          tok.kind = TokenKind::punct;
          tok.text = std::string(p);
          advance(p.size());
          matched = true;
          break;
        }
      }
      if (!matched) {
        static constexpr std::string_view kSingle = "{}[](),:=.+-*/^";
        if (kSingle.find(c) == std::string_view::npos) {
          fail(std::string("unexpected character '") + c + "'");
        }
        tok.kind = TokenKind::punct;
        tok.text = std::string(1, c);
        advance(1);
      }
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokenKind::end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::identifier: return "'" + t.text + "'";
    case TokenKind::number: return "number " + t.text;
    case TokenKind::string: return "string \"" + t.text + "\"";
    case TokenKind::punct: return "'" + t.text + "'";
    case TokenKind::end: return "end of input";
  }
  return "token";
}

const Token& TokenStream::peek(std::size_t ahead) const {
  std::size_t idx = pos_ + ahead;
  if (idx >= tokens_.size()) return tokens_.back();
  return tokens_[idx];
}

const Token& TokenStream::next() {
  const Token& t = peek();
  if (pos_ < tokens_.size() - 1) ++pos_;
  return t;
}

bool TokenStream::is_punct(std::string_view p, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == TokenKind::punct && t.text == p;
}

bool TokenStream::is_keyword(std::string_view word, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == TokenKind::identifier && t.text == word;
}

bool TokenStream::accept_punct(std::string_view p) {
  if (!is_punct(p)) return false;
  next();
  return true;
}

const Token& TokenStream::expect_punct(std::string_view p) {
  if (!is_punct(p)) fail("expected '" + std::string(p) + "', found " + describe(peek()));
  return next();
}

const Token& TokenStream::expect_keyword(std::string_view word) {
  if (!is_keyword(word)) fail("expected '" + std::string(word) + "', found " + describe(peek()));
  return next();
}

const Token& TokenStream::expect_identifier(std::string_view what) {
  if (peek().kind != TokenKind::identifier) {
    fail("expected " + std::string(what) + ", found " + describe(peek()));
  }
  return next();
}

const Token& TokenStream::expect_string(std::string_view what) {
  if (peek().kind != TokenKind::string) {
    fail("expected " + std::string(what) + ", found " + describe(peek()));
  }
  return next();
}

void TokenStream::fail(const std::string& message) const { fail_at(peek(), message); }

void TokenStream::fail_at(const Token& t, const std::string& message) const {
  throw Error(ErrorKind::syntax, message, loc_of(t));
}

}  // namespace ephs::detail
