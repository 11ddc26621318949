#pragma once

// Tokenizer for guidance scripts.  Tracks line/column for error messages;
// `//` comments run to end of line.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "wasym/common.hpp"

namespace wasym::script {

enum class Tok : u8 {
  End,
  Ident,    // text
  Int,      // ival (also char literals, as their code point)
  Float,    // fval
  Str,      // text (without quotes)
  // punctuation / operators
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Semi, Colon, Assign,      // ;  :  :=
  Eq,                       // = or ==  (assignment or equality by position)
  Ne, Lt, Gt, Le, Ge,       // != < > <= >=
  Plus, Minus, Star, Slash, Percent,
  Dollar,
  // keywords
  KwAnd, KwOr, KwNot, KwIf, KwElse, KwWhile, KwDo, KwPre, KwPost,
  KwTrue, KwFalse, KwHigher, KwLower,
  KwLuse, KwPuse, KwCuse, KwOuse, KwAuse, KwDef, KwFunc, KwCall,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  i64 ival = 0;
  double fval = 0;
  bool eq_was_double = false;  // Eq: written as `==` (vs `=`)
  int line = 1;
  int col = 1;
};

[[noreturn]] inline void syntax_error(int line, int col, const std::string& what) {
  fail(Errc::script_syntax, "script:%d:%d: %s", line, col, what.c_str());
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;

  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (i < src.size() && src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto peek = [&](size_t off = 0) -> char {
    return i + off < src.size() ? src[i + off] : '\0';
  };
  auto push = [&](Tok k, int l, int c) -> Token& {
    Token t;
    t.kind = k;
    t.line = l;
    t.col = c;
    out.push_back(std::move(t));
    return out.back();
  };

  while (i < src.size()) {
    char ch = peek();
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
      advance(1);
      continue;
    }
    if (ch == '/' && peek(1) == '/') {
      while (i < src.size() && peek() != '\n') advance(1);
      continue;
    }
    int tl = line, tc = col;
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      size_t start = i;
      bool hex = ch == '0' && (peek(1) == 'x' || peek(1) == 'X');
      if (hex) {
        advance(2);
        while (std::isxdigit(static_cast<unsigned char>(peek()))) advance(1);
        if (i == start + 2) syntax_error(tl, tc, "malformed hex literal");
        Token& t = push(Tok::Int, tl, tc);
        t.ival = static_cast<i64>(std::stoull(std::string(src.substr(start + 2, i - start - 2)), nullptr, 16));
        continue;
      }
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance(1);
      bool is_float = false;
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        is_float = true;
        advance(1);
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance(1);
      }
      if (peek() == 'e' || peek() == 'E') {
        size_t save = i;
        advance(1);
        if (peek() == '+' || peek() == '-') advance(1);
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
          is_float = true;
          while (std::isdigit(static_cast<unsigned char>(peek()))) advance(1);
        } else {
          i = save;  // 'e' starts an identifier; back off
        }
      }
      std::string text(src.substr(start, i - start));
      if (is_float) {
        Token& t = push(Tok::Float, tl, tc);
        t.fval = std::stod(text);
      } else {
        Token& t = push(Tok::Int, tl, tc);
        t.ival = static_cast<i64>(std::stoull(text));
      }
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      size_t start = i;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') advance(1);
      std::string text(src.substr(start, i - start));
      Tok k = Tok::Ident;
      if (text == "and") k = Tok::KwAnd;
      else if (text == "or") k = Tok::KwOr;
      else if (text == "not") k = Tok::KwNot;
      else if (text == "if") k = Tok::KwIf;
      else if (text == "else") k = Tok::KwElse;
      else if (text == "while") k = Tok::KwWhile;
      else if (text == "do") k = Tok::KwDo;
      else if (text == "pre") k = Tok::KwPre;
      else if (text == "post") k = Tok::KwPost;
      else if (text == "true") k = Tok::KwTrue;
      else if (text == "false") k = Tok::KwFalse;
      else if (text == "HIGHER") k = Tok::KwHigher;
      else if (text == "LOWER") k = Tok::KwLower;
      else if (text == "luse") k = Tok::KwLuse;
      else if (text == "puse") k = Tok::KwPuse;
      else if (text == "cuse") k = Tok::KwCuse;
      else if (text == "ouse") k = Tok::KwOuse;
      else if (text == "ause") k = Tok::KwAuse;
      else if (text == "def") k = Tok::KwDef;
      else if (text == "func") k = Tok::KwFunc;
      else if (text == "call") k = Tok::KwCall;
      Token& t = push(k, tl, tc);
      t.text = std::move(text);
      continue;
    }
    if (ch == '"') {
      advance(1);
      std::string text;
      while (peek() != '"') {
        if (i >= src.size() || peek() == '\n') syntax_error(tl, tc, "unterminated string literal");
        if (peek() == '\\') {
          advance(1);
          char esc = peek();
          switch (esc) {
            case 'n': text += '\n'; break;
            case 't': text += '\t'; break;
            case '\\': text += '\\'; break;
            case '"': text += '"'; break;
            case '0': text += '\0'; break;
            default: syntax_error(line, col, strf("unknown escape '\\%c'", esc));
          }
          advance(1);
          continue;
        }
        text += peek();
        advance(1);
      }
      advance(1);
      push(Tok::Str, tl, tc).text = std::move(text);
      continue;
    }
    if (ch == '\'') {
      advance(1);
      if (i >= src.size()) syntax_error(tl, tc, "unterminated char literal");
      i64 v;
      if (peek() == '\\') {
        advance(1);
        switch (peek()) {
          case 'n': v = '\n'; break;
          case 't': v = '\t'; break;
          case '\\': v = '\\'; break;
          case '\'': v = '\''; break;
          case '0': v = 0; break;
          default: syntax_error(line, col, strf("unknown escape '\\%c'", peek()));
        }
        advance(1);
      } else {
        v = static_cast<unsigned char>(peek());
        advance(1);
      }
      if (peek() != '\'') syntax_error(tl, tc, "unterminated char literal");
      advance(1);
      push(Tok::Int, tl, tc).ival = v;
      continue;
    }
    switch (ch) {
      case '(': push(Tok::LParen, tl, tc); advance(1); continue;
      case ')': push(Tok::RParen, tl, tc); advance(1); continue;
      case '{': push(Tok::LBrace, tl, tc); advance(1); continue;
      case '}': push(Tok::RBrace, tl, tc); advance(1); continue;
      case '[': push(Tok::LBracket, tl, tc); advance(1); continue;
      case ']': push(Tok::RBracket, tl, tc); advance(1); continue;
      case ';': push(Tok::Semi, tl, tc); advance(1); continue;
      case '$': push(Tok::Dollar, tl, tc); advance(1); continue;
      case '+': push(Tok::Plus, tl, tc); advance(1); continue;
      case '-': push(Tok::Minus, tl, tc); advance(1); continue;
      case '*': push(Tok::Star, tl, tc); advance(1); continue;
      case '/': push(Tok::Slash, tl, tc); advance(1); continue;
      case '%': push(Tok::Percent, tl, tc); advance(1); continue;
      case ':':
        if (peek(1) == '=') {
          push(Tok::Assign, tl, tc);
          advance(2);
        } else {
          push(Tok::Colon, tl, tc);
          advance(1);
        }
        continue;
      case '=':
        if (peek(1) == '=') {
          push(Tok::Eq, tl, tc).eq_was_double = true;
          advance(2);
        } else {
          push(Tok::Eq, tl, tc);
          advance(1);
        }
        continue;
      case '!':
        if (peek(1) == '=') {
          push(Tok::Ne, tl, tc);
          advance(2);
          continue;
        }
        syntax_error(tl, tc, "unexpected '!'");
      case '<':
        if (peek(1) == '=') {
          push(Tok::Le, tl, tc);
          advance(2);
        } else {
          push(Tok::Lt, tl, tc);
          advance(1);
        }
        continue;
      case '>':
        if (peek(1) == '=') {
          push(Tok::Ge, tl, tc);
          advance(2);
        } else {
          push(Tok::Gt, tl, tc);
          advance(1);
        }
        continue;
      default:
        syntax_error(tl, tc, strf("unexpected character '%c'", ch));
    }
  }
  push(Tok::End, line, col);
  return out;
}

}  // namespace wasym::script
