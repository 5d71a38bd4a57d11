// Copyright (c) 2026 The camctl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lexer.hpp"

#include <cctype>
#include <charconv>

#include "cam/conlang.hpp"

namespace cam::lang::detail
{

namespace
{

bool ident_start(char c) {return std::isalpha(static_cast<unsigned char>(c)) || c == '_';}
bool ident_char(char c) {return std::isalnum(static_cast<unsigned char>(c)) || c == '_';}

}  // namespace

std::vector<Token> lex(std::string_view src)
{
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
      for (std::size_t k = 0; k < n; ++k) {
        if (src[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
        ++i;
      }
    };

  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') {
        advance(1);
      }
      continue;
    }
    Token t{Tok::End, "", 0.0, false, line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) {
        ++j;
      }
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() &&
      std::isdigit(static_cast<unsigned char>(src[i + 1]))))
    {
      std::size_t j = i;
      bool integral = true;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
        ++j;
      }
      if (j < src.size() && src[j] == '.') {
        integral = false;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          ++j;
        }
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) {
          ++k;
        }
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          integral = false;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
            ++j;
          }
        }
      }
      const auto text = src.substr(i, j - i);
      double value = 0.0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw SyntaxError(line, col, {"number"}, std::string(text));
      }
      t.kind = Tok::Number;
      t.text = std::string(text);
      t.number = value;
      t.integral = integral;
      advance(j - i);
    } else if (c == '"') {
      advance(1);
      std::string s;
      bool closed = false;
      while (i < src.size()) {
        const char d = src[i];
        if (d == '"') {
          advance(1);
          closed = true;
          break;
        }
        if (d == '\\' && i + 1 < src.size()) {
          const char n = src[i + 1];
          s.push_back(n == 'n' ? '\n' : n);
          advance(2);
          continue;
        }
        s.push_back(d);
        advance(1);
      }
      if (!closed) {
        throw SyntaxError(t.line, t.col, {"closing quote"}, "end of input");
      }
      t.kind = Tok::String;
      t.text = std::move(s);
    } else {
      static constexpr std::string_view two[] = {"<=", ">=", "=="};
      static constexpr std::string_view one = "(){}[],=<>+-*/";
      t.kind = Tok::Punct;
      for (auto op : two) {
        if (src.substr(i, 2) == op) {
          t.text = std::string(op);
        }
      }
      if (t.text.empty()) {
        if (one.find(c) == std::string_view::npos) {
          throw SyntaxError(line, col, {"token"}, std::string(1, c));
        }
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::End, "", 0.0, false, line, col});
  return out;
}

}  // namespace cam::lang::detail
