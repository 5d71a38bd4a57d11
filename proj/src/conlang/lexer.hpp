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

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cam::lang::detail
{

enum class Tok { Ident, Number, String, Punct, End };

struct Token
{
  Tok kind;
  std::string text;  // identifier, punctuation, or decoded string
  double number = 0.0;
  bool integral = false;
  int line = 1;
  int col = 1;
};

/// Throws SyntaxError on malformed input.
std::vector<Token> lex(std::string_view source);

}  // namespace cam::lang::detail
